#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "segtopic/errors.hpp"
#include "segtopic/eval.hpp"
#include "segtopic/rng.hpp"
#include "util.hpp"

using namespace segtopic;
using testutil::make_document;
using testutil::make_segment;

namespace {

// Reference corpus with one document; labels[i] is segment i's label set.
std::vector<Document> one_doc(const std::vector<std::set<std::size_t>>& labels) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    segs.push_back(make_segment("s" + std::to_string(i), {"word"}, labels[i]));
  }
  return {make_document("D", segs)};
}

SystemOutput records_for(const std::vector<Document>& ref,
                         const std::vector<std::array<double, kNumInDomain>>& posts) {
  SystemOutput out;
  std::size_t i = 0;
  for (const Document& doc : ref) {
    for (const Segment& seg : doc.segments) {
      SystemRecord r;
      r.doc_id = doc.doc_id;
      r.segment_id = seg.segment_id;
      r.posteriors = posts[i++];
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("average precision hand values") {
  // Ranked [0.9, 0.8, 0.7] with relevance [0,1,1]: hits at ranks 2 and 3.
  CHECK(average_precision({0.9, 0.8, 0.7}, {0, 1, 1}) ==
        doctest::Approx((0.5 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
  // Everything relevant scores 1 regardless of the ordering.
  CHECK(average_precision({0.2, 0.9, 0.5}, {1, 1, 1}) == 1.0);
  // A single relevant item at rank r contributes 1/r.
  CHECK(average_precision({0.5, 0.9}, {1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(average_precision({0.9, 0.5}, {1, 0}) == 1.0);
}

TEST_CASE("average precision agrees with the rank-counting oracle") {
  Rng rng(3);
  std::vector<double> scores(6);
  for (double& s : scores) s = rng.uniform();
  for (unsigned mask = 1; mask < 64; ++mask) {  // every nonempty relevance pattern
    std::vector<int> rel(6);
    for (int i = 0; i < 6; ++i) rel[i] = (mask >> i) & 1;
    CHECK(average_precision(scores, rel) ==
          doctest::Approx(oracle::ap_rank_count(scores, rel)).epsilon(1e-14));
  }

  // Tied scores keep input order; the oracle encodes the same convention.
  const std::vector<double> tied = {0.3, 0.5, 0.3, 0.5, 0.1, 0.3};
  for (unsigned mask = 1; mask < 64; ++mask) {
    std::vector<int> rel(6);
    for (int i = 0; i < 6; ++i) rel[i] = (mask >> i) & 1;
    CHECK(average_precision(tied, rel) ==
          doctest::Approx(oracle::ap_rank_count(tied, rel)).epsilon(1e-14));
  }
}

TEST_CASE("average precision is invariant under monotone transforms") {
  Rng rng(5);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> scores(8);
    for (double& s : scores) s = rng.uniform(-2.0, 2.0);
    std::vector<int> rel(8);
    rel[rng.uniform_int(8)] = 1;
    for (int i = 0; i < 8; ++i) {
      if (rng.uniform() < 0.4) rel[i] = 1;
    }
    std::vector<double> warped(8);
    for (int i = 0; i < 8; ++i) warped[i] = std::exp(scores[i]);
    CHECK(average_precision(scores, rel) == average_precision(warped, rel));
  }
}

TEST_CASE("random rankings average to the exact combinatorial expectation") {
  // n=4 with 2 relevant items: enumerating the 6 placements gives E[AP] = 49/72.
  Rng rng(7);
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  double sum = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    rng.shuffle(perm);
    std::vector<double> scores(4);
    for (int i = 0; i < 4; ++i) scores[perm[i]] = 4.0 - i;  // distinct scores
    sum += average_precision(scores, {1, 1, 0, 0});
  }
  CHECK(std::fabs(sum / trials - 49.0 / 72.0) < 0.01);
}

TEST_CASE("average precision rejects degenerate inputs") {
  CHECK_THROWS_AS(average_precision({}, {}), DataError);
  CHECK_THROWS_AS(average_precision({0.5, 0.2}, {0, 0}), DataError);
  CHECK_THROWS_AS(average_precision({0.5}, {1, 0}), UsageError);
}

TEST_CASE("tie bounds bracket the stable value") {
  // Two tied scores where only the second item is relevant.
  const ApBounds b = average_precision_bounds({0.5, 0.5}, {0, 1});
  CHECK(b.stable == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.pessimistic == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.optimistic == 1.0);

  Rng rng(9);
  for (int it = 0; it < 30; ++it) {
    std::vector<double> scores(10);
    for (double& s : scores) s = 0.1 * (1 + rng.uniform_int(4));  // heavy ties
    std::vector<int> rel(10);
    bool any = false;
    for (int i = 0; i < 10; ++i) {
      rel[i] = rng.uniform() < 0.4;
      any = any || rel[i];
    }
    if (!any) rel[0] = 1;
    const ApBounds bounds = average_precision_bounds(scores, rel);
    CHECK(bounds.pessimistic <= bounds.stable + 1e-12);
    CHECK(bounds.stable <= bounds.optimistic + 1e-12);
  }
}

TEST_CASE("relevance layer ranks segments by their max in-domain posterior") {
  const auto ref = one_doc({{0}, {kOutOfDomainId}, {2, 5}, {kOutOfDomainId}, {1}, {9}});
  std::vector<std::array<double, kNumInDomain>> posts(6);
  // Encode the intended max posterior per segment in topic slots.
  posts[0][0] = 0.9;
  posts[1][3] = 0.8;   // confident but wrong: out-of-domain segment
  posts[2][5] = 0.7;
  posts[3][1] = 0.2;
  posts[4][1] = 0.6;
  posts[5][9] = 0.4;
  const double ap = score_relevance(records_for(ref, posts), ref);
  // Max posteriors [0.9 0.8 0.7 0.2 0.6 0.4], relevant [1 0 1 0 1 1].
  const double expect =
      average_precision({0.9, 0.8, 0.7, 0.2, 0.6, 0.4}, {1, 0, 1, 0, 1, 1});
  CHECK(ap == doctest::Approx(expect).epsilon(1e-15));
  CHECK(ap == doctest::Approx(oracle::ap_rank_count(
                  {0.9, 0.8, 0.7, 0.2, 0.6, 0.4}, {1, 0, 1, 0, 1, 1}))
                  .epsilon(1e-14));
}

TEST_CASE("relevance layer requires an in-domain segment") {
  const auto ref = one_doc({{kOutOfDomainId}, {kOutOfDomainId}});
  std::vector<std::array<double, kNumInDomain>> posts(2);
  CHECK_THROWS_AS(score_relevance(records_for(ref, posts), ref), DataError);
}

TEST_CASE("type layer hand case with an interleaved false positive") {
  const auto ref = one_doc({{0}, {1}});
  std::vector<std::array<double, kNumInDomain>> posts(2);
  posts[0][0] = 0.9;   // gold pair
  posts[0][1] = 0.2;
  posts[1][0] = 0.95;  // non-gold pair outranking the gold ones
  posts[1][1] = 0.8;   // gold pair
  const double ap = score_type(records_for(ref, posts), ref);
  // Sweep: t=0.95 -> P=0; t=0.9 -> P=1/2, R=1/2; t=0.8 -> P=2/3, R=1.
  CHECK(ap == doctest::Approx(0.5 * 0.5 + 0.5 * 2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("type layer equals the pooled brute-force sweep") {
  Rng rng(11);
  for (int it = 0; it < 10; ++it) {
    // Up to 3 segments; posterior values drawn from a tiny set to force ties.
    const std::size_t n = 1 + rng.uniform_int(3);
    std::vector<std::set<std::size_t>> labels(n);
    for (auto& ls : labels) {
      ls.insert(rng.uniform_int(3));
      if (rng.uniform() < 0.3) ls.insert(rng.uniform_int(3));
    }
    const auto ref = one_doc(labels);
    std::vector<std::array<double, kNumInDomain>> posts(n);
    for (auto& p : posts) {
      for (double& v : p) v = 0.25 * rng.uniform_int(5);
    }
    const SystemOutput out = records_for(ref, posts);

    std::vector<double> pooled_scores;
    std::vector<int> pooled_gold;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kNumInDomain; ++k) {
        pooled_scores.push_back(posts[i][k]);
        pooled_gold.push_back(labels[i].count(k) ? 1 : 0);
      }
    }
    CHECK(score_type(out, ref) ==
          doctest::Approx(oracle::pooled_threshold_ap(pooled_scores, pooled_gold))
              .epsilon(1e-12));
  }
}

TEST_CASE("uniform posteriors score the gold density; a perfect system scores 1") {
  const auto ref = one_doc({{0}, {1, 2}, {kOutOfDomainId}});
  std::vector<std::array<double, kNumInDomain>> flat(3);
  for (auto& p : flat) p.fill(0.5);
  // One threshold group holding all 33 pairs: AP = precision = 3/33.
  CHECK(score_type(records_for(ref, flat), ref) ==
        doctest::Approx(3.0 / 33.0).epsilon(1e-15));

  std::vector<std::array<double, kNumInDomain>> perfect(3);
  perfect[0][0] = 1.0;
  perfect[1][1] = 1.0;
  perfect[1][2] = 1.0;
  CHECK(score_type(records_for(ref, perfect), ref) == 1.0);
  CHECK(score_relevance(records_for(ref, perfect), ref) == 1.0);
}

TEST_CASE("type layer needs at least one gold pair") {
  const auto ref = one_doc({{kOutOfDomainId}});
  std::vector<std::array<double, kNumInDomain>> posts(1);
  CHECK_THROWS_AS(score_type(records_for(ref, posts), ref), DataError);
}

TEST_CASE("output/reference misalignment is a data error naming the segment") {
  const auto ref = one_doc({{0}, {1}});
  std::vector<std::array<double, kNumInDomain>> posts(2);
  posts[0][0] = 0.9;
  posts[1][1] = 0.8;
  SystemOutput out = records_for(ref, posts);

  SUBCASE("missing segment") {
    out.pop_back();
    CHECK_THROWS_WITH_AS(score_type(out, ref), doctest::Contains("s1"), DataError);
  }
  SUBCASE("duplicate segment") {
    out.push_back(out[0]);
    CHECK_THROWS_WITH_AS(score_type(out, ref), doctest::Contains("duplicate"), DataError);
  }
  SUBCASE("record attached to the wrong document") {
    out[1].doc_id = "OTHER";
    CHECK_THROWS_AS(score_type(out, ref), DataError);
  }
  SUBCASE("extra record") {
    SystemRecord extra = out[0];
    extra.segment_id = "sX";
    out.push_back(extra);
    CHECK_THROWS_AS(score_type(out, ref), DataError);
  }
}

TEST_CASE("scoring never reads an out-of-domain posterior") {
  // Structural: a record has exactly 11 slots, one per in-domain topic.
  static_assert(std::tuple_size<decltype(SystemRecord::posteriors)>::value ==
                kNumInDomain);
  // Behavioral: an out-of-domain segment enters as a negative everywhere.
  const auto ref = one_doc({{0}, {kOutOfDomainId}});
  std::vector<std::array<double, kNumInDomain>> posts(2);
  posts[0][0] = 0.9;
  posts[1][0] = 0.1;
  const ScoreReport rep = score_output(records_for(ref, posts), ref);
  CHECK(rep.relevance_ap == 1.0);
  CHECK(rep.type_ap == 1.0);
  CHECK(rep.num_segments == 2);
  CHECK(rep.type_prevalence == doctest::Approx(1.0 / 22.0).epsilon(1e-15));
}

TEST_CASE("score report carries consistent curves and serializes stably") {
  const auto ref = one_doc({{0}, {1}, {kOutOfDomainId}});
  std::vector<std::array<double, kNumInDomain>> posts(3);
  posts[0][0] = 0.9;
  posts[1][1] = 0.7;
  posts[2][3] = 0.4;
  const ScoreReport rep = score_output(records_for(ref, posts), ref);
  CHECK(rep.relevance_curve.size() == 3);  // one point per segment rank
  CHECK(!rep.type_curve.empty());
  for (std::size_t i = 1; i < rep.type_curve.size(); ++i) {
    CHECK(rep.type_curve[i].recall >= rep.type_curve[i - 1].recall);  // sweep descends
  }
  const std::string text = serialize_report(rep);
  CHECK(text.find("segtopic-score-report v1\n") == 0);
  CHECK(text.find("relevance-ap ") != std::string::npos);
  CHECK(text.find("type-ap ") != std::string::npos);
  CHECK(serialize_report(rep) == text);  // deterministic
}

TEST_CASE("system output files round trip byte for byte") {
  const auto ref = one_doc({{0}, {1}});
  std::vector<std::array<double, kNumInDomain>> posts(2);
  posts[0][0] = 1.0 / 3.0;  // exercise 17-digit float round trip
  posts[1][1] = 0.1 + 0.2;
  const SystemOutput out = records_for(ref, posts);
  const std::string p1 = testutil::scratch_file("sysout1.txt");
  const std::string p2 = testutil::scratch_file("sysout2.txt");
  write_system_output(out, p1);
  const SystemOutput loaded = load_system_output(p1);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].posteriors == out[0].posteriors);
  CHECK(loaded[1].posteriors == out[1].posteriors);
  write_system_output(loaded, p2);
  CHECK(testutil::read_text(p1) == testutil::read_text(p2));

  CHECK_THROWS_AS(load_system_output(testutil::scratch_file("nonexistent.txt")),
                  DataError);
}

}  // TEST_SUITE
