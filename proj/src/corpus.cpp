#include "segtopic/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "segtopic/errors.hpp"
#include "segtopic/rng.hpp"

namespace segtopic {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_segment(const Segment& seg, bool annotated, const std::string& where) {
  if (seg.segment_id.empty()) throw DataError(where + ": empty segment_id");
  if (!(seg.music_posterior > 0.0 && seg.music_posterior < 1.0)) {
    throw DataError(where + ": music_posterior " + fmt_double(seg.music_posterior) +
                    " outside (0,1)");
  }
  if (seg.is_ood() && seg.labels.size() > 1) {
    throw DataError(where + ": exclusive label violated (out-of-domain mixed with in-domain)");
  }
  if (annotated && seg.labels.empty()) {
    throw DataError(where + ": annotated segment has no labels");
  }
}

Segment parse_segment(const json& j, const std::string& where) {
  Segment seg;
  if (!j.is_object()) throw DataError(where + ": segment is not an object");
  seg.segment_id = j.at("segment_id").get<std::string>();
  for (const auto& tok : j.at("tokens")) seg.tokens.push_back(tok.get<std::string>());
  seg.music_posterior = j.at("music_posterior").get<double>();
  for (const auto& name : j.at("labels")) {
    const std::string label_name = name.get<std::string>();
    auto id = topic_id(label_name);
    if (!id) throw DataError(where + ": unknown label name \"" + label_name + "\"");
    seg.labels.insert(*id);
  }
  return seg;
}

}  // namespace

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::vector<Document> corpus;
  std::unordered_set<std::string> doc_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": malformed line: " + e.what());
    }
    try {
      Document doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      if (j.contains("annotated")) doc.annotated = j.at("annotated").get<bool>();
      std::unordered_set<std::string> seg_ids;
      for (const auto& js : j.at("segments")) {
        Segment seg = parse_segment(js, where);
        validate_segment(seg, doc.annotated, where);
        if (!seg_ids.insert(seg.segment_id).second) {
          throw DataError(where + ": duplicate segment_id \"" + seg.segment_id + "\"");
        }
        doc.segments.push_back(std::move(seg));
      }
      if (doc.segments.empty()) throw DataError(where + ": document has no segments");
      if (!doc_ids.insert(doc.doc_id).second) {
        throw DataError(where + ": duplicate doc_id \"" + doc.doc_id + "\"");
      }
      corpus.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return corpus;
}

void write_corpus(const std::vector<Document>& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  // Doubles are emitted with 17 significant digits, so readback is exact.
  for (const Document& doc : corpus) {
    out << "{\"doc_id\":" << json(doc.doc_id).dump();
    if (!doc.annotated) out << ",\"annotated\":false";
    out << ",\"segments\":[";
    for (std::size_t s = 0; s < doc.segments.size(); ++s) {
      const Segment& seg = doc.segments[s];
      if (s > 0) out << ",";
      out << "{\"segment_id\":" << json(seg.segment_id).dump() << ",\"tokens\":[";
      for (std::size_t t = 0; t < seg.tokens.size(); ++t) {
        if (t > 0) out << ",";
        out << json(seg.tokens[t]).dump();
      }
      out << "],\"music_posterior\":" << fmt_double(seg.music_posterior) << ",\"labels\":[";
      std::size_t written = 0;
      for (std::size_t id : seg.labels) {
        if (written++ > 0) out << ",";
        out << json(std::string(topic_name(id))).dump();
      }
      out << "]}";
    }
    out << "]}\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

CorpusSpec load_corpus_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open corpus spec: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": malformed JSON: " + e.what());
  }
  static const std::set<std::string> keys = {
      "num_documents",      "segments_per_doc_min", "segments_per_doc_max",
      "topic_stay_probability", "vocab_size",       "tokens_per_segment_min",
      "tokens_per_segment_max", "topic_word_concentration", "label_noise",
      "ood_fraction",       "music_posterior_ood_shift", "seed"};
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) {
      throw UsageError(path + ": unknown corpus spec key \"" + item.key() + "\"");
    }
  }
  CorpusSpec spec;
  try {
    spec.num_documents = j.value("num_documents", spec.num_documents);
    spec.segments_per_doc_min = j.value("segments_per_doc_min", spec.segments_per_doc_min);
    spec.segments_per_doc_max = j.value("segments_per_doc_max", spec.segments_per_doc_max);
    spec.topic_stay_probability =
        j.value("topic_stay_probability", spec.topic_stay_probability);
    spec.vocab_size = j.value("vocab_size", spec.vocab_size);
    spec.tokens_per_segment_min =
        j.value("tokens_per_segment_min", spec.tokens_per_segment_min);
    spec.tokens_per_segment_max =
        j.value("tokens_per_segment_max", spec.tokens_per_segment_max);
    spec.topic_word_concentration =
        j.value("topic_word_concentration", spec.topic_word_concentration);
    spec.label_noise = j.value("label_noise", spec.label_noise);
    spec.ood_fraction = j.value("ood_fraction", spec.ood_fraction);
    spec.music_posterior_ood_shift =
        j.value("music_posterior_ood_shift", spec.music_posterior_ood_shift);
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw UsageError(path + ": bad corpus spec field: " + e.what());
  }
  spec.validate();
  return spec;
}

void CorpusSpec::validate() const {
  const auto bad = [](const std::string& msg) { throw UsageError("corpus spec: " + msg); };
  if (segments_per_doc_min < 1 || segments_per_doc_min > segments_per_doc_max)
    bad("segments_per_doc range is empty");
  if (tokens_per_segment_min < 1 || tokens_per_segment_min > tokens_per_segment_max)
    bad("tokens_per_segment range is empty");
  if (vocab_size < kNumTopics) bad("vocab_size must be >= 12");
  if (!(topic_stay_probability >= 0.0 && topic_stay_probability <= 1.0))
    bad("topic_stay_probability outside [0,1]");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) bad("label_noise outside [0,1]");
  if (!(ood_fraction >= 0.0 && ood_fraction <= 1.0)) bad("ood_fraction outside [0,1]");
  if (!(topic_word_concentration > 0.0)) bad("topic_word_concentration must be > 0");
}

namespace {

std::string make_token(std::size_t word) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "w%04zu", word);
  return buf;
}

// Per-topic cumulative word distributions. Each vocabulary word has a home
// topic (word mod 11); topic t boosts its home words by the concentration
// factor. Out-of-domain draws uniformly over the whole vocabulary.
std::vector<std::vector<double>> build_topic_cdfs(std::size_t vocab, double concentration) {
  std::vector<std::vector<double>> cdfs(kNumInDomain);
  for (std::size_t t = 0; t < kNumInDomain; ++t) {
    std::vector<double>& cdf = cdfs[t];
    cdf.resize(vocab);
    double acc = 0.0;
    for (std::size_t w = 0; w < vocab; ++w) {
      acc += 1.0 + (w % kNumInDomain == t ? concentration : 0.0);
      cdf[w] = acc;
    }
  }
  return cdfs;
}

std::size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

double clamp_unit_open(double v) { return std::min(1.0 - 1e-6, std::max(1e-6, v)); }

}  // namespace

std::vector<Document> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto cdfs = build_topic_cdfs(spec.vocab_size, spec.topic_word_concentration);

  std::vector<Document> corpus;
  corpus.reserve(spec.num_documents);
  for (std::size_t d = 0; d < spec.num_documents; ++d) {
    Document doc;
    char id[24];
    std::snprintf(id, sizeof(id), "D%04zu", d);
    doc.doc_id = id;

    const std::size_t n_seg =
        spec.segments_per_doc_min +
        rng.uniform_int(spec.segments_per_doc_max - spec.segments_per_doc_min + 1);
    std::size_t topic = rng.uniform_int(kNumInDomain);
    for (std::size_t s = 0; s < n_seg; ++s) {
      if (s > 0 && rng.uniform() >= spec.topic_stay_probability) {
        const std::size_t r = rng.uniform_int(kNumInDomain - 1);
        topic = r >= topic ? r + 1 : r;
      }
      const bool ood = rng.uniform() < spec.ood_fraction;

      Segment seg;
      char sid[32];
      std::snprintf(sid, sizeof(sid), "%s_%03zu", doc.doc_id.c_str(), s + 1);
      seg.segment_id = sid;

      const std::size_t n_tok =
          spec.tokens_per_segment_min +
          rng.uniform_int(spec.tokens_per_segment_max - spec.tokens_per_segment_min + 1);
      for (std::size_t t = 0; t < n_tok; ++t) {
        const std::size_t w = ood ? rng.uniform_int(spec.vocab_size)
                                  : sample_cdf(cdfs[topic], rng);
        seg.tokens.push_back(make_token(w));
      }

      if (ood) {
        seg.labels = {kOutOfDomainId};
      } else {
        seg.labels = {topic};
        if (rng.uniform() < spec.label_noise) {
          const std::size_t r = rng.uniform_int(kNumInDomain - 1);
          const std::size_t other = r >= topic ? r + 1 : r;
          if (rng.uniform() < 0.5) {
            seg.labels = {other};  // flip
          } else {
            seg.labels.insert(other);  // augment
          }
        }
      }

      double delta = 0.05 + 0.4 * rng.uniform();  // in-domain mean 0.25
      if (ood) delta += spec.music_posterior_ood_shift;
      seg.music_posterior = clamp_unit_open(delta);

      doc.segments.push_back(std::move(seg));
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

namespace {

std::vector<std::set<std::string>> split_ids(std::vector<std::string> ids, std::size_t k,
                                             std::uint64_t seed) {
  if (k < 2) throw UsageError("split_folds: k must be >= 2");
  if (ids.size() < k) {
    throw UsageError("split_folds: k = " + std::to_string(k) + " exceeds item count " +
                     std::to_string(ids.size()));
  }
  Rng rng(seed);
  rng.shuffle(ids);
  std::vector<std::set<std::string>> folds(k);
  for (std::size_t i = 0; i < ids.size(); ++i) folds[i % k].insert(std::move(ids[i]));
  return folds;
}

}  // namespace

std::vector<std::set<std::string>> split_folds(const std::vector<Document>& corpus,
                                               std::size_t k, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const Document& d : corpus) ids.push_back(d.doc_id);
  return split_ids(std::move(ids), k, seed);
}

std::vector<std::set<std::string>> split_folds_by_segment(
    const std::vector<Document>& corpus, std::size_t k, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const Document& d : corpus) {
    for (const Segment& s : d.segments) ids.push_back(s.segment_id);
  }
  return split_ids(std::move(ids), k, seed);
}

std::size_t count_segments(const std::vector<Document>& corpus) {
  std::size_t n = 0;
  for (const Document& d : corpus) n += d.segments.size();
  return n;
}

}  // namespace segtopic
