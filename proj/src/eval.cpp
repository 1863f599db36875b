#include "segtopic/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "segtopic/errors.hpp"

namespace segtopic {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// tie_bias: 0 = stable input order, -1 = irrelevant first (pessimistic),
// +1 = relevant first (optimistic).
double ap_with_ties(const std::vector<double>& scores, const std::vector<int>& relevant,
                    int tie_bias, std::vector<PrPoint>* curve = nullptr) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (tie_bias != 0 && relevant[a] != relevant[b]) {
      return tie_bias > 0 ? relevant[a] > relevant[b] : relevant[a] < relevant[b];
    }
    return false;
  });
  const double total = std::accumulate(relevant.begin(), relevant.end(), 0);
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 1; rank <= n; ++rank) {
    const std::size_t idx = order[rank - 1];
    if (relevant[idx]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
    if (curve) {
      curve->push_back({scores[idx], static_cast<double>(hits) / static_cast<double>(rank),
                        static_cast<double>(hits) / total});
    }
  }
  return sum / total;
}

}  // namespace

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& relevant) {
  if (scores.size() != relevant.size()) throw UsageError("ap: size mismatch");
  if (scores.empty()) throw DataError("ap: empty list");
  if (std::accumulate(relevant.begin(), relevant.end(), 0) == 0) {
    throw DataError("ap: undefined, no relevant items");
  }
  return ap_with_ties(scores, relevant, 0);
}

ApBounds average_precision_bounds(const std::vector<double>& scores,
                                  const std::vector<int>& relevant) {
  ApBounds b;
  b.stable = average_precision(scores, relevant);
  b.pessimistic = ap_with_ties(scores, relevant, -1);
  b.optimistic = ap_with_ties(scores, relevant, +1);
  return b;
}

namespace {

// Validates id correspondence and returns records in reference corpus order.
std::vector<const SystemRecord*> align_output(const SystemOutput& output,
                                              const std::vector<Document>& reference) {
  std::unordered_map<std::string, const SystemRecord*> by_id;
  for (const SystemRecord& r : output) {
    if (!by_id.emplace(r.segment_id, &r).second) {
      throw DataError("system output: duplicate segment_id \"" + r.segment_id + "\"");
    }
  }
  std::vector<const SystemRecord*> aligned;
  std::size_t ref_segments = 0;
  for (const Document& doc : reference) {
    for (const Segment& seg : doc.segments) {
      ++ref_segments;
      auto it = by_id.find(seg.segment_id);
      if (it == by_id.end()) {
        throw DataError("system output: missing segment \"" + seg.segment_id + "\"");
      }
      if (it->second->doc_id != doc.doc_id) {
        throw DataError("system output: segment \"" + seg.segment_id +
                        "\" attached to wrong document");
      }
      aligned.push_back(it->second);
    }
  }
  if (output.size() != ref_segments) {
    throw DataError("system output: " + std::to_string(output.size()) +
                    " records for " + std::to_string(ref_segments) + " reference segments");
  }
  return aligned;
}

struct TypeSweep {
  double ap = 0.0;
  double prevalence = 0.0;
  std::vector<PrPoint> curve;
};

TypeSweep type_sweep(const std::vector<const SystemRecord*>& aligned,
                     const std::vector<Document>& reference) {
  // Pool (segment, topic) pairs over the 11 in-domain topics.
  std::vector<std::pair<double, int>> pairs;  // score, gold
  std::size_t gold = 0;
  std::size_t idx = 0;
  for (const Document& doc : reference) {
    for (const Segment& seg : doc.segments) {
      const SystemRecord& rec = *aligned[idx++];
      for (std::size_t k = 0; k < kNumInDomain; ++k) {
        const int g = seg.labels.count(k) ? 1 : 0;
        gold += g;
        pairs.emplace_back(rec.posteriors[k], g);
      }
    }
  }
  if (gold == 0) throw DataError("type scoring: no in-domain gold pairs");

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  TypeSweep out;
  out.prevalence = static_cast<double>(gold) / static_cast<double>(pairs.size());
  std::size_t tp = 0, cnt = 0;
  double prev_recall = 0.0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    const double threshold = pairs[i].first;
    // Consume the whole tie group: a threshold admits every pair at >= it.
    while (i < pairs.size() && pairs[i].first == threshold) {
      tp += pairs[i].second;
      ++cnt;
      ++i;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(cnt);
    const double recall = static_cast<double>(tp) / static_cast<double>(gold);
    out.ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    out.curve.push_back({threshold, precision, recall});
  }
  return out;
}

void relevance_inputs(const std::vector<const SystemRecord*>& aligned,
                      const std::vector<Document>& reference, std::vector<double>& scores,
                      std::vector<int>& relevant) {
  std::size_t idx = 0;
  std::size_t in_domain = 0;
  for (const Document& doc : reference) {
    for (const Segment& seg : doc.segments) {
      const SystemRecord& rec = *aligned[idx++];
      scores.push_back(
          *std::max_element(rec.posteriors.begin(), rec.posteriors.end()));
      const int rel = seg.has_in_domain_label() ? 1 : 0;
      in_domain += rel;
      relevant.push_back(rel);
    }
  }
  if (in_domain == 0) throw DataError("relevance scoring: corpus has no in-domain segments");
}

}  // namespace

double score_relevance(const SystemOutput& output, const std::vector<Document>& reference) {
  const auto aligned = align_output(output, reference);
  std::vector<double> scores;
  std::vector<int> relevant;
  relevance_inputs(aligned, reference, scores, relevant);
  return average_precision(scores, relevant);
}

double score_type(const SystemOutput& output, const std::vector<Document>& reference) {
  return type_sweep(align_output(output, reference), reference).ap;
}

ScoreReport score_output(const SystemOutput& output, const std::vector<Document>& reference) {
  const auto aligned = align_output(output, reference);
  std::vector<double> scores;
  std::vector<int> relevant;
  relevance_inputs(aligned, reference, scores, relevant);

  ScoreReport report;
  report.num_segments = aligned.size();
  report.relevance_bounds = average_precision_bounds(scores, relevant);
  report.relevance_ap = report.relevance_bounds.stable;
  ap_with_ties(scores, relevant, 0, &report.relevance_curve);
  const TypeSweep sweep = type_sweep(aligned, reference);
  report.type_ap = sweep.ap;
  report.type_curve = sweep.curve;
  report.type_prevalence = sweep.prevalence;
  return report;
}

void write_system_output(const SystemOutput& output, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  for (const SystemRecord& r : output) {
    out << r.doc_id << " " << r.segment_id;
    for (double p : r.posteriors) out << " " << fmt(p);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

SystemOutput load_system_output(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open system output: " + path);
  SystemOutput output;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    SystemRecord rec;
    ss >> rec.doc_id >> rec.segment_id;
    for (double& p : rec.posteriors) ss >> p;
    if (!ss) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed record");
    }
    output.push_back(std::move(rec));
  }
  return output;
}

std::string serialize_report(const ScoreReport& report) {
  std::ostringstream out;
  out << "segtopic-score-report v1\n";
  out << "segments " << report.num_segments << "\n";
  out << "relevance-ap " << fmt(report.relevance_ap) << "\n";
  out << "type-ap " << fmt(report.type_ap) << "\n";
  out << "relevance-ap-pessimistic " << fmt(report.relevance_bounds.pessimistic) << "\n";
  out << "relevance-ap-optimistic " << fmt(report.relevance_bounds.optimistic) << "\n";
  out << "type-prevalence " << fmt(report.type_prevalence) << "\n";
  out << "relevance-curve " << report.relevance_curve.size() << "\n";
  for (const PrPoint& p : report.relevance_curve) {
    out << fmt(p.threshold) << " " << fmt(p.precision) << " " << fmt(p.recall) << "\n";
  }
  out << "type-curve " << report.type_curve.size() << "\n";
  for (const PrPoint& p : report.type_curve) {
    out << fmt(p.threshold) << " " << fmt(p.precision) << " " << fmt(p.recall) << "\n";
  }
  return out.str();
}

void write_report(const ScoreReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open report file: " + path);
  out << serialize_report(report);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace segtopic
