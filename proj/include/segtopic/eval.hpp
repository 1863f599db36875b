#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "segtopic/corpus.hpp"

namespace segtopic {

// One scored segment: 11 in-domain posteriors in canonical topic order.
// The out-of-domain posterior is deliberately absent — scoring never reads it.
struct SystemRecord {
  std::string doc_id;
  std::string segment_id;
  std::array<double, kNumInDomain> posteriors{};
};

using SystemOutput = std::vector<SystemRecord>;

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// AP under three tie conventions; `stable` (input order) is the reported one.
struct ApBounds {
  double stable = 0.0;
  double pessimistic = 0.0;
  double optimistic = 0.0;
};

struct ScoreReport {
  std::size_t num_segments = 0;
  double relevance_ap = 0.0;
  double type_ap = 0.0;
  ApBounds relevance_bounds;
  std::vector<PrPoint> relevance_curve;  // one point per rank
  std::vector<PrPoint> type_curve;       // one point per distinct threshold
  double type_prevalence = 0.0;          // gold pairs / pooled pairs
};

// Step-interpolated AP of a ranked list: sort by score descending (ties in
// stable input order), AP = mean precision at the relevant ranks. Throws
// DataError when nothing is relevant.
double average_precision(const std::vector<double>& scores, const std::vector<int>& relevant);

// Same ranking with ties additionally resolved worst-first / best-first.
ApBounds average_precision_bounds(const std::vector<double>& scores,
                                  const std::vector<int>& relevant);

// Relevance layer: per segment the max in-domain posterior against the
// "has any in-domain gold label" truth, reference corpus order.
double score_relevance(const SystemOutput& output, const std::vector<Document>& reference);

// Type layer: pool all (segment, topic) pairs over the 11 in-domain topics
// and sweep the distinct posterior values as thresholds; AP by step
// interpolation over the micro precision-recall curve.
double score_type(const SystemOutput& output, const std::vector<Document>& reference);

// Both layers plus curves and tie bounds.
ScoreReport score_output(const SystemOutput& output, const std::vector<Document>& reference);

void write_system_output(const SystemOutput& output, const std::string& path);
SystemOutput load_system_output(const std::string& path);

std::string serialize_report(const ScoreReport& report);
void write_report(const ScoreReport& report, const std::string& path);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t test_docs = 0;
  bool skipped = false;
  std::string reason;
  double relevance_ap = 0.0;
  double type_ap = 0.0;
  double type_prevalence = 0.0;
};

struct CrossvalReport {
  std::vector<FoldResult> folds;
  std::size_t valid_folds = 0;
  double mean_relevance_ap = 0.0;
  double mean_type_ap = 0.0;
  double mean_type_prevalence = 0.0;
};

}  // namespace segtopic
