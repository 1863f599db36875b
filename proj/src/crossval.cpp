#include <future>
#include <ostream>

#include "segtopic/errors.hpp"
#include "segtopic/pipeline.hpp"

namespace segtopic {

namespace {

struct FoldSplit {
  std::vector<Document> train, test;
};

FoldSplit split_by_documents(const std::vector<Document>& corpus,
                             const std::set<std::string>& test_ids) {
  FoldSplit split;
  for (const Document& doc : corpus) {
    (test_ids.count(doc.doc_id) ? split.test : split.train).push_back(doc);
  }
  return split;
}

// Segment granularity: a document may contribute segments to both sides.
FoldSplit split_by_segments(const std::vector<Document>& corpus,
                            const std::set<std::string>& test_ids) {
  FoldSplit split;
  for (const Document& doc : corpus) {
    Document train_doc{doc.doc_id, doc.annotated, {}};
    Document test_doc{doc.doc_id, doc.annotated, {}};
    for (const Segment& seg : doc.segments) {
      (test_ids.count(seg.segment_id) ? test_doc : train_doc).segments.push_back(seg);
    }
    if (!train_doc.segments.empty()) split.train.push_back(std::move(train_doc));
    if (!test_doc.segments.empty()) split.test.push_back(std::move(test_doc));
  }
  return split;
}

bool has_in_domain(const std::vector<Document>& docs) {
  for (const Document& doc : docs) {
    for (const Segment& seg : doc.segments) {
      if (seg.has_in_domain_label()) return true;
    }
  }
  return false;
}

std::size_t doc_count(const std::vector<Document>& docs) { return docs.size(); }

}  // namespace

CrossvalReport run_crossval(const std::vector<Document>& corpus, const RunConfig& config,
                            std::size_t k, std::uint64_t seed, bool by_segment,
                            bool parallel, std::ostream* log) {
  config.validate();
  if (by_segment && (config.variant == "bigru" || config.variant == "attn")) {
    throw UsageError(
        "segment-granularity cross-validation cannot be used with contextual variants; "
        "they consume whole documents");
  }
  const std::vector<std::set<std::string>> folds =
      by_segment ? split_folds_by_segment(corpus, k, seed) : split_folds(corpus, k, seed);

  const auto run_fold = [&](std::size_t f) {
    const FoldSplit split = by_segment ? split_by_segments(corpus, folds[f])
                                       : split_by_documents(corpus, folds[f]);
    FoldResult result;
    result.fold = f;
    result.test_docs = doc_count(split.test);
    if (!has_in_domain(split.test)) {
      result.skipped = true;
      result.reason = "no in-domain segments in the test fold";
      return result;
    }
    const TrainedModel model = train_model(split.train, nullptr, config);
    const ScoreReport report = score_output(predict_model(model, split.test), split.test);
    result.relevance_ap = report.relevance_ap;
    result.type_ap = report.type_ap;
    result.type_prevalence = report.type_prevalence;
    return result;
  };

  CrossvalReport report;
  report.folds.resize(k);
  if (parallel) {
    std::vector<std::future<FoldResult>> futures;
    futures.reserve(k);
    for (std::size_t f = 0; f < k; ++f) {
      futures.push_back(std::async(std::launch::async, run_fold, f));
    }
    for (std::size_t f = 0; f < k; ++f) report.folds[f] = futures[f].get();
  } else {
    for (std::size_t f = 0; f < k; ++f) report.folds[f] = run_fold(f);
  }

  for (const FoldResult& fr : report.folds) {
    if (fr.skipped) {
      if (log) {
        *log << "warning: fold " << fr.fold << " skipped: " << fr.reason << "\n";
      }
      continue;
    }
    ++report.valid_folds;
    report.mean_relevance_ap += fr.relevance_ap;
    report.mean_type_ap += fr.type_ap;
    report.mean_type_prevalence += fr.type_prevalence;
  }
  if (report.valid_folds == 0) throw DataError("cross-validation: every fold was skipped");
  report.mean_relevance_ap /= static_cast<double>(report.valid_folds);
  report.mean_type_ap /= static_cast<double>(report.valid_folds);
  report.mean_type_prevalence /= static_cast<double>(report.valid_folds);
  return report;
}

}  // namespace segtopic
