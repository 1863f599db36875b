#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "segtopic/classifiers.hpp"
#include "segtopic/config.hpp"
#include "segtopic/context.hpp"
#include "segtopic/corpus.hpp"
#include "segtopic/eval.hpp"
#include "segtopic/features.hpp"

namespace segtopic {

// A fitted feature pipeline plus the trained variant named by config.
struct TrainedModel {
  RunConfig config;
  FeaturePipeline features;
  std::uint64_t feature_hash = 0;  // FNV-1a of the serialized feature pipeline
  SvmSet svm;
  MlpModel mlp;
  ContextualModel ctx;
};

// Fits features on the training corpus only (validation/test segments are
// projected, never refit) and trains the configured variant. NN variants
// need validation data for snapshot selection; when `validation` is null or
// empty, a deterministic ~10% of the training documents is carved off first.
TrainedModel train_model(const std::vector<Document>& train,
                         const std::vector<Document>* validation, const RunConfig& config,
                         TrainLog* log = nullptr);

// One record per segment, corpus order, 11 in-domain posteriors.
SystemOutput predict_model(const TrainedModel& model, const std::vector<Document>& corpus);

// K-fold cross-validation at document granularity (the default) or segment
// granularity (rejected for contextual variants, which need whole documents).
// Folds with no in-domain test segments are skipped with a warning on `log`;
// the mean covers the valid folds.
CrossvalReport run_crossval(const std::vector<Document>& corpus, const RunConfig& config,
                            std::size_t k, std::uint64_t seed, bool by_segment = false,
                            bool parallel = false, std::ostream* log = nullptr);

}  // namespace segtopic
