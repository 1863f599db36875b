#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "segtopic/corpus.hpp"
#include "segtopic/net.hpp"
#include "segtopic/rng.hpp"

namespace segtopic {

// Binary indicator vector over the 12 topics. Out-of-domain excludes all
// in-domain entries; annotated segments always have at least one positive.
struct LabelVector {
  std::array<double, kNumTopics> y{};
};

LabelVector label_vector(const Segment& segment);

// Binary cross entropy summed over the 12 labels, with posteriors clipped
// into [1e-12, 1-1e-12].
double bce_loss(const std::vector<double>& posteriors, const LabelVector& target);

// dL/dlogit for sigmoid posteriors under the clipped loss: (o - y) while o
// lies strictly inside the clip interval, 0 at the clamp.
std::vector<double> bce_grad_logits(const std::vector<double>& posteriors,
                                    const LabelVector& target);

// Micro-averaged F1 over all (segment, label) slots at decision threshold
// 0.5; 1.0 when no positives exist on either side.
double micro_f1_at_half(const std::vector<std::vector<double>>& posteriors,
                        const std::vector<LabelVector>& targets);

// Maps a flat list of per-segment posterior vectors (validation order) to a
// scalar model-selection metric; higher is better.
using ValMetric = std::function<double(const std::vector<std::vector<double>>&)>;

// 12 independent linear classifiers (binary relevance), trained with the
// SGD hinge-loss schedule; posteriors are logistic squashes of the margins.
struct SvmSet {
  double lambda = 1e-4;
  std::vector<std::vector<double>> weights;  // 12 x d
  std::vector<double> bias;                  // 12
};

// One-vs-rest targets per label; example order reshuffled every epoch. Each
// label trains from an independent fork of rng, so retraining any one label
// cannot perturb the others.
SvmSet train_svm(const std::vector<std::vector<double>>& x,
                 const std::vector<LabelVector>& y, double lambda, std::size_t epochs,
                 Rng& rng);

std::vector<double> predict_svm(const SvmSet& model, const std::vector<double>& x);

struct MlpModel {
  FeedForwardHead head;
};

struct EpochStat {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  bool selected = false;
};

struct TrainLog {
  std::vector<EpochStat> epochs;
};

struct MlpTrainOpts {
  std::size_t width = 512;
  std::size_t hidden_layers = 2;
  double dropout = 0.25;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 50;
  double adam_alpha = 1e-3;
};

// Adam on batches of segments; after each epoch the model-selection metric
// runs on the validation set (micro-F1 at 0.5 unless `metric` overrides) and
// the best snapshot is what gets returned.
MlpModel train_mlp(const std::vector<std::vector<double>>& train_x,
                   const std::vector<LabelVector>& train_y,
                   const std::vector<std::vector<double>>& val_x,
                   const std::vector<LabelVector>& val_y, const MlpTrainOpts& opts,
                   Rng& rng, const ValMetric& metric = nullptr, TrainLog* log = nullptr);

std::vector<double> predict_mlp(const MlpModel& model, const std::vector<double>& x);

}  // namespace segtopic
