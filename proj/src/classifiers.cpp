#include "segtopic/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segtopic/errors.hpp"
#include "segtopic/kernels.hpp"
#include "segtopic/optim.hpp"

namespace segtopic {

namespace {
constexpr double kClip = 1e-12;
}

LabelVector label_vector(const Segment& segment) {
  LabelVector lv;
  for (std::size_t id : segment.labels) {
    if (id >= kNumTopics) throw DataError("label id out of range");
    lv.y[id] = 1.0;
  }
  return lv;
}

double bce_loss(const std::vector<double>& posteriors, const LabelVector& target) {
  if (posteriors.size() != kNumTopics) throw UsageError("bce: expected 12 posteriors");
  double loss = 0.0;
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    const double o = std::clamp(posteriors[k], kClip, 1.0 - kClip);
    loss -= target.y[k] * std::log(o) + (1.0 - target.y[k]) * std::log(1.0 - o);
  }
  return loss;
}

std::vector<double> bce_grad_logits(const std::vector<double>& posteriors,
                                    const LabelVector& target) {
  std::vector<double> g(kNumTopics, 0.0);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    const double o = posteriors[k];
    // At the clamp the clipped loss is flat in o, so the logit gradient
    // vanishes; elsewhere sigmoid+BCE collapses to o - y.
    if (o > kClip && o < 1.0 - kClip) g[k] = o - target.y[k];
  }
  return g;
}

double micro_f1_at_half(const std::vector<std::vector<double>>& posteriors,
                        const std::vector<LabelVector>& targets) {
  if (posteriors.size() != targets.size()) throw UsageError("micro-f1: size mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    for (std::size_t k = 0; k < kNumTopics; ++k) {
      const bool pred = posteriors[i][k] >= 0.5;
      const bool gold = targets[i].y[k] > 0.5;
      tp += pred && gold;
      fp += pred && !gold;
      fn += !pred && gold;
    }
  }
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

SvmSet train_svm(const std::vector<std::vector<double>>& x,
                 const std::vector<LabelVector>& y, double lambda, std::size_t epochs,
                 Rng& rng) {
  if (lambda <= 0.0) throw UsageError("svm: lambda must be > 0");
  if (x.empty() || x.size() != y.size()) throw UsageError("svm: empty or mismatched training set");
  const std::size_t d = x[0].size();

  SvmSet model;
  model.lambda = lambda;
  model.weights.assign(kNumTopics, std::vector<double>(d, 0.0));
  model.bias.assign(kNumTopics, 0.0);

  std::vector<std::size_t> order(x.size());
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    Rng label_rng = rng.fork(k);
    std::vector<double>& w = model.weights[k];
    double& b = model.bias[k];
    std::size_t t = 1;
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      label_rng.shuffle(order);
      for (std::size_t idx : order) {
        const double target = y[idx].y[k] > 0.5 ? 1.0 : -1.0;
        sgd_hinge_step(w, b, x[idx], target, lambda, t);
        ++t;
      }
    }
    for (double v : w) {
      if (!std::isfinite(v)) throw NumericError("svm: non-finite weight after training");
    }
    if (!std::isfinite(b)) throw NumericError("svm: non-finite bias after training");
  }
  return model;
}

std::vector<double> predict_svm(const SvmSet& model, const std::vector<double>& x) {
  std::vector<double> out(kNumTopics);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    if (model.weights[k].size() != x.size()) {
      throw DataError("svm predict: feature dimension " + std::to_string(x.size()) +
                      " != " + std::to_string(model.weights[k].size()));
    }
    const double margin =
        kern::dot(model.weights[k].data(), x.data(), x.size()) + model.bias[k];
    out[k] = sigmoid(margin);
  }
  return out;
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<ParamTensor*>& params) {
  std::vector<std::vector<double>> vals;
  for (const ParamTensor* p : params) vals.push_back(p->value);
  return vals;
}

void restore(const std::vector<ParamTensor*>& params,
             const std::vector<std::vector<double>>& vals) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = vals[i];
}

}  // namespace

MlpModel train_mlp(const std::vector<std::vector<double>>& train_x,
                   const std::vector<LabelVector>& train_y,
                   const std::vector<std::vector<double>>& val_x,
                   const std::vector<LabelVector>& val_y, const MlpTrainOpts& opts,
                   Rng& rng, const ValMetric& metric, TrainLog* log) {
  if (train_x.empty() || train_x.size() != train_y.size()) {
    throw UsageError("mlp: empty or mismatched training set");
  }
  if (val_x.empty()) throw UsageError("mlp: validation set required");
  if (opts.max_epochs == 0) throw UsageError("mlp: epochs = 0, no training performed");

  MlpModel model;
  model.head = FeedForwardHead::build(train_x[0].size(), opts.width, opts.hidden_layers,
                                      opts.dropout, rng);
  const std::vector<ParamTensor*> params = model.head.param_ptrs();
  AdamState adam(params, opts.adam_alpha);

  const auto evaluate = [&]() {
    std::vector<std::vector<double>> outs;
    outs.reserve(val_x.size());
    for (const auto& x : val_x) outs.push_back(predict_mlp(model, x));
    return metric ? metric(outs) : micro_f1_at_half(outs, val_y);
  };

  double best_metric = -1.0;
  std::vector<std::vector<double>> best = snapshot(params);
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t end = std::min(order.size(), start + opts.batch_size);
      for (ParamTensor* p : params) p->zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        HeadTrace trace = head_forward(model.head, train_x[idx], true, &rng);
        batch_loss += bce_loss(trace.posteriors, train_y[idx]);
        std::vector<double> dlogits = bce_grad_logits(trace.posteriors, train_y[idx]);
        head_backward(model.head, trace, dlogits);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (ParamTensor* p : params) {
        kern::scal(p->grad.size(), inv, p->grad.data());
      }
      adam.update();
      epoch_loss += batch_loss;
    }
    epoch_loss /= static_cast<double>(train_x.size());
    if (!std::isfinite(epoch_loss)) throw NumericError("mlp: training diverged");

    const double m = evaluate();
    const bool selected = m > best_metric;
    if (selected) {
      best_metric = m;
      best = snapshot(params);
    }
    if (log) log->epochs.push_back({epoch, epoch_loss, m, selected});
  }
  restore(params, best);
  return model;
}

std::vector<double> predict_mlp(const MlpModel& model, const std::vector<double>& x) {
  return head_forward(model.head, x, false, nullptr).posteriors;
}

}  // namespace segtopic
