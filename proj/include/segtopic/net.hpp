#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "segtopic/rng.hpp"
#include "segtopic/tensor.hpp"

namespace segtopic {

// Feedforward classification head shared by the non-contextual NN and the
// contextual variants: `hidden_layers` affine+ReLU maps of `width` units
// (zero layers = input feeds the output map directly), then an affine map to
// 12 logits. Sigmoid posteriors are produced by head_forward.
struct FeedForwardHead {
  std::size_t input_dim = 0;
  std::size_t width = 0;
  std::size_t hidden_layers = 0;
  double dropout_rate = 0.0;
  std::vector<ParamTensor> params;  // h<i>.W, h<i>.b ..., out.W, out.b

  static FeedForwardHead build(std::size_t input_dim, std::size_t width,
                               std::size_t hidden_layers, double dropout_rate, Rng& rng);
  std::vector<ParamTensor*> param_ptrs();
};

struct HeadTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> preact;  // per hidden layer, before ReLU
  std::vector<std::vector<double>> hidden;  // after ReLU (and dropout in training)
  std::vector<std::vector<double>> mask;    // dropout masks; empty when inactive
  std::vector<double> logits;
  std::vector<double> posteriors;  // sigmoid(logits), 12 entries
};

// Pure in inference mode; in training mode draws dropout masks from rng
// (required non-null when dropout_rate > 0).
HeadTrace head_forward(const FeedForwardHead& head, const std::vector<double>& x,
                       bool training, Rng* rng);

// Accumulates parameter gradients from dL/dlogits; returns dL/dinput.
std::vector<double> head_backward(FeedForwardHead& head, const HeadTrace& trace,
                                  const std::vector<double>& dlogits);

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace segtopic
