#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "segtopic/classifiers.hpp"
#include "segtopic/net.hpp"
#include "segtopic/rng.hpp"
#include "segtopic/tensor.hpp"

namespace segtopic {

// Gated recurrent unit, one direction. Frozen convention:
//   z = sigmoid(Wz x + Uz h + bz)        update gate
//   r = sigmoid(Wr x + Ur h + br)        reset gate
//   c = tanh(Wh x + Uh (r h) + bh)       candidate
//   h' = (1 - z) h + z c
struct GruCell {
  std::size_t input_dim = 0;
  std::size_t state_dim = 0;
  std::vector<ParamTensor> params;  // Wz Uz bz Wr Ur br Wh Uh bh

  static GruCell build(std::size_t input_dim, std::size_t state_dim,
                       const std::string& prefix, Rng& rng);
  std::vector<ParamTensor*> param_ptrs();
};

struct GruStepTrace {
  std::vector<double> x, h_prev, z, r, rh, cand, h;
};

GruStepTrace gru_forward(const GruCell& cell, const std::vector<double>& x,
                         const std::vector<double>& h_prev);

// Accumulates parameter grads from dL/dh; returns (dL/dx, dL/dh_prev).
std::pair<std::vector<double>, std::vector<double>> gru_backward(
    GruCell& cell, const GruStepTrace& step, const std::vector<double>& dh);

// Bidirectional encoder: h_i = f_i ⊕ b_i with zero initial states on both
// ends; output dimension 2 * state_dim.
struct BiGruEncoder {
  GruCell fwd, bwd;

  static BiGruEncoder build(std::size_t input_dim, std::size_t state_dim, Rng& rng);
  std::vector<ParamTensor*> param_ptrs();
  std::size_t output_dim() const { return 2 * fwd.state_dim; }
};

struct BiGruTrace {
  std::vector<GruStepTrace> fsteps, bsteps;      // bsteps stored right-to-left
  std::vector<std::vector<double>> h;            // per segment, 2d'
};

BiGruTrace bigru_forward(const BiGruEncoder& enc, const std::vector<std::vector<double>>& xs);
void bigru_backward(BiGruEncoder& enc, const BiGruTrace& trace,
                    const std::vector<std::vector<double>>& dh);

// Additive alignment over a truncated window around the target segment:
//   e_ij = w . ReLU(W1 x_i + W2 x_j + b1) + b2
// weighted softmax (optionally gated by relative position), then
// c_i = sum_j alpha_ij x_j.
struct AttentionParams {
  std::size_t input_dim = 0;
  std::size_t align_dim = 0;
  std::size_t window_left = 1, window_right = 1;
  bool unbounded = false;  // whole-document window
  bool gated = false;
  std::vector<ParamTensor> params;  // attn.W1 attn.W2 attn.b1 attn.w attn.b2 [attn.gate]

  static AttentionParams build(std::size_t input_dim, std::size_t align_dim, bool gated,
                               Rng& rng);
  std::vector<ParamTensor*> param_ptrs();
  const ParamTensor& gate() const { return params.back(); }
};

// Position gate d(i, j): exactly 1 at j = i, else
// logistic(w2 * tanh(w1 * |i-j| + b1) + b2) in (0, 1); gate tensor layout is
// [w1, w2, b1, b2], initialized to (1, 1, 0, 0).
double gate_value(const ParamTensor& gate, std::size_t i, std::size_t j);

// Inclusive 0-based window bounds for target i in a document of n segments.
std::pair<std::size_t, std::size_t> attention_window(const AttentionParams& attn,
                                                     std::size_t i, std::size_t n);

// Alignment scores e_i. over the window of target i (pure).
std::vector<double> attention_scores(const AttentionParams& attn,
                                     const std::vector<std::vector<double>>& xs,
                                     std::size_t i);

// Normalized attention weights for precomputed scores: softmax with
// max-subtraction, multiplied by gate values when `gate` is non-null.
std::vector<double> attention_weights(const std::vector<double>& scores,
                                      const ParamTensor* gate, std::size_t i,
                                      std::size_t window_lo);

// c_i = sum over the window of alpha_ij x_j.
std::vector<double> contextual_vector(const AttentionParams& attn,
                                      const std::vector<std::vector<double>>& xs,
                                      std::size_t i);

enum class ContextVariant { kBiGru, kAttention };

// Contextual classifier: encoder (BiGRU) or combiner (attention) feeding the
// shared feedforward head. Head parameters are initialized before the
// context parameters, so an attention model with window 0 reproduces the
// non-contextual NN built from the same seed.
struct ContextualModel {
  ContextVariant variant = ContextVariant::kAttention;
  FeedForwardHead head;
  BiGruEncoder enc;      // kBiGru
  AttentionParams attn;  // kAttention

  std::vector<ParamTensor*> param_ptrs();
};

struct ContextBuildOpts {
  std::size_t feature_dim = 0;
  std::size_t head_width = 512;
  std::size_t head_hidden_layers = 1;
  double dropout = 0.25;
  std::size_t state_dim = 512;       // d' (BiGRU state / alignment hidden)
  std::size_t window_left = 1, window_right = 1;
  bool unbounded_window = false;
  bool gated = false;
};

ContextualModel build_contextual(ContextVariant variant, const ContextBuildOpts& opts,
                                 Rng& rng);

// Per-segment 12-topic posteriors for one document (pure, dropout off).
std::vector<std::vector<double>> predict_contextual(
    const ContextualModel& model, const std::vector<std::vector<double>>& xs);

// Summed BCE over the document's segments; accumulates parameter gradients
// when want_grad. Training mode draws dropout masks from rng.
double contextual_loss(ContextualModel& model, const std::vector<std::vector<double>>& xs,
                       const std::vector<LabelVector>& ys, bool want_grad, bool training,
                       Rng* rng);

// One document's worth of training data.
struct DocExample {
  std::vector<std::vector<double>> x;
  std::vector<LabelVector> y;
};

struct ContextTrainOpts {
  std::size_t batch_docs = 6;
  std::size_t max_epochs = 50;
  double adam_alpha = 1e-3;
  double grad_clip = 5.0;  // global norm; <= 0 disables
};

// Adam over 6-document batches (gradients normalized by the batch's total
// segment count), validation-best snapshot as in train_mlp.
void train_contextual(ContextualModel& model, const std::vector<DocExample>& train,
                      const std::vector<DocExample>& val, const ContextTrainOpts& opts,
                      Rng& rng, const ValMetric& metric = nullptr, TrainLog* log = nullptr);

}  // namespace segtopic
