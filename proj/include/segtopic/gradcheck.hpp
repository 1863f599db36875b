#pragma once

#include <functional>
#include <vector>

#include "segtopic/rng.hpp"
#include "segtopic/tensor.hpp"

namespace segtopic {

// Central-difference gradient verification.
//
// `loss_fn(true)` must zero grads, run forward and backward, fill each
// tensor's grad and return the loss; `loss_fn(false)` evaluates the loss
// only. Checks up to `samples_per_tensor` coordinates per tensor (all of
// them when the tensor is small) with step h and returns the maximum of
//   |analytic - numeric| / max(1, |analytic| + |numeric|).
// Throws NumericError on a non-finite loss.
double grad_check(const std::function<double(bool want_grad)>& loss_fn,
                  const std::vector<ParamTensor*>& params, Rng& rng,
                  std::size_t samples_per_tensor = 24, double step = 1e-5);

// End-to-end check of one trainable variant (mlp | bigru | attn | attn-gate)
// on a miniature instance: feature dim 8, state dim 8, one 4-segment
// document with random features and labels. Returns the max relative error.
double run_model_gradcheck(const std::string& variant, std::uint64_t seed);

}  // namespace segtopic
