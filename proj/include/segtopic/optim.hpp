#pragma once

#include <cstddef>
#include <vector>

#include "segtopic/tensor.hpp"

namespace segtopic {

// Bias-corrected Adam over a fixed set of parameter tensors. Moments are
// zero-initialized; step increments once per update() call.
class AdamState {
 public:
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(const std::vector<ParamTensor*>& params);
  AdamState(const std::vector<ParamTensor*>& params, double alpha);

  // Applies one Adam step in place from the tensors' current grads.
  // Throws NumericError if any gradient is non-finite.
  void update();

  std::size_t step() const { return step_; }

 private:
  std::vector<ParamTensor*> params_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::size_t step_ = 0;
};

// One Pegasos step on a single binary-relevance classifier.
// eta_t = 1/(lambda*t); on margin violation y*(w.x+b) < 1:
//   w <- (1 - eta_t*lambda) w + eta_t y x,  b <- b + eta_t y
// otherwise only the shrinkage (1 - eta_t*lambda) w is applied; the bias
// is unregularized. Requires lambda > 0 and t >= 1.
void sgd_hinge_step(std::vector<double>& w, double& b, const std::vector<double>& x,
                    double y, double lambda, std::size_t t);

// Scales all grads so the global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_grad_norm(const std::vector<ParamTensor*>& params, double max_norm);

}  // namespace segtopic
