#include "segtopic/optim.hpp"

#include <cmath>

#include "segtopic/errors.hpp"
#include "segtopic/kernels.hpp"

namespace segtopic {

AdamState::AdamState(const std::vector<ParamTensor*>& params) : params_(params) {
  first_moment_.reserve(params.size());
  second_moment_.reserve(params.size());
  for (const ParamTensor* p : params) {
    first_moment_.emplace_back(p->size(), 0.0);
    second_moment_.emplace_back(p->size(), 0.0);
  }
}

AdamState::AdamState(const std::vector<ParamTensor*>& params, double alpha_)
    : AdamState(params) {
  alpha = alpha_;
}

void AdamState::update() {
  for (const ParamTensor* p : params_) {
    if (!p->grads_finite()) {
      throw NumericError("adam: non-finite gradient in tensor '" + p->name +
                         "' at step " + std::to_string(step_ + 1));
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    ParamTensor& p = *params_[k];
    std::vector<double>& m = first_moment_[k];
    std::vector<double>& v = second_moment_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= alpha * m_hat / (std::sqrt(v_hat) + epsilon);
    }
    if (!p.values_finite()) {
      throw NumericError("adam: non-finite parameter in tensor '" + p.name +
                         "' after step " + std::to_string(step_));
    }
  }
}

void sgd_hinge_step(std::vector<double>& w, double& b, const std::vector<double>& x,
                    double y, double lambda, std::size_t t) {
  if (lambda <= 0.0) throw UsageError("sgd_hinge_step: lambda must be > 0");
  if (t < 1) throw UsageError("sgd_hinge_step: step index must be >= 1");
  const double eta = 1.0 / (lambda * static_cast<double>(t));
  const double margin = y * (kern::dot(w.data(), x.data(), w.size()) + b);
  kern::scal(w.size(), 1.0 - eta * lambda, w.data());
  if (margin < 1.0) {
    kern::axpy(w.size(), eta * y, x.data(), w.data());
    b += eta * y;
  }
}

double clip_grad_norm(const std::vector<ParamTensor*>& params, double max_norm) {
  double sq = 0.0;
  for (const ParamTensor* p : params) {
    sq += kern::dot(p->grad.data(), p->grad.data(), p->size());
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (ParamTensor* p : params) kern::scal(p->size(), scale, p->grad.data());
  }
  return norm;
}

}  // namespace segtopic
