#include "segtopic/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "segtopic/rng.hpp"

namespace segtopic {

ParamTensor::ParamTensor(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
  std::size_t total = 1;
  for (std::size_t d : shape) total *= d;
  value.assign(total, 0.0);
  grad.assign(total, 0.0);
}

void ParamTensor::zero_grad() { grad.assign(grad.size(), 0.0); }

namespace {
bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}
}  // namespace

bool ParamTensor::values_finite() const { return all_finite(value); }
bool ParamTensor::grads_finite() const { return all_finite(grad); }

ParamTensor init_params(std::string name, std::vector<std::size_t> shape, Rng& rng) {
  if (shape.empty()) throw std::invalid_argument("init_params: empty shape");
  ParamTensor t(std::move(name), std::move(shape));
  if (t.shape.size() >= 2) {
    const double fan_in = static_cast<double>(t.cols());
    const double fan_out = static_cast<double>(t.rows());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.value) v = rng.uniform(-bound, bound);
  }
  // 1-D tensors are biases and stay zero.
  return t;
}

void dropout(std::vector<double>& x, double rate, Rng& rng, bool training) {
  if (!training || rate == 0.0) return;
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : x) {
    v = rng.uniform() < rate ? 0.0 : v * keep_scale;
  }
}

std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng) {
  std::vector<double> mask(n, 1.0);
  if (rate == 0.0) return mask;
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

}  // namespace segtopic
