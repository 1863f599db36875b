#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "segtopic/rng.hpp"

namespace segtopic {

// Trainable parameter block: a value array with a gradient of the same
// shape. 64-bit floats throughout; non-finite values are a hard failure
// checked at update time.
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  ParamTensor() = default;
  ParamTensor(std::string n, std::vector<std::size_t> s);

  std::size_t size() const { return value.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  void zero_grad();
  bool values_finite() const;
  bool grads_finite() const;
};

// Glorot-uniform draw for matrices (bound sqrt(6/(fan_in+fan_out)),
// fan_in = cols, fan_out = rows); vectors start at zero (biases).
ParamTensor init_params(std::string name, std::vector<std::size_t> shape, Rng& rng);

// Inverted dropout. Training: zero each entry with probability `rate`,
// scale survivors by 1/(1-rate). Inference: identity.
void dropout(std::vector<double>& x, double rate, Rng& rng, bool training);

// Returns a 0/1 keep-mask scaled by 1/(1-rate); used where the backward
// pass must reuse the forward mask.
std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng);

}  // namespace segtopic
