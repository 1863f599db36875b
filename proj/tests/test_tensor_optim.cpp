#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "segtopic/errors.hpp"
#include "segtopic/optim.hpp"
#include "segtopic/rng.hpp"
#include "segtopic/tensor.hpp"

using namespace segtopic;

TEST_SUITE("optim") {

TEST_CASE("glorot initialization respects the fan bound; biases start at zero") {
  Rng rng(3);
  ParamTensor w = init_params("w", {512, 300}, rng);
  CHECK(w.rows() == 512);
  CHECK(w.cols() == 300);
  const double bound = std::sqrt(6.0 / (300.0 + 512.0));
  double max_abs = 0.0;
  for (double v : w.value) max_abs = std::max(max_abs, std::fabs(v));
  CHECK(max_abs <= bound);
  CHECK(max_abs > 0.5 * bound);  // the draw actually fills the range

  ParamTensor b = init_params("b", {512}, rng);
  for (double v : b.value) CHECK(v == 0.0);

  Rng r1(99), r2(99);
  ParamTensor a1 = init_params("a", {7, 5}, r1);
  ParamTensor a2 = init_params("a", {7, 5}, r2);
  CHECK(a1.value == a2.value);
}

TEST_CASE("zero_grad and finiteness checks") {
  Rng rng(4);
  ParamTensor w = init_params("w", {3, 3}, rng);
  for (double& g : w.grad) g = 1.0;
  w.zero_grad();
  for (double g : w.grad) CHECK(g == 0.0);
  CHECK(w.values_finite());
  CHECK(w.grads_finite());
  w.grad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!w.grads_finite());
}

TEST_CASE("adam first step moves by ~alpha against the gradient sign") {
  ParamTensor p("p", {2});
  p.value = {1.0, -2.0};
  AdamState adam({&p}, 0.1);
  p.grad = {0.5, -3.0};
  adam.update();
  CHECK(adam.step() == 1);
  // Bias-corrected m-hat = g, v-hat = g^2, so the step is alpha * g/(|g|+eps').
  CHECK(p.value[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(p.value[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
}

TEST_CASE("adam two-step trace matches an inline reference implementation") {
  ParamTensor p("p", {1});
  p.value = {0.3};
  const double alpha = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  AdamState adam({&p}, alpha);

  double theta = 0.3, m = 0.0, v = 0.0;
  const double grads[2] = {0.5, -0.25};
  for (int t = 1; t <= 2; ++t) {
    const double g = grads[t - 1];
    p.grad[0] = g;
    adam.update();
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    theta -= alpha * mhat / (std::sqrt(vhat) + eps);
    CHECK(p.value[0] == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  ParamTensor p("p", {3});
  p.value = {1.0, 2.0, 3.0};
  AdamState adam({&p});
  p.zero_grad();
  adam.update();
  CHECK(p.value[0] == 1.0);
  CHECK(p.value[1] == 2.0);
  CHECK(p.value[2] == 3.0);
}

TEST_CASE("adam rejects non-finite gradients") {
  ParamTensor p("p", {1});
  p.value = {1.0};
  AdamState adam({&p});
  p.grad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam.update(), NumericError);
}

TEST_CASE("dropout is identity at rate 0 and in inference mode") {
  Rng rng(5);
  std::vector<double> x = {1.0, -2.0, 3.0};
  std::vector<double> orig = x;
  dropout(x, 0.0, rng, true);
  CHECK(x == orig);
  dropout(x, 0.9, rng, false);
  CHECK(x == orig);
}

TEST_CASE("dropout at rate 0.5 zeroes half and rescales survivors") {
  Rng rng(6);
  const std::size_t n = 100000;
  std::vector<double> x(n, 1.0);
  dropout(x, 0.5, rng, true);
  std::size_t zeros = 0;
  double sum = 0.0;
  for (double v : x) {
    CHECK((v == 0.0 || v == 2.0));  // inverted scaling 1/(1-rate)
    zeros += v == 0.0;
    sum += v;
  }
  CHECK(std::fabs(static_cast<double>(zeros) / n - 0.5) < 0.01);
  CHECK(std::fabs(sum / n - 1.0) < 0.02);  // expectation preserved

  std::vector<double> mask = dropout_mask(1000, 0.25, rng);
  for (double m : mask) CHECK((m == 0.0 || m == doctest::Approx(1.0 / 0.75)));
}

TEST_CASE("hinge step applies only shrinkage when the margin is satisfied") {
  std::vector<double> w = {2.0, 0.0};
  double b = 0.5;
  const std::vector<double> x = {1.0, 0.0};
  // y (w.x + b) = 2.5 >= 1: no violation.
  sgd_hinge_step(w, b, x, +1.0, 0.1, 4);
  const double eta = 1.0 / (0.1 * 4);
  CHECK(w[0] == doctest::Approx((1.0 - eta * 0.1) * 2.0).epsilon(1e-15));
  CHECK(w[1] == 0.0);
  CHECK(b == 0.5);  // bias is unregularized and untouched without a violation
}

TEST_CASE("hinge step from zero with lambda=1, t=1 lands on y*x") {
  std::vector<double> w = {0.0, 0.0};
  double b = 0.0;
  const std::vector<double> x = {0.3, -0.7};
  sgd_hinge_step(w, b, x, -1.0, 1.0, 1);
  // eta = 1, shrink factor 0: w = eta*y*x, b = eta*y.
  CHECK(w[0] == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(b == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("hinge step hand trace with violation at t=2") {
  std::vector<double> w = {1.0, 1.0};
  double b = -2.0;
  const std::vector<double> x = {1.0, 0.0};
  // y (w.x + b) = 1 - 2 = -1 < 1: violation, full update applies.
  sgd_hinge_step(w, b, x, +1.0, 0.5, 2);
  const double eta = 1.0 / (0.5 * 2);  // = 1
  CHECK(w[0] == doctest::Approx((1.0 - eta * 0.5) * 1.0 + eta * 1.0 * 1.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("hinge step validates lambda and t") {
  std::vector<double> w = {0.0};
  double b = 0.0;
  const std::vector<double> x = {1.0};
  CHECK_THROWS_AS(sgd_hinge_step(w, b, x, 1.0, 0.0, 1), UsageError);
  CHECK_THROWS_AS(sgd_hinge_step(w, b, x, 1.0, -1.0, 1), UsageError);
  CHECK_THROWS_AS(sgd_hinge_step(w, b, x, 1.0, 0.5, 0), UsageError);
}

TEST_CASE("gradient clipping scales to the ceiling and reports the raw norm") {
  ParamTensor p("p", {2});
  p.grad = {3.0, 4.0};
  const double pre = clip_grad_norm({&p}, 1.0);
  CHECK(pre == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(p.grad[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p.grad[1] == doctest::Approx(0.8).epsilon(1e-12));

  ParamTensor q("q", {2});
  q.grad = {0.3, 0.4};
  const double pre2 = clip_grad_norm({&q}, 1.0);
  CHECK(pre2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q.grad[0] == 0.3);  // under the ceiling: untouched
  CHECK(q.grad[1] == 0.4);
}

}  // TEST_SUITE
