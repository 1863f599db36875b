#include <cmath>
#include <vector>

#include "doctest.h"
#include "segtopic/classifiers.hpp"
#include "segtopic/errors.hpp"
#include "segtopic/rng.hpp"
#include "util.hpp"

using namespace segtopic;

namespace {

// Two linearly separable point clouds in 2D for labels 0 and 1:
// label 0 <=> x[0] > 0, label 1 <=> x[1] > 0.
void toy_data(std::vector<std::vector<double>>& xs, std::vector<LabelVector>& ys,
              std::size_t n, Rng& rng) {
  xs.clear();
  ys.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    if (std::fabs(x[0]) < 0.2) x[0] = x[0] < 0 ? -0.2 : 0.2;  // keep a margin
    if (std::fabs(x[1]) < 0.2) x[1] = x[1] < 0 ? -0.2 : 0.2;
    LabelVector y;
    y.y[0] = x[0] > 0 ? 1.0 : 0.0;
    y.y[1] = x[1] > 0 ? 1.0 : 0.0;
    xs.push_back(std::move(x));
    ys.push_back(y);
  }
}

}  // namespace

TEST_SUITE("classifiers") {

TEST_CASE("label_vector reflects the segment's label set") {
  const Segment seg = testutil::make_segment("s", {}, {0, 3});
  const LabelVector y = label_vector(seg);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    CHECK(y.y[k] == (k == 0 || k == 3 ? 1.0 : 0.0));
  }
}

TEST_CASE("bce hand values") {
  LabelVector y;
  y.y[0] = 1.0;
  const std::vector<double> uniform(kNumTopics, 0.5);
  // Every slot contributes ln 2 regardless of the target bit.
  CHECK(bce_loss(uniform, y) == doctest::Approx(12.0 * std::log(2.0)).epsilon(1e-12));

  LabelVector all;
  for (double& v : all.y) v = 1.0;
  const std::vector<double> point_nine(kNumTopics, 0.9);
  CHECK(bce_loss(point_nine, all) ==
        doctest::Approx(-12.0 * std::log(0.9)).epsilon(1e-12));

  // A perfect posterior has (numerically) zero loss.
  std::vector<double> perfect(kNumTopics, 0.0);
  perfect[0] = 1.0;
  CHECK(bce_loss(perfect, y) < 1e-9);
  CHECK(bce_loss(uniform, y) >= 0.0);

  CHECK_THROWS_AS(bce_loss({0.5, 0.5}, y), UsageError);
}

TEST_CASE("bce gradient is posterior minus target") {
  LabelVector y;
  y.y[2] = 1.0;
  std::vector<double> o(kNumTopics, 0.3);
  const std::vector<double> g = bce_grad_logits(o, y);
  REQUIRE(g.size() == kNumTopics);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    CHECK(g[k] == doctest::Approx(0.3 - y.y[k]).epsilon(1e-12));
  }
}

TEST_CASE("micro f1 hand cases") {
  std::vector<LabelVector> targets(2);
  targets[0].y[0] = 1.0;  // gold: (0,0) and (0,1)
  targets[0].y[1] = 1.0;
  std::vector<std::vector<double>> post(2, std::vector<double>(kNumTopics, 0.1));
  post[0][0] = 0.9;  // predicted positive (0,0): true positive
  post[1][1] = 0.9;  // predicted positive (1,1): false positive
  // tp=1 fp=1 fn=1 -> precision = recall = f1 = 0.5.
  CHECK(micro_f1_at_half(post, targets) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<LabelVector> none(2);
  std::vector<std::vector<double>> low(2, std::vector<double>(kNumTopics, 0.1));
  CHECK(micro_f1_at_half(low, none) == 1.0);  // vacuously perfect
}

TEST_CASE("svm separates a separable toy problem") {
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<LabelVector> ys;
  toy_data(xs, ys, 120, rng);
  Rng train_rng(1);
  const SvmSet model = train_svm(xs, ys, 0.05, 80, train_rng);
  REQUIRE(model.weights.size() == kNumTopics);

  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> p = predict_svm(model, xs[i]);
    for (std::size_t k = 0; k < 2; ++k) {
      ++total;
      correct += (p[k] > 0.5) == (ys[i].y[k] > 0.5);
    }
  }
  CHECK(static_cast<double>(correct) / total > 0.95);

  // Labels that never fire stay below the decision midpoint everywhere.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> p = predict_svm(model, xs[i]);
    for (std::size_t k = 2; k < kNumTopics; ++k) CHECK(p[k] < 0.5);
  }
}

TEST_CASE("svm training is deterministic given the generator state") {
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<LabelVector> ys;
  toy_data(xs, ys, 40, rng);
  Rng r1(5), r2(5);
  const SvmSet a = train_svm(xs, ys, 0.1, 10, r1);
  const SvmSet b = train_svm(xs, ys, 0.1, 10, r2);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("binary relevance isolates the per-label classifiers") {
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<LabelVector> ys;
  toy_data(xs, ys, 40, rng);

  std::vector<LabelVector> flipped = ys;
  for (LabelVector& y : flipped) y.y[7] = 1.0 - y.y[7];  // rewrite one label's targets

  Rng r1(5), r2(5);
  const SvmSet a = train_svm(xs, ys, 0.1, 10, r1);
  const SvmSet b = train_svm(xs, flipped, 0.1, 10, r2);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    if (k == 7) continue;
    CHECK(a.weights[k] == b.weights[k]);  // bitwise: other labels untouched
    CHECK(a.bias[k] == b.bias[k]);
  }
  CHECK(a.weights[7] != b.weights[7]);
}

TEST_CASE("svm predict maps zero parameters to 0.5 and checks dimensions") {
  SvmSet zero;
  zero.weights.assign(kNumTopics, std::vector<double>(3, 0.0));
  zero.bias.assign(kNumTopics, 0.0);
  const std::vector<double> p = predict_svm(zero, {1.0, -2.0, 0.5});
  for (double v : p) CHECK(v == 0.5);  // logistic(0)

  CHECK_THROWS_AS(predict_svm(zero, {1.0}), DataError);
}

TEST_CASE("svm rejects bad hyperparameters and empty data") {
  Rng rng(1);
  std::vector<std::vector<double>> xs = {{1.0}};
  std::vector<LabelVector> ys(1);
  ys[0].y[0] = 1.0;
  CHECK_THROWS_AS(train_svm(xs, ys, 0.0, 5, rng), UsageError);
  CHECK_THROWS_AS(train_svm({}, {}, 0.1, 5, rng), UsageError);
}

TEST_CASE("mlp hand-built forward pass") {
  Rng rng(2);
  MlpModel m;
  m.head = FeedForwardHead::build(1, 1, 1, 0.0, rng);
  REQUIRE(m.head.params.size() == 4);  // h0.W h0.b out.W out.b
  m.head.params[0].value = {2.0};      // h0.W (1x1)
  m.head.params[1].value = {0.5};      // h0.b
  for (double& v : m.head.params[2].value) v = 1.0;   // out.W (12x1)
  for (double& v : m.head.params[3].value) v = -3.0;  // out.b

  // x=1.5: hidden = relu(2*1.5+0.5) = 3.5, logits = 3.5-3 = 0.5.
  const std::vector<double> p = predict_mlp(m, {1.5});
  REQUIRE(p.size() == kNumTopics);
  for (double v : p) CHECK(v == doctest::Approx(sigmoid(0.5)).epsilon(1e-12));

  // x=-1: preactivation -1.5 clamps to 0, logits = -3.
  const std::vector<double> q = predict_mlp(m, {-1.0});
  for (double v : q) CHECK(v == doctest::Approx(sigmoid(-3.0)).epsilon(1e-12));
}

TEST_CASE("mlp training reduces the loss on learnable data") {
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<LabelVector> ys;
  toy_data(xs, ys, 80, rng);
  std::vector<std::vector<double>> vx(xs.begin(), xs.begin() + 20);
  std::vector<LabelVector> vy(ys.begin(), ys.begin() + 20);

  MlpTrainOpts opts;
  opts.width = 16;
  opts.hidden_layers = 1;
  opts.dropout = 0.0;
  opts.batch_size = 16;
  opts.max_epochs = 30;
  opts.adam_alpha = 0.01;
  TrainLog log;
  Rng train_rng(3);
  const MlpModel m = train_mlp(xs, ys, vx, vy, opts, train_rng, nullptr, &log);
  REQUIRE(log.epochs.size() == 30);
  CHECK(log.epochs.back().train_loss < 0.5 * log.epochs.front().train_loss);

  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < vx.size(); ++i) {
    const std::vector<double> p = predict_mlp(m, vx[i]);
    for (std::size_t k = 0; k < 2; ++k) {
      ++total;
      correct += (p[k] > 0.5) == (vy[i].y[k] > 0.5);
    }
  }
  CHECK(static_cast<double>(correct) / total > 0.9);
}

TEST_CASE("validation metric selects the snapshot that is returned") {
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<LabelVector> ys;
  toy_data(xs, ys, 40, rng);

  MlpTrainOpts opts;
  opts.width = 8;
  opts.hidden_layers = 1;
  opts.dropout = 0.0;
  opts.batch_size = 8;
  opts.adam_alpha = 0.01;

  // A metric that peaks at epoch 1 freezes the returned model there even
  // though training continues.
  int calls_a = 0;
  const ValMetric peak_first = [&](const std::vector<std::vector<double>>&) {
    return ++calls_a == 1 ? 1.0 : 0.0;
  };
  opts.max_epochs = 12;
  TrainLog log_a;
  Rng ra(9);
  const MlpModel a = train_mlp(xs, ys, xs, ys, opts, ra, peak_first, &log_a);

  opts.max_epochs = 1;
  Rng rb(9);
  const MlpModel b = train_mlp(xs, ys, xs, ys, opts, rb, nullptr, nullptr);

  // Identical seeds, identical single-epoch trajectory: the 12-epoch run
  // must hand back the epoch-1 parameters.
  for (std::size_t t = 0; t < a.head.params.size(); ++t) {
    CHECK(a.head.params[t].value == b.head.params[t].value);
  }
  REQUIRE(log_a.epochs.size() == 12);
  CHECK(log_a.epochs[0].selected);
  for (std::size_t e = 1; e < log_a.epochs.size(); ++e) CHECK(!log_a.epochs[e].selected);
}

TEST_CASE("mlp refuses an empty training schedule") {
  Rng rng(1);
  std::vector<std::vector<double>> xs = {{1.0, 2.0}};
  std::vector<LabelVector> ys(1);
  ys[0].y[0] = 1.0;
  MlpTrainOpts opts;
  opts.max_epochs = 0;
  CHECK_THROWS_WITH_AS(train_mlp(xs, ys, xs, ys, opts, rng),
                       doctest::Contains("no training performed"), UsageError);
}

}  // TEST_SUITE
