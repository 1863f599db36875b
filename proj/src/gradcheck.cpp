#include "segtopic/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "segtopic/context.hpp"
#include "segtopic/errors.hpp"

namespace segtopic {

double grad_check(const std::function<double(bool)>& loss_fn,
                  const std::vector<ParamTensor*>& params, Rng& rng,
                  std::size_t samples_per_tensor, double step) {
  const double base = loss_fn(true);
  if (!std::isfinite(base)) throw NumericError("grad_check: non-finite loss");

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const ParamTensor* p : params) analytic.push_back(p->grad);

  double max_rel = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor& p = *params[k];
    const std::size_t n = p.size();
    if (n == 0) continue;

    std::vector<std::size_t> coords;
    if (n <= samples_per_tensor) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < samples_per_tensor; ++i) {
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(n)));
      }
    }

    for (std::size_t idx : coords) {
      const double saved = p.value[idx];
      p.value[idx] = saved + step;
      const double lp = loss_fn(false);
      p.value[idx] = saved - step;
      const double lm = loss_fn(false);
      p.value[idx] = saved;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw NumericError("grad_check: non-finite loss while probing '" + p.name + "'");
      }
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic[k][idx];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

double run_model_gradcheck(const std::string& variant, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = 8, n = 4;
  std::vector<std::vector<double>> xs(n, std::vector<double>(d));
  for (auto& x : xs) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  }
  std::vector<LabelVector> ys(n);
  for (auto& y : ys) {
    for (std::size_t k = 0; k < kNumTopics; ++k) y.y[k] = rng.uniform() < 0.4 ? 1.0 : 0.0;
  }
  Rng probe_rng = rng.fork(1);

  if (variant == "mlp") {
    FeedForwardHead head = FeedForwardHead::build(d, 8, 2, 0.0, rng);
    const std::vector<ParamTensor*> params = head.param_ptrs();
    const auto loss_fn = [&](bool want_grad) {
      if (want_grad) {
        for (ParamTensor* p : params) p->zero_grad();
      }
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        HeadTrace t = head_forward(head, xs[i], false, nullptr);
        loss += bce_loss(t.posteriors, ys[i]);
        if (want_grad) head_backward(head, t, bce_grad_logits(t.posteriors, ys[i]));
      }
      return loss;
    };
    return grad_check(loss_fn, params, probe_rng);
  }

  if (variant != "bigru" && variant != "attn" && variant != "attn-gate") {
    throw UsageError("gradcheck: unknown variant \"" + variant + "\"");
  }
  ContextBuildOpts opts;
  opts.feature_dim = d;
  opts.head_width = 8;
  opts.head_hidden_layers = 1;
  opts.dropout = 0.0;
  opts.state_dim = 8;
  opts.window_left = opts.window_right = 1;
  opts.gated = variant == "attn-gate";
  ContextualModel model = build_contextual(
      variant == "bigru" ? ContextVariant::kBiGru : ContextVariant::kAttention, opts, rng);
  const std::vector<ParamTensor*> params = model.param_ptrs();
  const auto loss_fn = [&](bool want_grad) {
    if (want_grad) {
      for (ParamTensor* p : params) p->zero_grad();
    }
    return contextual_loss(model, xs, ys, want_grad, false, nullptr);
  };
  return grad_check(loss_fn, params, probe_rng);
}

}  // namespace segtopic
