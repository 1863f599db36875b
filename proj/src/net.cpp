#include "segtopic/net.hpp"

#include "segtopic/errors.hpp"
#include "segtopic/kernels.hpp"
#include "segtopic/labels.hpp"

namespace segtopic {

FeedForwardHead FeedForwardHead::build(std::size_t input_dim, std::size_t width,
                                       std::size_t hidden_layers, double dropout_rate,
                                       Rng& rng) {
  FeedForwardHead head;
  head.input_dim = input_dim;
  head.width = width;
  head.hidden_layers = hidden_layers;
  head.dropout_rate = dropout_rate;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    const std::string p = "h" + std::to_string(l);
    head.params.push_back(init_params(p + ".W", {width, in}, rng));
    head.params.push_back(init_params(p + ".b", {width}, rng));
    in = width;
  }
  head.params.push_back(init_params("out.W", {kNumTopics, in}, rng));
  head.params.push_back(init_params("out.b", {kNumTopics}, rng));
  return head;
}

std::vector<ParamTensor*> FeedForwardHead::param_ptrs() {
  std::vector<ParamTensor*> out;
  for (ParamTensor& p : params) out.push_back(&p);
  return out;
}

HeadTrace head_forward(const FeedForwardHead& head, const std::vector<double>& x,
                       bool training, Rng* rng) {
  if (x.size() != head.input_dim) {
    throw DataError("head forward: input dimension " + std::to_string(x.size()) +
                    " != " + std::to_string(head.input_dim));
  }
  const bool drop = training && head.dropout_rate > 0.0;
  if (drop && rng == nullptr) throw UsageError("head forward: dropout needs an rng");

  HeadTrace trace;
  trace.input = x;
  const std::vector<double>* cur = &trace.input;
  for (std::size_t l = 0; l < head.hidden_layers; ++l) {
    const ParamTensor& w = head.params[2 * l];
    const ParamTensor& b = head.params[2 * l + 1];
    std::vector<double> a(head.width);
    kern::matvec(w.rows(), w.cols(), w.value.data(), cur->data(), a.data());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b.value[i];
    trace.preact.push_back(a);
    for (double& v : a) v = v > 0.0 ? v : 0.0;
    if (drop) {
      std::vector<double> mask = dropout_mask(a.size(), head.dropout_rate, *rng);
      kern::hadamard(a.size(), mask.data(), a.data(), a.data());
      trace.mask.push_back(std::move(mask));
    } else {
      trace.mask.emplace_back();
    }
    trace.hidden.push_back(std::move(a));
    cur = &trace.hidden.back();
  }
  const ParamTensor& wo = head.params[2 * head.hidden_layers];
  const ParamTensor& bo = head.params[2 * head.hidden_layers + 1];
  trace.logits.resize(kNumTopics);
  kern::matvec(wo.rows(), wo.cols(), wo.value.data(), cur->data(), trace.logits.data());
  trace.posteriors.resize(kNumTopics);
  for (std::size_t k = 0; k < kNumTopics; ++k) {
    trace.logits[k] += bo.value[k];
    trace.posteriors[k] = sigmoid(trace.logits[k]);
  }
  return trace;
}

std::vector<double> head_backward(FeedForwardHead& head, const HeadTrace& trace,
                                  const std::vector<double>& dlogits) {
  ParamTensor& wo = head.params[2 * head.hidden_layers];
  ParamTensor& bo = head.params[2 * head.hidden_layers + 1];
  const std::vector<double>& last =
      head.hidden_layers == 0 ? trace.input : trace.hidden.back();
  kern::ger(wo.rows(), wo.cols(), 1.0, dlogits.data(), last.data(), wo.grad.data());
  kern::axpy(kNumTopics, 1.0, dlogits.data(), bo.grad.data());
  std::vector<double> d(last.size());
  kern::matvec_t(wo.rows(), wo.cols(), wo.value.data(), dlogits.data(), d.data());

  for (std::size_t l = head.hidden_layers; l-- > 0;) {
    // d currently holds dL/d(hidden_l output); undo dropout then ReLU.
    if (!trace.mask[l].empty()) {
      kern::hadamard(d.size(), trace.mask[l].data(), d.data(), d.data());
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (trace.preact[l][i] <= 0.0) d[i] = 0.0;
    }
    ParamTensor& w = head.params[2 * l];
    ParamTensor& b = head.params[2 * l + 1];
    const std::vector<double>& in = l == 0 ? trace.input : trace.hidden[l - 1];
    kern::ger(w.rows(), w.cols(), 1.0, d.data(), in.data(), w.grad.data());
    kern::axpy(d.size(), 1.0, d.data(), b.grad.data());
    std::vector<double> dn(in.size());
    kern::matvec_t(w.rows(), w.cols(), w.value.data(), d.data(), dn.data());
    d = std::move(dn);
  }
  return d;
}

}  // namespace segtopic
