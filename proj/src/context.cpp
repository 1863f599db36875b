#include "segtopic/context.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segtopic/errors.hpp"
#include "segtopic/kernels.hpp"
#include "segtopic/optim.hpp"

namespace segtopic {

GruCell GruCell::build(std::size_t input_dim, std::size_t state_dim,
                       const std::string& prefix, Rng& rng) {
  GruCell cell;
  cell.input_dim = input_dim;
  cell.state_dim = state_dim;
  const char* names[] = {"Wz", "Uz", "bz", "Wr", "Ur", "br", "Wh", "Uh", "bh"};
  for (int g = 0; g < 3; ++g) {
    cell.params.push_back(
        init_params(prefix + "." + names[3 * g], {state_dim, input_dim}, rng));
    cell.params.push_back(
        init_params(prefix + "." + names[3 * g + 1], {state_dim, state_dim}, rng));
    cell.params.push_back(init_params(prefix + "." + names[3 * g + 2], {state_dim}, rng));
  }
  return cell;
}

std::vector<ParamTensor*> GruCell::param_ptrs() {
  std::vector<ParamTensor*> out;
  for (ParamTensor& p : params) out.push_back(&p);
  return out;
}

namespace {

// a = W x + U h + b through the sigmoid or tanh in `squash`.
std::vector<double> gate_affine(const ParamTensor& w, const ParamTensor& u,
                                const ParamTensor& b, const std::vector<double>& x,
                                const std::vector<double>& h) {
  std::vector<double> a(b.size());
  kern::matvec(w.rows(), w.cols(), w.value.data(), x.data(), a.data());
  std::vector<double> uh(b.size());
  kern::matvec(u.rows(), u.cols(), u.value.data(), h.data(), uh.data());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += uh[i] + b.value[i];
  return a;
}

}  // namespace

GruStepTrace gru_forward(const GruCell& cell, const std::vector<double>& x,
                         const std::vector<double>& h_prev) {
  if (x.size() != cell.input_dim || h_prev.size() != cell.state_dim) {
    throw DataError("gru forward: dimension mismatch");
  }
  const ParamTensor &wz = cell.params[0], &uz = cell.params[1], &bz = cell.params[2];
  const ParamTensor &wr = cell.params[3], &ur = cell.params[4], &br = cell.params[5];
  const ParamTensor &wh = cell.params[6], &uh = cell.params[7], &bh = cell.params[8];

  GruStepTrace t;
  t.x = x;
  t.h_prev = h_prev;
  t.z = gate_affine(wz, uz, bz, x, h_prev);
  for (double& v : t.z) v = sigmoid(v);
  t.r = gate_affine(wr, ur, br, x, h_prev);
  for (double& v : t.r) v = sigmoid(v);
  t.rh.resize(cell.state_dim);
  kern::hadamard(cell.state_dim, t.r.data(), h_prev.data(), t.rh.data());
  t.cand = gate_affine(wh, uh, bh, x, t.rh);
  for (double& v : t.cand) v = std::tanh(v);
  t.h.resize(cell.state_dim);
  for (std::size_t i = 0; i < cell.state_dim; ++i) {
    t.h[i] = (1.0 - t.z[i]) * h_prev[i] + t.z[i] * t.cand[i];
  }
  return t;
}

std::pair<std::vector<double>, std::vector<double>> gru_backward(
    GruCell& cell, const GruStepTrace& t, const std::vector<double>& dh) {
  ParamTensor &wz = cell.params[0], &uz = cell.params[1], &bz = cell.params[2];
  ParamTensor &wr = cell.params[3], &ur = cell.params[4], &br = cell.params[5];
  ParamTensor &wh = cell.params[6], &uh = cell.params[7], &bh = cell.params[8];
  const std::size_t d = cell.state_dim;

  std::vector<double> dx(cell.input_dim, 0.0);
  std::vector<double> dh_prev(d, 0.0);

  std::vector<double> da_h(d), da_z(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double dcand = dh[i] * t.z[i];
    da_h[i] = dcand * (1.0 - t.cand[i] * t.cand[i]);  // through tanh
    const double dz = dh[i] * (t.cand[i] - t.h_prev[i]);
    da_z[i] = dz * t.z[i] * (1.0 - t.z[i]);  // through sigmoid
    dh_prev[i] = dh[i] * (1.0 - t.z[i]);
  }

  // Candidate branch.
  kern::ger(d, cell.input_dim, 1.0, da_h.data(), t.x.data(), wh.grad.data());
  kern::ger(d, d, 1.0, da_h.data(), t.rh.data(), uh.grad.data());
  kern::axpy(d, 1.0, da_h.data(), bh.grad.data());
  std::vector<double> drh(d);
  kern::matvec_t(d, d, uh.value.data(), da_h.data(), drh.data());
  std::vector<double> tmp(cell.input_dim);
  kern::matvec_t(d, cell.input_dim, wh.value.data(), da_h.data(), tmp.data());
  kern::axpy(cell.input_dim, 1.0, tmp.data(), dx.data());

  std::vector<double> da_r(d);
  for (std::size_t i = 0; i < d; ++i) {
    dh_prev[i] += drh[i] * t.r[i];
    da_r[i] = drh[i] * t.h_prev[i] * t.r[i] * (1.0 - t.r[i]);
  }

  // Update gate branch.
  kern::ger(d, cell.input_dim, 1.0, da_z.data(), t.x.data(), wz.grad.data());
  kern::ger(d, d, 1.0, da_z.data(), t.h_prev.data(), uz.grad.data());
  kern::axpy(d, 1.0, da_z.data(), bz.grad.data());
  std::vector<double> dstate(d);
  kern::matvec_t(d, d, uz.value.data(), da_z.data(), dstate.data());
  kern::axpy(d, 1.0, dstate.data(), dh_prev.data());
  kern::matvec_t(d, cell.input_dim, wz.value.data(), da_z.data(), tmp.data());
  kern::axpy(cell.input_dim, 1.0, tmp.data(), dx.data());

  // Reset gate branch.
  kern::ger(d, cell.input_dim, 1.0, da_r.data(), t.x.data(), wr.grad.data());
  kern::ger(d, d, 1.0, da_r.data(), t.h_prev.data(), ur.grad.data());
  kern::axpy(d, 1.0, da_r.data(), br.grad.data());
  kern::matvec_t(d, d, ur.value.data(), da_r.data(), dstate.data());
  kern::axpy(d, 1.0, dstate.data(), dh_prev.data());
  kern::matvec_t(d, cell.input_dim, wr.value.data(), da_r.data(), tmp.data());
  kern::axpy(cell.input_dim, 1.0, tmp.data(), dx.data());

  return {std::move(dx), std::move(dh_prev)};
}

BiGruEncoder BiGruEncoder::build(std::size_t input_dim, std::size_t state_dim, Rng& rng) {
  BiGruEncoder enc;
  enc.fwd = GruCell::build(input_dim, state_dim, "gru.f", rng);
  enc.bwd = GruCell::build(input_dim, state_dim, "gru.b", rng);
  return enc;
}

std::vector<ParamTensor*> BiGruEncoder::param_ptrs() {
  std::vector<ParamTensor*> out = fwd.param_ptrs();
  for (ParamTensor* p : bwd.param_ptrs()) out.push_back(p);
  return out;
}

BiGruTrace bigru_forward(const BiGruEncoder& enc, const std::vector<std::vector<double>>& xs) {
  if (xs.empty()) throw DataError("bigru: empty document");
  const std::size_t n = xs.size();
  const std::size_t d = enc.fwd.state_dim;
  BiGruTrace trace;
  std::vector<double> state(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    trace.fsteps.push_back(gru_forward(enc.fwd, xs[i], state));
    state = trace.fsteps.back().h;
  }
  state.assign(d, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    trace.bsteps.push_back(gru_forward(enc.bwd, xs[i], state));
    state = trace.bsteps.back().h;
  }
  trace.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.h[i] = trace.fsteps[i].h;
    const std::vector<double>& b = trace.bsteps[n - 1 - i].h;
    trace.h[i].insert(trace.h[i].end(), b.begin(), b.end());
  }
  return trace;
}

void bigru_backward(BiGruEncoder& enc, const BiGruTrace& trace,
                    const std::vector<std::vector<double>>& dh) {
  const std::size_t n = trace.fsteps.size();
  const std::size_t d = enc.fwd.state_dim;
  std::vector<double> carry(d, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    std::vector<double> dstate(dh[i].begin(), dh[i].begin() + d);
    kern::axpy(d, 1.0, carry.data(), dstate.data());
    carry = gru_backward(enc.fwd, trace.fsteps[i], dstate).second;
  }
  carry.assign(d, 0.0);
  // bsteps[s] processed segment n-1-s; its successor in the recursion is
  // bsteps[s+1] (segment n-2-s), so unwind in reverse storage order.
  for (std::size_t s = n; s-- > 0;) {
    const std::size_t seg = n - 1 - s;
    std::vector<double> dstate(dh[seg].begin() + d, dh[seg].end());
    kern::axpy(d, 1.0, carry.data(), dstate.data());
    carry = gru_backward(enc.bwd, trace.bsteps[s], dstate).second;
  }
}

AttentionParams AttentionParams::build(std::size_t input_dim, std::size_t align_dim,
                                       bool gated, Rng& rng) {
  AttentionParams attn;
  attn.input_dim = input_dim;
  attn.align_dim = align_dim;
  attn.gated = gated;
  attn.params.push_back(init_params("attn.W1", {align_dim, input_dim}, rng));
  attn.params.push_back(init_params("attn.W2", {align_dim, input_dim}, rng));
  attn.params.push_back(init_params("attn.b1", {align_dim}, rng));
  attn.params.push_back(init_params("attn.w", {align_dim}, rng));
  attn.params.push_back(init_params("attn.b2", {1}, rng));
  if (gated) {
    ParamTensor gate("attn.gate", {4});
    gate.value = {1.0, 1.0, 0.0, 0.0};  // w1, w2, b1, b2: informative, unsaturated
    attn.params.push_back(std::move(gate));
  }
  return attn;
}

std::vector<ParamTensor*> AttentionParams::param_ptrs() {
  std::vector<ParamTensor*> out;
  for (ParamTensor& p : params) out.push_back(&p);
  return out;
}

double gate_value(const ParamTensor& gate, std::size_t i, std::size_t j) {
  if (i == j) return 1.0;
  const double dist = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
  const double t = std::tanh(gate.value[0] * dist + gate.value[2]);
  return sigmoid(gate.value[1] * t + gate.value[3]);
}

std::pair<std::size_t, std::size_t> attention_window(const AttentionParams& attn,
                                                     std::size_t i, std::size_t n) {
  if (attn.unbounded) return {0, n - 1};
  const std::size_t lo = i > attn.window_left ? i - attn.window_left : 0;
  const std::size_t hi = std::min(n - 1, i + attn.window_right);
  return {lo, hi};
}

namespace {

// Shared forward for scores: u_j = ReLU(W1 x_i + W2 x_j + b1), e_j = w.u_j + b2.
struct AttnScoreTrace {
  std::size_t lo = 0, hi = 0;
  std::vector<double> w1x;                  // W1 x_i + b1
  std::vector<std::vector<double>> preact;  // per window slot
  std::vector<std::vector<double>> u;       // ReLU(preact)
  std::vector<double> e;
};

AttnScoreTrace attn_scores_forward(const AttentionParams& attn,
                                   const std::vector<std::vector<double>>& xs,
                                   std::size_t i) {
  const ParamTensor& w1 = attn.params[0];
  const ParamTensor& w2 = attn.params[1];
  const ParamTensor& b1 = attn.params[2];
  const ParamTensor& w = attn.params[3];
  const ParamTensor& b2 = attn.params[4];

  AttnScoreTrace t;
  std::tie(t.lo, t.hi) = attention_window(attn, i, xs.size());
  t.w1x.resize(attn.align_dim);
  kern::matvec(w1.rows(), w1.cols(), w1.value.data(), xs[i].data(), t.w1x.data());
  for (std::size_t k = 0; k < attn.align_dim; ++k) t.w1x[k] += b1.value[k];
  for (std::size_t j = t.lo; j <= t.hi; ++j) {
    std::vector<double> a(attn.align_dim);
    kern::matvec(w2.rows(), w2.cols(), w2.value.data(), xs[j].data(), a.data());
    for (std::size_t k = 0; k < attn.align_dim; ++k) a[k] += t.w1x[k];
    t.preact.push_back(a);
    for (double& v : a) v = v > 0.0 ? v : 0.0;
    t.e.push_back(kern::dot(w.value.data(), a.data(), attn.align_dim) + b2.value[0]);
    t.u.push_back(std::move(a));
  }
  return t;
}

struct AttnWeightTrace {
  std::vector<double> expe;   // exp(e - max)
  std::vector<double> dvals;  // gate values (all 1 when ungated)
  double denom = 0.0;
  std::vector<double> alpha;
};

AttnWeightTrace attn_weights_forward(const std::vector<double>& scores,
                                     const ParamTensor* gate, std::size_t i,
                                     std::size_t lo) {
  AttnWeightTrace t;
  const double mx = *std::max_element(scores.begin(), scores.end());
  t.expe.resize(scores.size());
  t.dvals.resize(scores.size());
  for (std::size_t s = 0; s < scores.size(); ++s) {
    t.expe[s] = std::exp(scores[s] - mx);
    t.dvals[s] = gate ? gate_value(*gate, i, lo + s) : 1.0;
    t.denom += t.dvals[s] * t.expe[s];
  }
  t.alpha.resize(scores.size());
  for (std::size_t s = 0; s < scores.size(); ++s) {
    t.alpha[s] = t.dvals[s] * t.expe[s] / t.denom;
  }
  return t;
}

}  // namespace

std::vector<double> attention_scores(const AttentionParams& attn,
                                     const std::vector<std::vector<double>>& xs,
                                     std::size_t i) {
  return attn_scores_forward(attn, xs, i).e;
}

std::vector<double> attention_weights(const std::vector<double>& scores,
                                      const ParamTensor* gate, std::size_t i,
                                      std::size_t window_lo) {
  if (scores.empty()) throw UsageError("attention weights: empty window");
  return attn_weights_forward(scores, gate, i, window_lo).alpha;
}

std::vector<double> contextual_vector(const AttentionParams& attn,
                                      const std::vector<std::vector<double>>& xs,
                                      std::size_t i) {
  const AttnScoreTrace st = attn_scores_forward(attn, xs, i);
  const AttnWeightTrace wt =
      attn_weights_forward(st.e, attn.gated ? &attn.gate() : nullptr, i, st.lo);
  std::vector<double> c(attn.input_dim, 0.0);
  for (std::size_t s = 0; s < wt.alpha.size(); ++s) {
    kern::axpy(attn.input_dim, wt.alpha[s], xs[st.lo + s].data(), c.data());
  }
  return c;
}

ContextualModel build_contextual(ContextVariant variant, const ContextBuildOpts& opts,
                                 Rng& rng) {
  ContextualModel model;
  model.variant = variant;
  if (variant == ContextVariant::kAttention) {
    // Head first: with window 0 this model must match the non-contextual NN
    // built from the same seed, so both must draw head parameters first.
    model.head = FeedForwardHead::build(opts.feature_dim, opts.head_width,
                                        opts.head_hidden_layers, opts.dropout, rng);
    model.attn = AttentionParams::build(opts.feature_dim, opts.state_dim, opts.gated, rng);
    model.attn.window_left = opts.window_left;
    model.attn.window_right = opts.window_right;
    model.attn.unbounded = opts.unbounded_window;
  } else {
    model.head = FeedForwardHead::build(2 * opts.state_dim, opts.head_width,
                                        opts.head_hidden_layers, opts.dropout, rng);
    model.enc = BiGruEncoder::build(opts.feature_dim, opts.state_dim, rng);
  }
  return model;
}

std::vector<ParamTensor*> ContextualModel::param_ptrs() {
  std::vector<ParamTensor*> out = head.param_ptrs();
  const std::vector<ParamTensor*> rest = variant == ContextVariant::kAttention
                                             ? attn.param_ptrs()
                                             : enc.param_ptrs();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

namespace {

// Forward + optional backward over one document; returns summed BCE.
// ys null => inference only (posteriors_out filled, no loss).
double contextual_doc_pass(ContextualModel& model,
                           const std::vector<std::vector<double>>& xs,
                           const std::vector<LabelVector>* ys, bool want_grad,
                           bool training, Rng* rng,
                           std::vector<std::vector<double>>* posteriors_out) {
  if (xs.empty()) throw DataError("contextual model: empty document");
  const std::size_t n = xs.size();
  double loss = 0.0;

  if (model.variant == ContextVariant::kBiGru) {
    BiGruTrace enc_trace = bigru_forward(model.enc, xs);
    std::vector<HeadTrace> heads(n);
    std::vector<std::vector<double>> dh(want_grad ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
      heads[i] = head_forward(model.head, enc_trace.h[i], training, rng);
      if (posteriors_out) posteriors_out->push_back(heads[i].posteriors);
      if (ys) loss += bce_loss(heads[i].posteriors, (*ys)[i]);
      if (want_grad) {
        const std::vector<double> dlogits = bce_grad_logits(heads[i].posteriors, (*ys)[i]);
        dh[i] = head_backward(model.head, heads[i], dlogits);
      }
    }
    if (want_grad) bigru_backward(model.enc, enc_trace, dh);
    return loss;
  }

  // Attention variant.
  ParamTensor& w1 = model.attn.params[0];
  ParamTensor& w2 = model.attn.params[1];
  ParamTensor& b1 = model.attn.params[2];
  ParamTensor& wv = model.attn.params[3];
  ParamTensor& b2 = model.attn.params[4];
  const ParamTensor* gate = model.attn.gated ? &model.attn.gate() : nullptr;
  const std::size_t ad = model.attn.align_dim;
  const std::size_t d = model.attn.input_dim;

  for (std::size_t i = 0; i < n; ++i) {
    const AttnScoreTrace st = attn_scores_forward(model.attn, xs, i);
    const AttnWeightTrace wt = attn_weights_forward(st.e, gate, i, st.lo);
    std::vector<double> c(d, 0.0);
    for (std::size_t s = 0; s < wt.alpha.size(); ++s) {
      kern::axpy(d, wt.alpha[s], xs[st.lo + s].data(), c.data());
    }
    HeadTrace head = head_forward(model.head, c, training, rng);
    if (posteriors_out) posteriors_out->push_back(head.posteriors);
    if (ys) loss += bce_loss(head.posteriors, (*ys)[i]);
    if (!want_grad) continue;

    const std::vector<double> dlogits = bce_grad_logits(head.posteriors, (*ys)[i]);
    const std::vector<double> dc = head_backward(model.head, head, dlogits);

    // dL/dalpha_s = dc . x_j, then softmax/gate backward:
    //   dL/de_s = alpha_s (g_s - sum_t alpha_t g_t)
    //   dL/dd_s = (expe_s / denom) (g_s - sum_t alpha_t g_t)
    const std::size_t wn = wt.alpha.size();
    std::vector<double> g(wn);
    double gbar = 0.0;
    for (std::size_t s = 0; s < wn; ++s) {
      g[s] = kern::dot(dc.data(), xs[st.lo + s].data(), d);
      gbar += wt.alpha[s] * g[s];
    }
    std::vector<double> de(wn);
    for (std::size_t s = 0; s < wn; ++s) de[s] = wt.alpha[s] * (g[s] - gbar);

    if (gate) {
      ParamTensor& gt = model.attn.params.back();
      for (std::size_t s = 0; s < wn; ++s) {
        const std::size_t j = st.lo + s;
        if (j == i) continue;  // d(i,i) is the constant 1
        const double dd = (wt.expe[s] / wt.denom) * (g[s] - gbar);
        const double dist =
            i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
        const double th = std::tanh(gt.value[0] * dist + gt.value[2]);
        const double dv = wt.dvals[s];
        const double dpre = dd * dv * (1.0 - dv);
        gt.grad[1] += dpre * th;
        gt.grad[3] += dpre;
        const double dth = dpre * gt.value[1] * (1.0 - th * th);
        gt.grad[0] += dth * dist;
        gt.grad[2] += dth;
      }
    }

    // Score backward into the alignment parameters.
    std::vector<double> du(ad);
    for (std::size_t s = 0; s < wn; ++s) {
      if (de[s] == 0.0) continue;
      b2.grad[0] += de[s];
      for (std::size_t k = 0; k < ad; ++k) {
        du[k] = st.preact[s][k] > 0.0 ? de[s] * wv.value[k] : 0.0;
        wv.grad[k] += de[s] * st.u[s][k];
      }
      kern::ger(ad, d, 1.0, du.data(), xs[i].data(), w1.grad.data());
      kern::ger(ad, d, 1.0, du.data(), xs[st.lo + s].data(), w2.grad.data());
      kern::axpy(ad, 1.0, du.data(), b1.grad.data());
    }
  }
  return loss;
}

}  // namespace

std::vector<std::vector<double>> predict_contextual(
    const ContextualModel& model, const std::vector<std::vector<double>>& xs) {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  // Forward-only pass never mutates the model.
  contextual_doc_pass(const_cast<ContextualModel&>(model), xs, nullptr, false, false,
                      nullptr, &out);
  return out;
}

double contextual_loss(ContextualModel& model, const std::vector<std::vector<double>>& xs,
                       const std::vector<LabelVector>& ys, bool want_grad, bool training,
                       Rng* rng) {
  if (xs.size() != ys.size()) throw UsageError("contextual loss: size mismatch");
  return contextual_doc_pass(model, xs, &ys, want_grad, training, rng, nullptr);
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<ParamTensor*>& params) {
  std::vector<std::vector<double>> vals;
  for (const ParamTensor* p : params) vals.push_back(p->value);
  return vals;
}

}  // namespace

void train_contextual(ContextualModel& model, const std::vector<DocExample>& train,
                      const std::vector<DocExample>& val, const ContextTrainOpts& opts,
                      Rng& rng, const ValMetric& metric, TrainLog* log) {
  if (train.empty()) throw UsageError("contextual train: empty training set");
  if (val.empty()) throw UsageError("contextual train: validation set required");
  if (opts.max_epochs == 0) throw UsageError("contextual train: epochs = 0, no training performed");
  for (const DocExample& doc : train) {
    if (doc.x.size() != doc.y.size() || doc.x.empty()) {
      throw DataError("contextual train: unlabeled or empty training document");
    }
  }

  const std::vector<ParamTensor*> params = model.param_ptrs();
  AdamState adam(params, opts.adam_alpha);

  const auto evaluate = [&]() {
    std::vector<std::vector<double>> outs;
    std::vector<LabelVector> targets;
    for (const DocExample& doc : val) {
      for (auto& p : predict_contextual(model, doc.x)) outs.push_back(std::move(p));
      targets.insert(targets.end(), doc.y.begin(), doc.y.end());
    }
    return metric ? metric(outs) : micro_f1_at_half(outs, targets);
  };

  double best_metric = -1.0;
  std::vector<std::vector<double>> best = snapshot(params);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_segments = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_docs) {
      const std::size_t end = std::min(order.size(), start + opts.batch_docs);
      for (ParamTensor* p : params) p->zero_grad();
      double batch_loss = 0.0;
      std::size_t batch_segments = 0;
      for (std::size_t b = start; b < end; ++b) {
        const DocExample& doc = train[order[b]];
        batch_loss += contextual_loss(model, doc.x, doc.y, true, true, &rng);
        batch_segments += doc.x.size();
      }
      const double inv = 1.0 / static_cast<double>(batch_segments);
      for (ParamTensor* p : params) kern::scal(p->grad.size(), inv, p->grad.data());
      if (opts.grad_clip > 0.0) clip_grad_norm(params, opts.grad_clip);
      adam.update();
      epoch_loss += batch_loss;
      epoch_segments += batch_segments;
    }
    epoch_loss /= static_cast<double>(epoch_segments);
    if (!std::isfinite(epoch_loss)) throw NumericError("contextual train: diverged");

    const double m = evaluate();
    const bool selected = m > best_metric;
    if (selected) {
      best_metric = m;
      best = snapshot(params);
    }
    if (log) log->epochs.push_back({epoch, epoch_loss, m, selected});
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
}

}  // namespace segtopic
