#include "segtopic/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "segtopic/errors.hpp"
#include "segtopic/model_io.hpp"
#include "segtopic/rng.hpp"

namespace segtopic {

namespace {

constexpr std::uint64_t kValCarveStream = 0x76616cULL;  // distinct rng stream for the carve

struct SegmentFeatures {
  std::vector<std::vector<double>> x;
  std::vector<LabelVector> y;
  std::vector<const Segment*> segs;
  std::vector<const Document*> docs;  // parallel to segs
};

SegmentFeatures transform_corpus(const FeaturePipeline& features,
                                 const std::vector<Document>& corpus) {
  SegmentFeatures out;
  for (const Document& doc : corpus) {
    for (const Segment& seg : doc.segments) {
      out.x.push_back(features.transform(seg));
      out.y.push_back(label_vector(seg));
      out.segs.push_back(&seg);
      out.docs.push_back(&doc);
    }
  }
  return out;
}

std::vector<DocExample> doc_examples(const FeaturePipeline& features,
                                     const std::vector<Document>& corpus) {
  std::vector<DocExample> out;
  for (const Document& doc : corpus) {
    DocExample ex;
    for (const Segment& seg : doc.segments) {
      ex.x.push_back(features.transform(seg));
      ex.y.push_back(label_vector(seg));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// Validation-Type-AP model selection: posteriors arrive flattened in val
// corpus order.
ValMetric type_ap_metric(const std::vector<Document>& val_docs) {
  return [&val_docs](const std::vector<std::vector<double>>& posteriors) {
    SystemOutput output;
    std::size_t i = 0;
    for (const Document& doc : val_docs) {
      for (const Segment& seg : doc.segments) {
        SystemRecord rec;
        rec.doc_id = doc.doc_id;
        rec.segment_id = seg.segment_id;
        for (std::size_t t = 0; t < kNumInDomain; ++t) rec.posteriors[t] = posteriors[i][t];
        output.push_back(std::move(rec));
        ++i;
      }
    }
    return score_type(output, val_docs);
  };
}

}  // namespace

TrainedModel train_model(const std::vector<Document>& train,
                         const std::vector<Document>* validation, const RunConfig& config,
                         TrainLog* log) {
  config.validate();

  // Resolve the train/validation split before fitting anything: features
  // are fit on training documents only.
  std::vector<Document> train_docs;
  std::vector<Document> val_docs;
  const bool needs_val = config.variant != "svm";
  if (!needs_val) {
    train_docs = train;
  } else if (validation && !validation->empty()) {
    train_docs = train;
    val_docs = *validation;
  } else {
    if (train.size() < 2) {
      throw UsageError("training this variant needs >= 2 documents (validation carve)");
    }
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng carve_rng = Rng(config.seed).fork(kValCarveStream);
    carve_rng.shuffle(idx);
    const std::size_t n_val = std::max<std::size_t>(1, train.size() / 10);
    std::vector<bool> is_val(train.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) is_val[idx[i]] = true;
    for (std::size_t i = 0; i < train.size(); ++i) {
      (is_val[i] ? val_docs : train_docs).push_back(train[i]);
    }
  }

  TrainedModel model;
  model.config = config;
  FeaturePlan plan;
  plan.min_token_length = config.min_token_length;
  plan.use_stopwords = config.stopwords;
  plan.lsa_dim = config.lsa_dim;
  plan.use_music = config.music;
  plan.seed = config.seed;
  model.features = fit_features(train_docs, plan);
  model.feature_hash = fnv1a(serialize_features(model.features));

  Rng rng(config.seed);
  if (config.variant == "svm") {
    const SegmentFeatures data = transform_corpus(model.features, train_docs);
    model.svm = train_svm(data.x, data.y, config.svm_lambda, config.effective_epochs(), rng);
    return model;
  }

  const ValMetric metric = config.select_by_type_ap ? type_ap_metric(val_docs) : ValMetric();
  if (config.variant == "mlp") {
    const SegmentFeatures tr = transform_corpus(model.features, train_docs);
    const SegmentFeatures va = transform_corpus(model.features, val_docs);
    MlpTrainOpts opts;
    opts.width = config.hidden_width;
    opts.hidden_layers = config.mlp_hidden_layers;
    opts.dropout = config.dropout;
    opts.max_epochs = config.effective_epochs();
    opts.adam_alpha = config.adam_alpha;
    model.mlp = train_mlp(tr.x, tr.y, va.x, va.y, opts, rng, metric, log);
    return model;
  }

  // Contextual variants.
  ContextBuildOpts build;
  build.feature_dim = model.features.dim();
  build.head_width = config.hidden_width;
  build.dropout = config.dropout;
  build.state_dim = config.state_dim;
  if (config.variant == "attn") {
    build.head_hidden_layers = config.attn_head_layers;
    build.unbounded_window = config.window_left < 0;
    build.window_left = config.window_left < 0 ? 0 : static_cast<std::size_t>(config.window_left);
    build.window_right =
        config.window_right < 0 ? 0 : static_cast<std::size_t>(config.window_right);
    build.gated = config.gate;
  } else {
    build.head_hidden_layers = config.rnn_head_layers;
  }
  model.ctx = build_contextual(
      config.variant == "attn" ? ContextVariant::kAttention : ContextVariant::kBiGru, build,
      rng);
  const std::vector<DocExample> tr = doc_examples(model.features, train_docs);
  const std::vector<DocExample> va = doc_examples(model.features, val_docs);
  ContextTrainOpts opts;
  opts.max_epochs = config.effective_epochs();
  opts.adam_alpha = config.adam_alpha;
  opts.grad_clip = config.grad_clip;
  train_contextual(model.ctx, tr, va, opts, rng, metric, log);
  return model;
}

SystemOutput predict_model(const TrainedModel& model, const std::vector<Document>& corpus) {
  SystemOutput output;
  const bool contextual = model.config.variant == "bigru" || model.config.variant == "attn";
  for (const Document& doc : corpus) {
    std::vector<std::vector<double>> posteriors;
    if (contextual) {
      std::vector<std::vector<double>> xs;
      for (const Segment& seg : doc.segments) xs.push_back(model.features.transform(seg));
      posteriors = predict_contextual(model.ctx, xs);
    } else {
      for (const Segment& seg : doc.segments) {
        const std::vector<double> x = model.features.transform(seg);
        posteriors.push_back(model.config.variant == "svm" ? predict_svm(model.svm, x)
                                                           : predict_mlp(model.mlp, x));
      }
    }
    for (std::size_t i = 0; i < doc.segments.size(); ++i) {
      SystemRecord rec;
      rec.doc_id = doc.doc_id;
      rec.segment_id = doc.segments[i].segment_id;
      for (std::size_t t = 0; t < kNumInDomain; ++t) rec.posteriors[t] = posteriors[i][t];
      output.push_back(std::move(rec));
    }
  }
  return output;
}

}  // namespace segtopic
