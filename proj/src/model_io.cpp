#include "segtopic/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "segtopic/errors.hpp"

namespace segtopic {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void expect(std::istream& in, const std::string& want) {
  std::string got;
  in >> got;
  if (!in || got != want) {
    throw DataError("model file: expected \"" + want + "\", got \"" + got + "\"");
  }
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  in >> v;
  if (!in) throw DataError(std::string("model file: malformed ") + what);
  return v;
}

void write_tensor(std::ostream& out, const ParamTensor& p) {
  out << "tensor " << p.name << " " << p.shape.size();
  for (std::size_t d : p.shape) out << " " << d;
  out << "\n";
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    out << (i ? " " : "") << fmt(p.value[i]);
  }
  out << "\n";
}

ParamTensor read_tensor(std::istream& in) {
  expect(in, "tensor");
  const auto name = read_value<std::string>(in, "tensor name");
  const auto ndim = read_value<std::size_t>(in, "tensor rank");
  std::vector<std::size_t> shape(ndim);
  for (auto& d : shape) d = read_value<std::size_t>(in, "tensor dim");
  ParamTensor p(name, shape);
  for (double& v : p.value) v = read_value<double>(in, "tensor value");
  return p;
}

void write_head(std::ostream& out, const FeedForwardHead& head) {
  out << "head " << head.input_dim << " " << head.width << " " << head.hidden_layers
      << " " << fmt(head.dropout_rate) << "\n";
  for (const ParamTensor& p : head.params) write_tensor(out, p);
}

FeedForwardHead read_head(std::istream& in) {
  expect(in, "head");
  FeedForwardHead head;
  head.input_dim = read_value<std::size_t>(in, "head input_dim");
  head.width = read_value<std::size_t>(in, "head width");
  head.hidden_layers = read_value<std::size_t>(in, "head layers");
  head.dropout_rate = read_value<double>(in, "head dropout");
  for (std::size_t i = 0; i < 2 * (head.hidden_layers + 1); ++i) {
    head.params.push_back(read_tensor(in));
  }
  return head;
}

}  // namespace

std::string serialize_features(const FeaturePipeline& f) {
  std::ostringstream out;
  out << "segtopic-features v1\n";
  out << "plan " << f.plan.min_token_length << " " << (f.plan.use_stopwords ? 1 : 0) << " "
      << f.plan.lsa_dim << " " << (f.plan.use_music ? 1 : 0) << " " << f.plan.seed << "\n";
  out << "segments " << f.tfidf.vocabulary.num_training_segments << "\n";
  out << "vocab " << f.tfidf.vocabulary.size() << "\n";
  for (std::size_t i = 0; i < f.tfidf.vocabulary.size(); ++i) {
    // Term last: the JSON-quoted form may contain spaces but never a newline.
    out << f.tfidf.vocabulary.document_frequency[i] << " " << fmt(f.tfidf.idf[i]) << " "
        << nlohmann::json(f.tfidf.vocabulary.terms[i]).dump() << "\n";
  }
  out << "lsa " << f.lsa.k << " " << f.lsa.input_dim << "\n";
  if (f.lsa.k > 0) {
    out << "sv";
    for (double v : f.lsa.singular_values) out << " " << fmt(v);
    out << "\n";
    for (std::size_t r = 0; r < f.lsa.k; ++r) {
      out << "comp";
      for (std::size_t c = 0; c < f.lsa.input_dim; ++c) {
        out << " " << fmt(f.lsa.components[r * f.lsa.input_dim + c]);
      }
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

FeaturePipeline parse_features(const std::string& text) {
  std::istringstream in(text);
  std::string header, version;
  in >> header >> version;
  if (header != "segtopic-features" || version != "v1") {
    throw DataError("feature file: unrecognized header");
  }
  FeaturePipeline f;
  expect(in, "plan");
  f.plan.min_token_length = read_value<std::size_t>(in, "plan");
  f.plan.use_stopwords = read_value<int>(in, "plan") != 0;
  f.plan.lsa_dim = read_value<std::size_t>(in, "plan");
  f.plan.use_music = read_value<int>(in, "plan") != 0;
  f.plan.seed = read_value<std::uint64_t>(in, "plan");
  expect(in, "segments");
  f.tfidf.vocabulary.num_training_segments = read_value<std::size_t>(in, "segments");
  expect(in, "vocab");
  const auto v = read_value<std::size_t>(in, "vocab size");
  f.tfidf.vocabulary.terms.resize(v);
  f.tfidf.vocabulary.document_frequency.resize(v);
  f.tfidf.idf.resize(v);
  for (std::size_t i = 0; i < v; ++i) {
    f.tfidf.vocabulary.document_frequency[i] = read_value<std::size_t>(in, "df");
    f.tfidf.idf[i] = read_value<double>(in, "idf");
    std::string quoted;
    std::getline(in >> std::ws, quoted);
    try {
      f.tfidf.vocabulary.terms[i] = nlohmann::json::parse(quoted).get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw DataError("feature file: malformed term " + quoted);
    }
    f.tfidf.vocabulary.index.emplace(f.tfidf.vocabulary.terms[i], i);
  }
  expect(in, "lsa");
  f.lsa.k = read_value<std::size_t>(in, "lsa k");
  f.lsa.input_dim = read_value<std::size_t>(in, "lsa dim");
  if (f.lsa.k > 0) {
    expect(in, "sv");
    f.lsa.singular_values.resize(f.lsa.k);
    for (double& s : f.lsa.singular_values) s = read_value<double>(in, "singular value");
    f.lsa.components.resize(f.lsa.k * f.lsa.input_dim);
    for (std::size_t r = 0; r < f.lsa.k; ++r) {
      expect(in, "comp");
      for (std::size_t c = 0; c < f.lsa.input_dim; ++c) {
        f.lsa.components[r * f.lsa.input_dim + c] = read_value<double>(in, "component");
      }
    }
  }
  expect(in, "end");
  return f;
}

void save_features(const FeaturePipeline& features, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open feature file for writing: " + path);
  out << serialize_features(features);
  if (!out) throw DataError("write failed: " + path);
}

FeaturePipeline load_features(const std::string& path, std::uint64_t* hash_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (hash_out) *hash_out = fnv1a(text);
  return parse_features(text);
}

std::string serialize_model(const TrainedModel& model) {
  std::ostringstream out;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(model.feature_hash));
  out << "segtopic-model v1\n";
  out << "feature-hash " << hash << "\n";
  // Paths are run plumbing, not model identity: strip them so identically
  // seeded runs writing to different locations still produce identical bytes.
  RunConfig embedded = model.config;
  embedded.train_corpus.clear();
  embedded.val_corpus.clear();
  embedded.corpus.clear();
  embedded.model_file.clear();
  embedded.features_file.clear();
  embedded.output.clear();
  out << "config " << config_to_json(embedded) << "\n";
  out << "variant " << model.config.variant << "\n";
  if (model.config.variant == "svm") {
    out << "lambda " << fmt(model.svm.lambda) << "\n";
    for (std::size_t k = 0; k < kNumTopics; ++k) {
      out << "label " << k << " " << fmt(model.svm.bias[k]) << " "
          << model.svm.weights[k].size();
      for (double w : model.svm.weights[k]) out << " " << fmt(w);
      out << "\n";
    }
  } else if (model.config.variant == "mlp") {
    write_head(out, model.mlp.head);
  } else {
    write_head(out, model.ctx.head);
    if (model.ctx.variant == ContextVariant::kAttention) {
      const AttentionParams& a = model.ctx.attn;
      out << "attn " << a.input_dim << " " << a.align_dim << " " << a.window_left << " "
          << a.window_right << " " << (a.unbounded ? 1 : 0) << " " << (a.gated ? 1 : 0)
          << "\n";
      for (const ParamTensor& p : a.params) write_tensor(out, p);
    } else {
      out << "bigru " << model.ctx.enc.fwd.input_dim << " " << model.ctx.enc.fwd.state_dim
          << "\n";
      for (const ParamTensor& p : model.ctx.enc.fwd.params) write_tensor(out, p);
      for (const ParamTensor& p : model.ctx.enc.bwd.params) write_tensor(out, p);
    }
  }
  out << "end\n";
  return out.str();
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << serialize_model(model);
  if (!out) throw DataError("write failed: " + path);
}

TrainedModel load_model(const std::string& model_path, const std::string& features_path) {
  std::ifstream in(model_path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + model_path);

  TrainedModel model;
  std::string header, version;
  in >> header >> version;
  if (header != "segtopic-model" || version != "v1") {
    throw DataError("model file: unrecognized header");
  }
  expect(in, "feature-hash");
  const auto hash_hex = read_value<std::string>(in, "feature hash");
  model.feature_hash = std::stoull(hash_hex, nullptr, 16);
  expect(in, "config");
  std::string config_line;
  std::getline(in >> std::ws, config_line);
  model.config = parse_config_json(config_line);
  expect(in, "variant");
  const auto variant = read_value<std::string>(in, "variant");
  if (variant != model.config.variant) {
    throw DataError("model file: variant line disagrees with embedded config");
  }

  if (variant == "svm") {
    expect(in, "lambda");
    model.svm.lambda = read_value<double>(in, "lambda");
    model.svm.weights.resize(kNumTopics);
    model.svm.bias.resize(kNumTopics);
    for (std::size_t k = 0; k < kNumTopics; ++k) {
      expect(in, "label");
      const auto id = read_value<std::size_t>(in, "label id");
      if (id != k) throw DataError("model file: label ids out of order");
      model.svm.bias[k] = read_value<double>(in, "bias");
      const auto d = read_value<std::size_t>(in, "weight count");
      model.svm.weights[k].resize(d);
      for (double& w : model.svm.weights[k]) w = read_value<double>(in, "weight");
    }
  } else if (variant == "mlp") {
    model.mlp.head = read_head(in);
  } else {
    model.ctx.head = read_head(in);
    if (variant == "attn") {
      model.ctx.variant = ContextVariant::kAttention;
      expect(in, "attn");
      AttentionParams& a = model.ctx.attn;
      a.input_dim = read_value<std::size_t>(in, "attn input_dim");
      a.align_dim = read_value<std::size_t>(in, "attn align_dim");
      a.window_left = read_value<std::size_t>(in, "window");
      a.window_right = read_value<std::size_t>(in, "window");
      a.unbounded = read_value<int>(in, "window flag") != 0;
      a.gated = read_value<int>(in, "gate flag") != 0;
      const std::size_t n_tensors = a.gated ? 6 : 5;
      for (std::size_t i = 0; i < n_tensors; ++i) a.params.push_back(read_tensor(in));
    } else if (variant == "bigru") {
      model.ctx.variant = ContextVariant::kBiGru;
      expect(in, "bigru");
      const auto input_dim = read_value<std::size_t>(in, "bigru input_dim");
      const auto state_dim = read_value<std::size_t>(in, "bigru state_dim");
      model.ctx.enc.fwd.input_dim = model.ctx.enc.bwd.input_dim = input_dim;
      model.ctx.enc.fwd.state_dim = model.ctx.enc.bwd.state_dim = state_dim;
      for (int i = 0; i < 9; ++i) model.ctx.enc.fwd.params.push_back(read_tensor(in));
      for (int i = 0; i < 9; ++i) model.ctx.enc.bwd.params.push_back(read_tensor(in));
    } else {
      throw DataError("model file: unknown variant \"" + variant + "\"");
    }
  }
  expect(in, "end");

  std::uint64_t actual = 0;
  model.features = load_features(features_path, &actual);
  if (actual != model.feature_hash) {
    throw DataError("feature file does not match the model's embedded feature hash");
  }
  return model;
}

}  // namespace segtopic
