#include "segtopic/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "segtopic/errors.hpp"

namespace segtopic {

using nlohmann::json;

std::size_t RunConfig::effective_epochs() const {
  if (epochs > 0) return epochs;
  return variant == "svm" ? 30 : 50;
}

void RunConfig::validate() const {
  if (preset != "standard" && preset != "noisy") {
    throw UsageError("config: unknown preset \"" + preset + "\"");
  }
  if (variant != "svm" && variant != "mlp" && variant != "bigru" && variant != "attn") {
    throw UsageError("config: unknown variant \"" + variant + "\"");
  }
  if (music && lsa_dim == 0) throw UsageError("config: music feature requires lsa_dim > 0");
  if (svm_lambda <= 0.0) throw UsageError("config: svm_lambda must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("config: dropout outside [0,1)");
  if (gate && variant != "attn") throw UsageError("config: gate applies to the attn variant only");
  if (window_left < -1 || window_right < -1) {
    throw UsageError("config: window must be >= 0, or -1 for unbounded");
  }
  if ((window_left == -1) != (window_right == -1)) {
    throw UsageError("config: unbounded window requires both sides set to -1");
  }
  if (hidden_width == 0 || state_dim == 0) throw UsageError("config: zero layer width");
}

RunConfig make_preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "standard") {
    c.lsa_dim = 900;
    c.svm_lambda = 1e-4;
    c.mlp_hidden_layers = 2;
    c.rnn_head_layers = 1;
    c.attn_head_layers = 2;
    c.dropout = 0.25;
  } else if (name == "noisy") {
    c.lsa_dim = 300;
    c.svm_lambda = 1e-3;
    c.mlp_hidden_layers = 1;
    c.rnn_head_layers = 0;  // GRU output feeds the output layer directly
    c.attn_head_layers = 1;
    c.dropout = 0.5;
  } else {
    throw UsageError("config: unknown preset \"" + name + "\"");
  }
  return c;
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "preset",        "variant",       "lsa_dim",        "music",
      "min_token_length", "stopwords",  "seed",           "epochs",
      "dropout",       "hidden_width",  "adam_alpha",     "grad_clip",
      "select_by_type_ap", "svm_lambda", "mlp_hidden_layers", "rnn_head_layers",
      "attn_head_layers", "state_dim",  "window_left",    "window_right",
      "gate",          "train_corpus",  "val_corpus",     "corpus",
      "model_file",    "features_file", "output"};
  return keys;
}

}  // namespace

RunConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) {
      throw UsageError("config: unknown key \"" + item.key() + "\"");
    }
  }
  RunConfig c = make_preset(j.value("preset", std::string("standard")));
  try {
    read_field(j, "variant", c.variant);
    read_field(j, "lsa_dim", c.lsa_dim);
    read_field(j, "music", c.music);
    read_field(j, "min_token_length", c.min_token_length);
    read_field(j, "stopwords", c.stopwords);
    read_field(j, "seed", c.seed);
    read_field(j, "epochs", c.epochs);
    read_field(j, "dropout", c.dropout);
    read_field(j, "hidden_width", c.hidden_width);
    read_field(j, "adam_alpha", c.adam_alpha);
    read_field(j, "grad_clip", c.grad_clip);
    read_field(j, "select_by_type_ap", c.select_by_type_ap);
    read_field(j, "svm_lambda", c.svm_lambda);
    read_field(j, "mlp_hidden_layers", c.mlp_hidden_layers);
    read_field(j, "rnn_head_layers", c.rnn_head_layers);
    read_field(j, "attn_head_layers", c.attn_head_layers);
    read_field(j, "state_dim", c.state_dim);
    read_field(j, "window_left", c.window_left);
    read_field(j, "window_right", c.window_right);
    read_field(j, "gate", c.gate);
    read_field(j, "train_corpus", c.train_corpus);
    read_field(j, "val_corpus", c.val_corpus);
    read_field(j, "corpus", c.corpus);
    read_field(j, "model_file", c.model_file);
    read_field(j, "features_file", c.features_file);
    read_field(j, "output", c.output);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: bad field type: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["variant"] = c.variant;
  j["lsa_dim"] = c.lsa_dim;
  j["music"] = c.music;
  j["min_token_length"] = c.min_token_length;
  j["stopwords"] = c.stopwords;
  j["seed"] = c.seed;
  j["epochs"] = c.epochs;
  j["dropout"] = c.dropout;
  j["hidden_width"] = c.hidden_width;
  j["adam_alpha"] = c.adam_alpha;
  j["grad_clip"] = c.grad_clip;
  j["select_by_type_ap"] = c.select_by_type_ap;
  j["svm_lambda"] = c.svm_lambda;
  j["mlp_hidden_layers"] = c.mlp_hidden_layers;
  j["rnn_head_layers"] = c.rnn_head_layers;
  j["attn_head_layers"] = c.attn_head_layers;
  j["state_dim"] = c.state_dim;
  j["window_left"] = c.window_left;
  j["window_right"] = c.window_right;
  j["gate"] = c.gate;
  j["train_corpus"] = c.train_corpus;
  j["val_corpus"] = c.val_corpus;
  j["corpus"] = c.corpus;
  j["model_file"] = c.model_file;
  j["features_file"] = c.features_file;
  j["output"] = c.output;
  return j.dump();
}

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(config_to_json(config)); }

}  // namespace segtopic
