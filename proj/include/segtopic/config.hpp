#pragma once

#include <cstdint>
#include <string>

namespace segtopic {

// Everything a training/prediction run needs, expanded from a preset with
// per-field overrides. Two presets: "standard" (high-resource conditions)
// and "noisy" (low-resource, smaller/heavier-regularized models).
struct RunConfig {
  std::string preset = "standard";  // standard | noisy
  std::string variant = "svm";      // svm | mlp | bigru | attn

  // Features.
  std::size_t lsa_dim = 900;  // 0 = raw tf-idf
  bool music = false;
  std::size_t min_token_length = 4;
  bool stopwords = true;

  // Shared training knobs.
  std::uint64_t seed = 0;
  std::size_t epochs = 0;  // 0 = variant default (30 svm, 50 nn)
  double dropout = 0.25;
  std::size_t hidden_width = 512;
  double adam_alpha = 1e-3;
  double grad_clip = 5.0;  // <= 0 disables
  bool select_by_type_ap = false;

  // SVM.
  double svm_lambda = 1e-4;

  // Architecture depths per variant.
  std::size_t mlp_hidden_layers = 2;
  std::size_t rnn_head_layers = 1;
  std::size_t attn_head_layers = 2;
  std::size_t state_dim = 512;  // GRU state / attention alignment width d'

  // Attention.
  int window_left = 1, window_right = 1;  // -1 = unbounded
  bool gate = false;

  // Paths (optional; command-line flags override).
  std::string train_corpus;
  std::string val_corpus;
  std::string corpus;  // prediction/scoring input
  std::string model_file;
  std::string features_file;
  std::string output;

  std::size_t effective_epochs() const;
  void validate() const;  // throws UsageError
};

// Expands a preset name to its documented defaults. Throws UsageError for
// unknown names.
RunConfig make_preset(const std::string& name);

// Strict JSON round-trip: unknown keys are errors; a file holding only
// {"preset": ...} expands to exactly that preset's defaults.
RunConfig parse_config_json(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

// FNV-1a over the canonical JSON form; embedded in logs for provenance.
std::uint64_t config_hash(const RunConfig& config);

std::uint64_t fnv1a(const void* data, std::size_t len);
inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace segtopic
