#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "segtopic/corpus.hpp"

namespace segtopic {

struct Vocabulary {
  std::vector<std::string> terms;  // dense indices 0..V-1, lexicographic order
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> document_frequency;  // per term, over training segments
  std::size_t num_training_segments = 0;

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> lookup(const std::string& term) const {
    auto it = index.find(term);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

struct TfIdfModel {
  Vocabulary vocabulary;
  std::vector<double> idf;  // ln((1+N)/(1+df)) + 1, always >= 1
};

// Truncated SVD of the training tf-idf matrix. Rows of `components` are the
// top-k right-singular vectors (the columns of the V x k projection matrix),
// orthonormal; singular_values is nonincreasing.
struct LsaModel {
  std::size_t input_dim = 0;  // V
  std::size_t k = 0;
  std::vector<double> singular_values;
  std::vector<double> components;  // k x V row-major

  bool empty() const { return k == 0; }
};

// Small English stopword list applied at fit time when enabled.
const std::set<std::string>& default_stopwords();

std::vector<const Segment*> collect_segments(const std::vector<Document>& corpus);

// Builds the vocabulary over tokens surviving the filters (length >
// min_token_length - 1 is kept, i.e. tokens shorter than min_token_length and
// stopwords are dropped) and the smoothed idf weights. Segments are the
// "documents" of the df statistics. Throws DataError if nothing survives.
TfIdfModel fit_tfidf(const std::vector<const Segment*>& training_segments,
                     std::size_t min_token_length, const std::set<std::string>& stopwords);

// Bag-of-words counts of in-vocabulary tokens, scaled by idf, L2-normalized.
// All-zero vectors (only out-of-vocabulary tokens) are returned as zero.
std::vector<double> transform_tfidf(const TfIdfModel& model, const Segment& segment);

// Seeded truncated SVD of a row-major rows x cols matrix: randomized
// subspace iteration (oversampling 10, 4 power iterations) with a dense
// one-sided-Jacobi path when min(rows, cols) <= 64. Throws UsageError when
// k is outside [1, min(rows, cols)].
LsaModel fit_lsa(const std::vector<double>& matrix, std::size_t rows, std::size_t cols,
                 std::size_t k, std::uint64_t seed);

// x^T * projection; x must have dimension V.
std::vector<double> transform_lsa(const LsaModel& model, const std::vector<double>& x);

// x ⊕ δ: appends the music posterior as one extra feature dimension.
// Throws DataError unless 0 < delta < 1.
std::vector<double> append_music(const std::vector<double>& x, double delta);

namespace lsa_detail {
// Both paths exposed for equivalence testing; fit_lsa picks between them.
LsaModel fit_lsa_dense(const std::vector<double>& matrix, std::size_t rows, std::size_t cols,
                       std::size_t k);
LsaModel fit_lsa_randomized(const std::vector<double>& matrix, std::size_t rows,
                            std::size_t cols, std::size_t k, std::uint64_t seed);
}  // namespace lsa_detail

// Fit-time feature options; `seed` drives the randomized SVD only.
struct FeaturePlan {
  std::size_t min_token_length = 4;
  bool use_stopwords = true;
  std::size_t lsa_dim = 0;  // 0 = raw tf-idf features
  bool use_music = false;   // appends δ; requires lsa_dim > 0
  std::uint64_t seed = 0;
};

// Immutable fitted pipeline: tf-idf, optional LSA projection, optional
// music concatenation. transform() is pure.
struct FeaturePipeline {
  FeaturePlan plan;
  TfIdfModel tfidf;
  LsaModel lsa;

  std::size_t dim() const;
  std::vector<double> transform(const Segment& segment) const;
};

FeaturePipeline fit_features(const std::vector<Document>& training_corpus,
                             const FeaturePlan& plan);

}  // namespace segtopic
