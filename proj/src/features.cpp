#include "segtopic/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segtopic/errors.hpp"
#include "segtopic/kernels.hpp"
#include "segtopic/rng.hpp"

namespace segtopic {

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",     "about", "above", "after",  "again",   "all",    "also",  "am",    "an",
      "and",   "any",   "are",   "as",     "at",      "be",     "been",  "being", "below",
      "between", "both", "but",  "by",     "can",     "could",  "did",   "do",    "does",
      "doing", "down",  "during", "each",  "few",     "for",    "from",  "further", "had",
      "has",   "have",  "having", "he",    "her",     "here",   "hers",  "him",   "his",
      "how",   "i",     "if",    "in",     "into",    "is",     "it",    "its",   "just",
      "me",    "more",  "most",  "my",     "no",      "nor",    "not",   "now",   "of",
      "off",   "on",    "once",  "only",   "or",      "other",  "our",   "ours",  "out",
      "over",  "own",   "same",  "she",    "should",  "so",     "some",  "such",  "than",
      "that",  "the",   "their", "theirs", "them",    "then",   "there", "these", "they",
      "this",  "those", "through", "to",   "too",     "under",  "until", "up",    "very",
      "was",   "we",    "were",  "what",   "when",    "where",  "which", "while", "who",
      "whom",  "why",   "will",  "with",   "would",   "you",    "your",  "yours"};
  return words;
}

std::vector<const Segment*> collect_segments(const std::vector<Document>& corpus) {
  std::vector<const Segment*> out;
  for (const Document& d : corpus) {
    for (const Segment& s : d.segments) out.push_back(&s);
  }
  return out;
}

namespace {

bool keep_token(const std::string& tok, std::size_t min_len,
                const std::set<std::string>& stopwords) {
  return tok.size() >= min_len && stopwords.count(tok) == 0;
}

}  // namespace

TfIdfModel fit_tfidf(const std::vector<const Segment*>& training_segments,
                     std::size_t min_token_length, const std::set<std::string>& stopwords) {
  std::set<std::string> df_terms;  // sorted -> deterministic dense ids
  std::unordered_map<std::string, std::size_t> df;
  for (const Segment* seg : training_segments) {
    std::set<std::string> seen;
    for (const std::string& tok : seg->tokens) {
      if (keep_token(tok, min_token_length, stopwords)) seen.insert(tok);
    }
    for (const std::string& tok : seen) {
      ++df[tok];
      df_terms.insert(tok);
    }
  }
  if (df_terms.empty()) {
    throw DataError("tf-idf fit: no tokens survive filtering; effective vocabulary is empty");
  }

  TfIdfModel model;
  model.vocabulary.num_training_segments = training_segments.size();
  model.vocabulary.terms.assign(df_terms.begin(), df_terms.end());
  const std::size_t v = model.vocabulary.terms.size();
  model.vocabulary.document_frequency.resize(v);
  model.idf.resize(v);
  const double n = static_cast<double>(training_segments.size());
  for (std::size_t i = 0; i < v; ++i) {
    const std::string& term = model.vocabulary.terms[i];
    model.vocabulary.index.emplace(term, i);
    const std::size_t dfi = df.at(term);
    model.vocabulary.document_frequency[i] = dfi;
    model.idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(dfi))) + 1.0;
  }
  return model;
}

std::vector<double> transform_tfidf(const TfIdfModel& model, const Segment& segment) {
  std::vector<double> x(model.vocabulary.size(), 0.0);
  for (const std::string& tok : segment.tokens) {
    if (auto idx = model.vocabulary.lookup(tok)) x[*idx] += 1.0;
  }
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= model.idf[i];
  const double norm = std::sqrt(kern::dot(x.data(), x.data(), x.size()));
  if (norm > 0.0) kern::scal(x.size(), 1.0 / norm, x.data());
  return x;
}

namespace lsa_detail {
namespace {

using Cols = std::vector<std::vector<double>>;  // matrix as contiguous columns

double col_dot(const std::vector<double>& a, const std::vector<double>& b) {
  return kern::dot(a.data(), b.data(), a.size());
}

// Orthogonalizes columns in place (modified Gram-Schmidt, one
// re-orthogonalization pass). Near-zero columns are replaced by the first
// standard basis vector with a surviving orthogonal component, keeping the
// result deterministic even for rank-deficient input.
void orthonormalize(Cols& cols) {
  const std::size_t m = cols.empty() ? 0 : cols[0].size();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double r = col_dot(cols[i], cols[j]);
        kern::axpy(m, -r, cols[i].data(), cols[j].data());
      }
    }
    double nrm = std::sqrt(col_dot(cols[j], cols[j]));
    std::size_t basis = 0;
    while (nrm < 1e-10) {
      if (basis >= m) throw NumericError("orthonormalization failed: space exhausted");
      std::fill(cols[j].begin(), cols[j].end(), 0.0);
      cols[j][basis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double r = col_dot(cols[i], cols[j]);
          kern::axpy(m, -r, cols[i].data(), cols[j].data());
        }
      }
      nrm = std::sqrt(col_dot(cols[j], cols[j]));
    }
    kern::scal(m, 1.0 / nrm, cols[j].data());
  }
}

// One-sided Jacobi: rotates column pairs of `m_cols` until all pairs are
// orthogonal. On exit columns are U·diag(sigma); `accum` (if nonnull, a set
// of unit columns) receives the same rotations and holds the right-singular
// vectors of the original matrix.
void jacobi_orthogonalize(Cols& m_cols, Cols* accum) {
  const std::size_t n = m_cols.size();
  const std::size_t rows = n == 0 ? 0 : m_cols[0].size();
  const std::size_t acc_rows = (accum && !accum->empty()) ? (*accum)[0].size() : 0;
  bool rotated = true;
  for (int sweep = 0; sweep < 64 && rotated; ++sweep) {
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double app = col_dot(m_cols[p], m_cols[p]);
        const double aqq = col_dot(m_cols[q], m_cols[q]);
        const double apq = col_dot(m_cols[p], m_cols[q]);
        if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double* cp = m_cols[p].data();
        double* cq = m_cols[q].data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double vp = cp[r], vq = cq[r];
          cp[r] = c * vp - s * vq;
          cq[r] = s * vp + c * vq;
        }
        if (accum) {
          double* jp = (*accum)[p].data();
          double* jq = (*accum)[q].data();
          for (std::size_t r = 0; r < acc_rows; ++r) {
            const double vp = jp[r], vq = jq[r];
            jp[r] = c * vp - s * vq;
            jq[r] = s * vp + c * vq;
          }
        }
        rotated = true;
      }
    }
  }
}

// Sorts column indices by singular value (column norm), descending, stable.
std::vector<std::size_t> order_by_norm(const Cols& cols, std::vector<double>& norms) {
  norms.resize(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) norms[j] = std::sqrt(col_dot(cols[j], cols[j]));
  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  return order;
}

// Packs the chosen right-singular-vector columns into the k x V component
// matrix, orthonormalizing to complete any zero-sigma directions.
LsaModel pack_model(Cols right_vecs, const std::vector<double>& norms,
                    const std::vector<std::size_t>& order, std::size_t k, std::size_t cols,
                    bool normalize) {
  Cols top;
  top.reserve(k);
  std::vector<double> sv;
  for (std::size_t j = 0; j < k; ++j) {
    top.push_back(std::move(right_vecs[order[j]]));
    sv.push_back(norms[order[j]]);
  }
  if (normalize) orthonormalize(top);
  // Canonical sign: flip each component so its largest-magnitude entry is
  // positive (first such entry on ties), making the basis reproducible.
  for (auto& v : top) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
    }
    if (v[arg] < 0.0) kern::scal(v.size(), -1.0, v.data());
  }
  LsaModel model;
  model.input_dim = cols;
  model.k = k;
  model.singular_values = std::move(sv);
  model.components.resize(k * cols);
  for (std::size_t j = 0; j < k; ++j) {
    std::copy(top[j].begin(), top[j].end(), model.components.begin() + j * cols);
  }
  return model;
}

}  // namespace

LsaModel fit_lsa_dense(const std::vector<double>& matrix, std::size_t rows, std::size_t cols,
                       std::size_t k) {
  if (cols <= rows) {
    // Work on the columns of A; the accumulated rotations are the
    // right-singular vectors and stay orthonormal even at zero sigma.
    Cols a(cols, std::vector<double>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) a[c][r] = matrix[r * cols + c];
    }
    Cols accum(cols, std::vector<double>(cols, 0.0));
    for (std::size_t c = 0; c < cols; ++c) accum[c][c] = 1.0;
    jacobi_orthogonalize(a, &accum);
    std::vector<double> norms;
    const auto order = order_by_norm(a, norms);
    return pack_model(std::move(accum), norms, order, k, cols, false);
  }
  // Work on the columns of A^T: after rotation they equal (right-singular
  // vector) * sigma; normalization recovers the vectors.
  Cols at(rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(matrix.begin() + r * cols, matrix.begin() + (r + 1) * cols, at[r].begin());
  }
  jacobi_orthogonalize(at, nullptr);
  std::vector<double> norms;
  const auto order = order_by_norm(at, norms);
  for (std::size_t j = 0; j < at.size(); ++j) {
    if (norms[j] > 0.0) kern::scal(cols, 1.0 / norms[j], at[j].data());
  }
  return pack_model(std::move(at), norms, order, k, cols, true);
}

LsaModel fit_lsa_randomized(const std::vector<double>& matrix, std::size_t rows,
                            std::size_t cols, std::size_t k, std::uint64_t seed) {
  const std::size_t l = std::min(k + 10, std::min(rows, cols));
  Rng rng(seed);

  // Range finder: Y = A*Omega, then 4 rounds of power iteration with
  // re-orthonormalization for spectral sharpening.
  Cols omega(l, std::vector<double>(cols));
  for (auto& col : omega) {
    for (double& v : col) v = rng.normal();
  }
  Cols y(l, std::vector<double>(rows));
  for (std::size_t j = 0; j < l; ++j) {
    kern::matvec(rows, cols, matrix.data(), omega[j].data(), y[j].data());
  }
  orthonormalize(y);
  for (int it = 0; it < 4; ++it) {
    Cols z(l, std::vector<double>(cols));
    for (std::size_t j = 0; j < l; ++j) {
      kern::matvec_t(rows, cols, matrix.data(), y[j].data(), z[j].data());
    }
    orthonormalize(z);
    for (std::size_t j = 0; j < l; ++j) {
      kern::matvec(rows, cols, matrix.data(), z[j].data(), y[j].data());
    }
    orthonormalize(y);
  }

  // B = Q^T A is l x V; its rows (columns of B^T) live in feature space.
  // Jacobi on B^T yields B's right-singular structure directly: rotated
  // columns are (right-singular vector of A) * sigma.
  Cols bt(l, std::vector<double>(cols));
  for (std::size_t j = 0; j < l; ++j) {
    kern::matvec_t(rows, cols, matrix.data(), y[j].data(), bt[j].data());
  }
  jacobi_orthogonalize(bt, nullptr);
  std::vector<double> norms;
  const auto order = order_by_norm(bt, norms);
  for (std::size_t j = 0; j < bt.size(); ++j) {
    if (norms[j] > 0.0) kern::scal(cols, 1.0 / norms[j], bt[j].data());
  }
  return pack_model(std::move(bt), norms, order, k, cols, true);
}

}  // namespace lsa_detail

LsaModel fit_lsa(const std::vector<double>& matrix, std::size_t rows, std::size_t cols,
                 std::size_t k, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw UsageError("lsa fit: empty matrix");
  if (matrix.size() != rows * cols) throw UsageError("lsa fit: matrix size/shape mismatch");
  const std::size_t min_dim = std::min(rows, cols);
  if (k < 1 || k > min_dim) {
    throw UsageError("lsa fit: k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(min_dim) + "]");
  }
  if (min_dim <= 64) return lsa_detail::fit_lsa_dense(matrix, rows, cols, k);
  return lsa_detail::fit_lsa_randomized(matrix, rows, cols, k, seed);
}

std::vector<double> transform_lsa(const LsaModel& model, const std::vector<double>& x) {
  if (x.size() != model.input_dim) {
    throw DataError("lsa transform: input dimension " + std::to_string(x.size()) +
                    " != " + std::to_string(model.input_dim));
  }
  std::vector<double> y(model.k);
  kern::matvec(model.k, model.input_dim, model.components.data(), x.data(), y.data());
  return y;
}

std::vector<double> append_music(const std::vector<double>& x, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DataError("music posterior outside (0,1)");
  }
  std::vector<double> out = x;
  out.push_back(delta);
  return out;
}

std::size_t FeaturePipeline::dim() const {
  std::size_t d = lsa.empty() ? tfidf.vocabulary.size() : lsa.k;
  if (plan.use_music) d += 1;
  return d;
}

std::vector<double> FeaturePipeline::transform(const Segment& segment) const {
  std::vector<double> x = transform_tfidf(tfidf, segment);
  if (!lsa.empty()) x = transform_lsa(lsa, x);
  if (plan.use_music) x = append_music(x, segment.music_posterior);
  return x;
}

FeaturePipeline fit_features(const std::vector<Document>& training_corpus,
                             const FeaturePlan& plan) {
  if (plan.use_music && plan.lsa_dim == 0) {
    throw UsageError("music feature requires LSA (lsa_dim > 0)");
  }
  FeaturePipeline pipe;
  pipe.plan = plan;
  const auto segments = collect_segments(training_corpus);
  static const std::set<std::string> no_stopwords;
  pipe.tfidf = fit_tfidf(segments, plan.min_token_length,
                         plan.use_stopwords ? default_stopwords() : no_stopwords);
  if (plan.lsa_dim > 0) {
    const std::size_t v = pipe.tfidf.vocabulary.size();
    const std::size_t n = segments.size();
    std::vector<double> matrix(n * v);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> row = transform_tfidf(pipe.tfidf, *segments[i]);
      std::copy(row.begin(), row.end(), matrix.begin() + i * v);
    }
    pipe.lsa = fit_lsa(matrix, n, v, plan.lsa_dim, plan.seed);
  }
  return pipe;
}

}  // namespace segtopic
