#pragma once

#include <cstddef>
#include <string>

namespace segtopic::kern {

// Dense double-precision kernels used by every model in this repo.
// Each operation has a scalar reference implementation and, on x86-64
// with AVX2+FMA, a vectorized variant. The active table is chosen once
// at startup from CPU features; select() overrides it (tests, env).
//
// Matrices are row-major. matvec/matvec_t overwrite y; ger accumulates.
struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // x *= alpha
  void (*scal)(std::size_t n, double alpha, double* x);
  // out = a .* b
  void (*hadamard)(std::size_t n, const double* a, const double* b, double* out);
  // y = A x            (A: rows x cols)
  void (*matvec)(std::size_t rows, std::size_t cols, const double* a,
                 const double* x, double* y);
  // y = A^T x          (x: rows, y: cols)
  void (*matvec_t)(std::size_t rows, std::size_t cols, const double* a,
                   const double* x, double* y);
  // A += alpha * u v^T (u: rows, v: cols)
  void (*ger)(std::size_t rows, std::size_t cols, double alpha,
              const double* u, const double* v, double* a);
};

enum class Backend { kScalar, kAvx2 };

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr if not compiled in or CPU lacks AVX2

// Active table. Defaults to the best available backend; the
// SEGTOPIC_KERNELS environment variable ("scalar" | "avx2") overrides.
const KernelTable& active();
void select(Backend b);  // throws std::runtime_error if unavailable
bool avx2_available();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  active().axpy(n, alpha, x, y);
}
inline void scal(std::size_t n, double alpha, double* x) {
  active().scal(n, alpha, x);
}
inline void hadamard(std::size_t n, const double* a, const double* b, double* out) {
  active().hadamard(n, a, b, out);
}
inline void matvec(std::size_t rows, std::size_t cols, const double* a,
                   const double* x, double* y) {
  active().matvec(rows, cols, a, x, y);
}
inline void matvec_t(std::size_t rows, std::size_t cols, const double* a,
                     const double* x, double* y) {
  active().matvec_t(rows, cols, a, x, y);
}
inline void ger(std::size_t rows, std::size_t cols, double alpha,
                const double* u, const double* v, double* a) {
  active().ger(rows, cols, alpha, u, v, a);
}

}  // namespace segtopic::kern
