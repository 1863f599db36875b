#include "segtopic/kernels.hpp"

#include <cstring>

namespace segtopic::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(std::size_t n, double alpha, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void hadamard_scalar(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void matvec_scalar(std::size_t rows, std::size_t cols, const double* a,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void matvec_t_scalar(std::size_t rows, std::size_t cols, const double* a,
                     const double* x, double* y) {
  std::memset(y, 0, cols * sizeof(double));
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(cols, x[r], a + r * cols, y);
}

void ger_scalar(std::size_t rows, std::size_t cols, double alpha,
                const double* u, const double* v, double* a) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(cols, alpha * u[r], v, a + r * cols);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",       dot_scalar,      axpy_scalar, scal_scalar,
      hadamard_scalar, matvec_scalar, matvec_t_scalar, ger_scalar,
  };
  return table;
}

}  // namespace segtopic::kern
