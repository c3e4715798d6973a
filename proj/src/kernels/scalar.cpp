#include "adiab/kernels.hpp"

namespace adiab::kernels {
namespace {

// Real arithmetic spelled out so the compiler does not route through the
// NaN-aware complex multiply helpers.
void gemm_ref(std::size_t m, std::size_t k, std::size_t n, const cplx* a,
              const cplx* b, cplx* c) {
  const double* A = reinterpret_cast<const double*>(a);
  const double* B = reinterpret_cast<const double*>(b);
  double* C = reinterpret_cast<double*>(c);
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = C + 2 * j * m;
    for (std::size_t i = 0; i < 2 * m; ++i) cj[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double br = B[2 * (j * k + p)];
      const double bi = B[2 * (j * k + p) + 1];
      const double* ap = A + 2 * p * m;
      for (std::size_t i = 0; i < m; ++i) {
        const double ar = ap[2 * i], ai = ap[2 * i + 1];
        cj[2 * i] += ar * br - ai * bi;
        cj[2 * i + 1] += ar * bi + ai * br;
      }
    }
  }
}

void axpy_ref(std::size_t len, cplx alpha, const cplx* x, cplx* y) {
  const double ar = alpha.real(), ai = alpha.imag();
  const double* X = reinterpret_cast<const double*>(x);
  double* Y = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < len; ++i) {
    const double xr = X[2 * i], xi = X[2 * i + 1];
    Y[2 * i] += ar * xr - ai * xi;
    Y[2 * i + 1] += ar * xi + ai * xr;
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t{"scalar", &gemm_ref, &axpy_ref};
  return t;
}

}  // namespace adiab::kernels
