#include "adiab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define ADIAB_HAVE_AVX2_VARIANT 1
#endif

namespace adiab::kernels {

#ifdef ADIAB_HAVE_AVX2_VARIANT
namespace {

#define ADIAB_AVX2 __attribute__((target("avx2,fma")))

// acc += (br + i bi) * x for two packed complex numbers.
ADIAB_AVX2 inline __m256d cmul_acc(__m256d acc, __m256d x, __m256d br,
                                   __m256d bi) {
  const __m256d xs = _mm256_permute_pd(x, 0x5);
  return _mm256_add_pd(acc, _mm256_fmaddsub_pd(br, x, _mm256_mul_pd(bi, xs)));
}

// Row blocks of 8, 2 and 1 complex entries; accumulators stay in registers
// across the inner dimension.
ADIAB_AVX2 void gemm_avx2(std::size_t m, std::size_t k, std::size_t n,
                          const cplx* a, const cplx* b, cplx* c) {
  const double* A = reinterpret_cast<const double*>(a);
  const double* B = reinterpret_cast<const double*>(b);
  double* C = reinterpret_cast<double*>(c);
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = B + 2 * j * k;
    double* cj = C + 2 * j * m;
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
      __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
      __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d br = _mm256_set1_pd(bj[2 * p]);
        const __m256d bi = _mm256_set1_pd(bj[2 * p + 1]);
        const double* ap = A + 2 * (p * m + i);
        c0 = cmul_acc(c0, _mm256_loadu_pd(ap), br, bi);
        c1 = cmul_acc(c1, _mm256_loadu_pd(ap + 4), br, bi);
        c2 = cmul_acc(c2, _mm256_loadu_pd(ap + 8), br, bi);
        c3 = cmul_acc(c3, _mm256_loadu_pd(ap + 12), br, bi);
      }
      _mm256_storeu_pd(cj + 2 * i, c0);
      _mm256_storeu_pd(cj + 2 * i + 4, c1);
      _mm256_storeu_pd(cj + 2 * i + 8, c2);
      _mm256_storeu_pd(cj + 2 * i + 12, c3);
    }
    for (; i + 2 <= m; i += 2) {
      __m256d c0 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d br = _mm256_set1_pd(bj[2 * p]);
        const __m256d bi = _mm256_set1_pd(bj[2 * p + 1]);
        c0 = cmul_acc(c0, _mm256_loadu_pd(A + 2 * (p * m + i)), br, bi);
      }
      _mm256_storeu_pd(cj + 2 * i, c0);
    }
    if (i < m) {
      double re = 0.0, im = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double ar = A[2 * (p * m + i)], ai = A[2 * (p * m + i) + 1];
        const double br = bj[2 * p], bi = bj[2 * p + 1];
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
      }
      cj[2 * i] = re;
      cj[2 * i + 1] = im;
    }
  }
}

ADIAB_AVX2 void axpy_avx2(std::size_t len, cplx alpha, const cplx* x, cplx* y) {
  const double* X = reinterpret_cast<const double*>(x);
  double* Y = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d v = cmul_acc(_mm256_loadu_pd(Y + 2 * i),
                               _mm256_loadu_pd(X + 2 * i), ar, ai);
    _mm256_storeu_pd(Y + 2 * i, v);
  }
  if (i < len) {
    const double xr = X[2 * i], xi = X[2 * i + 1];
    Y[2 * i] += alpha.real() * xr - alpha.imag() * xi;
    Y[2 * i + 1] += alpha.real() * xi + alpha.imag() * xr;
  }
}

#undef ADIAB_AVX2

}  // namespace

const Table* avx2_table() {
  static const bool ok =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const Table t{"avx2", &gemm_avx2, &axpy_avx2};
  return ok ? &t : nullptr;
}

#else

const Table* avx2_table() { return nullptr; }

#endif

}  // namespace adiab::kernels
