#pragma once

#include <complex>
#include <cstddef>

// Dense complex kernels used by the hot loops (matrix products, quadrature
// accumulation). Every routine has a portable reference version; an AVX2/FMA
// variant is picked at runtime when the CPU supports it.
namespace adiab::kernels {

using cplx = std::complex<double>;

// Column-major storage, leading dimension equal to the row count.
// c = a * b with a (m x k), b (k x n), c (m x n). c must not alias a or b.
using GemmFn = void (*)(std::size_t m, std::size_t k, std::size_t n,
                        const cplx* a, const cplx* b, cplx* c);

// y += alpha * x
using AxpyFn = void (*)(std::size_t len, cplx alpha, const cplx* x, cplx* y);

struct Table {
  const char* name;
  GemmFn gemm;
  AxpyFn axpy;
};

const Table& scalar_table();

// nullptr when the variant was not built or the CPU lacks the features.
const Table* avx2_table();

// Selected once per process. ADIAB_KERNELS=scalar forces the reference path.
const Table& active();

}  // namespace adiab::kernels
