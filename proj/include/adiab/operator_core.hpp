#pragma once

#include <complex>

#include <Eigen/Dense>

#include "adiab/errors.hpp"

namespace adiab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

bool all_finite(const Mat& m);

// Throws InvalidInput unless m is square, non-empty and finite.
void require_operator(const Mat& m, const char* what);

Mat identity(Eigen::Index n);

// Products and accumulation routed through the dispatched kernels.
Mat matmul(const Mat& a, const Mat& b);
void accumulate(Mat& y, cplx alpha, const Mat& x);
Mat commutator(const Mat& a, const Mat& b);
Mat mat_pow(const Mat& a, int k);

// Spectral norm (largest singular value). All operator norms use this.
double op_norm(const Mat& m);

// exp(M) by scaling and squaring around a diagonal Pade approximant.
Mat mat_exp(const Mat& m);

// (z - A)^{-1}. Throws NearSingular when z sits on the numerical spectrum.
Mat resolvent(const Mat& a, cplx z);

// Orthonormal basis of ker M as columns. Singular values at or below
// tol_rank * max(sigma_max, scale) count as zero; pass scale = |M| when m is
// a residual of M that may be pure roundoff.
Mat null_space(const Mat& m, double tol_rank = 1e-9, double scale = 0.0);

// Orthonormal basis of range M, same rank convention.
Mat range_basis(const Mat& m, double tol_rank = 1e-9);

}  // namespace adiab
