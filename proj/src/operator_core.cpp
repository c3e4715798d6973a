#include "adiab/operator_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "adiab/kernels.hpp"

namespace adiab {

bool all_finite(const Mat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

void require_operator(const Mat& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw InvalidInput(std::string(what) + ": operator must be square and non-empty");
  if (!all_finite(m))
    throw InvalidInput(std::string(what) + ": non-finite entry");
}

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matmul: shape mismatch");
  Mat c(a.rows(), b.cols());
  if (c.size() == 0) return c;
  if (a.cols() == 0) return Mat::Zero(a.rows(), b.cols());
  // Diagonal operands are common (projections, multiplication operators).
  // The O(n^2) scan pays off well before the O(n^3) product does.
  if (a.cols() >= 32) {
    if (a.rows() == a.cols() && a.isDiagonal(0.0)) {
      c = b;
      for (Eigen::Index i = 0; i < c.rows(); ++i) c.row(i) *= a(i, i);
      return c;
    }
    if (b.rows() == b.cols() && b.isDiagonal(0.0)) {
      c = a;
      for (Eigen::Index j = 0; j < c.cols(); ++j) c.col(j) *= b(j, j);
      return c;
    }
  }
  kernels::active().gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(),
                         c.data());
  return c;
}

void accumulate(Mat& y, cplx alpha, const Mat& x) {
  if (y.rows() != x.rows() || y.cols() != x.cols())
    throw InvalidInput("accumulate: shape mismatch");
  kernels::active().axpy(y.size(), alpha, x.data(), y.data());
}

Mat commutator(const Mat& a, const Mat& b) { return matmul(a, b) - matmul(b, a); }

Mat mat_pow(const Mat& a, int k) {
  Mat r = identity(a.rows());
  for (int i = 0; i < k; ++i) r = matmul(a, r);
  return r;
}

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  // Exactly zero rows and columns do not change the singular values.
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (m.row(i).cwiseAbs().maxCoeff() != 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (m.col(j).cwiseAbs().maxCoeff() != 0.0) cols.push_back(j);
  if (rows.empty() || cols.empty()) return 0.0;
  const bool compact = rows.size() < static_cast<std::size_t>(m.rows()) ||
                       cols.size() < static_cast<std::size_t>(m.cols());
  const Mat x = compact ? Mat(m(rows, cols)) : m;
  if (x.rows() <= 16 && x.cols() <= 16) {
    Eigen::JacobiSVD<Mat> svd(x);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<Mat> svd(x);
  return svd.singularValues()(0);
}

namespace {

double norm1(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// Pade numerator/denominator coefficients for degrees 3, 5, 7, 9, 13.
constexpr std::array<double, 4> kB3{120., 60., 12., 1.};
constexpr std::array<double, 6> kB5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7{17297280., 8648640., 1995840., 277200.,
                                    25200.,    1512.,    56.,      1.};
constexpr std::array<double, 10> kB9{17643225600., 8821612800., 2075673600.,
                                     302702400.,   30270240.,   2162160.,
                                     110880.,      3960.,       90.,
                                     1.};
constexpr std::array<double, 14> kB13{
    64764752532480000., 32382376266240000., 7771770303897600.,
    1187353796428800.,  129060195264000.,   10559470521600.,
    670442572800.,      33522128640.,       1323241920.,
    40840800.,          960960.,            16380.,
    182.,               1.};

constexpr std::array<double, 4> kTheta{1.495585217958292e-2, 2.539398330063230e-1,
                                       9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
void pade_low(const Mat& a, const std::array<double, N>& b, Mat& u, Mat& v) {
  const Eigen::Index n = a.rows();
  const Mat a2 = matmul(a, a);
  Mat uu = b[1] * identity(n);
  v = b[0] * identity(n);
  Mat pw = identity(n);
  for (std::size_t k = 2; k < N; k += 2) {
    pw = matmul(pw, a2);
    accumulate(uu, b[k + 1], pw);
    accumulate(v, b[k], pw);
  }
  u = matmul(a, uu);
}

void pade13(const Mat& a, Mat& u, Mat& v) {
  const auto& b = kB13;
  const Eigen::Index n = a.rows();
  const Mat I = identity(n);
  const Mat a2 = matmul(a, a);
  const Mat a4 = matmul(a2, a2);
  const Mat a6 = matmul(a4, a2);
  Mat inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Mat uu = matmul(a6, inner) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * I;
  u = matmul(a, uu);
  inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = matmul(a6, inner) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * I;
}

}  // namespace

Mat mat_exp(const Mat& m) {
  require_operator(m, "mat_exp");
  const Eigen::Index n = m.rows();
  if (m.isDiagonal(0.0)) {
    Mat r = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) r(i, i) = std::exp(m(i, i));
    return r;
  }
  const double nrm = norm1(m);
  Mat u, v;
  int squarings = 0;
  if (nrm <= kTheta[0]) {
    pade_low(m, kB3, u, v);
  } else if (nrm <= kTheta[1]) {
    pade_low(m, kB5, u, v);
  } else if (nrm <= kTheta[2]) {
    pade_low(m, kB7, u, v);
  } else if (nrm <= kTheta[3]) {
    pade_low(m, kB9, u, v);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    pade13(m * std::ldexp(1.0, -squarings), u, v);
  }
  Eigen::PartialPivLU<Mat> lu(v - u);
  Mat r = lu.solve(u + v);
  for (int i = 0; i < squarings; ++i) r = matmul(r, r);
  if (!all_finite(r)) throw InvalidInput("mat_exp: result overflowed");
  return r;
}

Mat resolvent(const Mat& a, cplx z) {
  require_operator(a, "resolvent");
  const Eigen::Index n = a.rows();
  Mat b = -a;
  b.diagonal().array() += z;
  Eigen::PartialPivLU<Mat> lu(b);
  const double scale = std::max(1.0, norm1(a));
  const double sigma_est = lu.rcond() * norm1(b);
  if (!(sigma_est > 1e-12 * scale))
    throw NearSingular("resolvent: z is on the numerical spectrum", sigma_est);
  Mat r = lu.solve(identity(n));
  if (!all_finite(r))
    throw NearSingular("resolvent: inverse overflowed", 0.0);
  return r;
}

namespace {

template <class Svd>
Eigen::Index numerical_rank(const Svd& svd, double tol_rank, double scale = 0.0) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thr = tol_rank * std::max(s(0), scale);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > thr) ++r;
  return r;
}

}  // namespace

Mat null_space(const Mat& m, double tol_rank, double scale) {
  if (m.size() == 0 || !all_finite(m)) throw InvalidInput("null_space: bad input");
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r = numerical_rank(svd, tol_rank, scale);
  const Eigen::Index n = m.cols();
  return svd.matrixV().rightCols(n - r);
}

Mat range_basis(const Mat& m, double tol_rank) {
  if (m.size() == 0 || !all_finite(m)) throw InvalidInput("range_basis: bad input");
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullU);
  const Eigen::Index r = numerical_rank(svd, tol_rank);
  return svd.matrixU().leftCols(r);
}

}  // namespace adiab
