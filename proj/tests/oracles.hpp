#pragma once
// Reference implementations used only by the tests. Kept deliberately naive
// so they share no code path with the library.

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Plain Taylor series with scaling and squaring; fine for modest norms.
inline Mat exp_taylor(const Mat& a) {
  const double nrm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(nrm, -s) > 0.25) ++s;
  const Mat x = a / std::ldexp(1.0, s);
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Adaptive 7/15 Gauss-Kronrod on [a, b].
inline double gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                            double tol, int depth = 50) {
  static const double xk[8] = {0.991455371120812639, 0.949107912342758525,
                               0.864864423359769073, 0.741531185599394440,
                               0.586087235467691130, 0.405845151377397167,
                               0.207784955007898468, 0.0};
  static const double wk[8] = {0.022935322010529225, 0.063092092629978553,
                               0.104790010322250184, 0.140653259715525919,
                               0.169004726639267903, 0.190350578064785410,
                               0.204432940075298892, 0.209482141084727828};
  static const double wg[4] = {0.129484966168869693, 0.279705391489276668,
                               0.381830050505118945, 0.417959183673469388};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k15 = wk[7] * f(c), g7 = wg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double fp = f(c + h * xk[i]), fm = f(c - h * xk[i]);
    k15 += wk[i] * (fp + fm);
    if (i % 2 == 1) g7 += wg[i / 2] * (fp + fm);
  }
  k15 *= h;
  g7 *= h;
  if (std::abs(k15 - g7) <= tol || depth == 0) return k15;
  return gauss_kronrod(f, a, c, 0.5 * tol, depth - 1) +
         gauss_kronrod(f, c, b, 0.5 * tol, depth - 1);
}

// Closed form of int_0^{1/4} t cos^2(2 pi t) dt.
inline double ex33_closed_form() {
  const double pi = std::acos(-1.0);
  return 1.0 / 64.0 - 1.0 / (16.0 * pi * pi);
}

inline Mat random_matrix(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * cplx(nd(rng), nd(rng));
  return m;
}

inline double spectral_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

}  // namespace oracle
