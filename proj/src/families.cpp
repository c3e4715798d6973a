#include "adiab/families.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "adiab/spectral.hpp"

namespace adiab {

namespace {
constexpr cplx kI{0.0, 1.0};
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::AnalyticSimilarity: return "analytic-similarity";
    case Provenance::NumericDiff: return "numeric-diff";
    case Provenance::RieszPath: return "riesz-path";
  }
  return "?";
}

Derivative family_derivative(const MatFn& f, double t, double h, double lo,
                             double hi) {
  if (!(h > 0.0)) throw InvalidInput("family_derivative: h must be positive");
  Derivative d;
  if (t - 2 * h >= lo && t + 2 * h <= hi) {
    const Mat d1 = (f(t + h) - f(t - h)) / (2 * h);
    const Mat d2 = (f(t + 2 * h) - f(t - 2 * h)) / (4 * h);
    d.value = (4.0 * d1 - d2) / 3.0;
    return d;
  }
  d.one_sided = true;
  if (t - 2 * h < lo) {
    d.value = (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2 * h)) / (2 * h);
  } else {
    d.value = (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2 * h)) / (2 * h);
  }
  return d;
}

Derivative family_derivative(const OperatorFamily& f, double t, double h) {
  return family_derivative(f.eval, t, h, f.lo, f.hi);
}

M0Stability check_m0_stability(const Curve& lambda,
                               const std::function<double(double)>& alpha,
                               const std::vector<double>& grid) {
  M0Stability out;
  out.stable = true;
  out.r0 = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double re = lambda.value(t).real();
    const double a = alpha ? alpha(t) : 0.0;
    if (a < 0.0) throw InvalidInput("check_m0_stability: alpha must be >= 0");
    if (re > 1e-14) out.stable = false;
    if (a > 0.0) out.r0 = std::min(out.r0, std::abs(re) / a);
  }
  if (!(out.r0 > 0.0)) out.stable = false;
  return out;
}

Params parse_params(const std::vector<std::string>& kv) {
  Params p;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidInput("parameter '" + s + "' is not key=value");
    const std::string key = s.substr(0, eq), val = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != val.size() || val.empty())
      throw InvalidInput("parameter '" + key + "' needs a numeric value");
    p[key] = v;
  }
  return p;
}

void attach_similarity(StandardExample& ex, Eigen::Index dim, MatFn A0,
                       MatFn A0_deriv, bool A0_constant, const Mat& C,
                       const Mat& P0, std::vector<double> kinks) {
  ex.C = C;
  ex.P0 = P0;
  OperatorFamily& A = ex.A;
  A.dim = dim;
  A.kinks = kinks;
  A.eval = [A0, C](double t) {
    return Mat(mat_exp(-t * C) * A0(t) * mat_exp(t * C));
  };
  A.deriv = [A0, A0_deriv, C](double t) {
    const Mat a0 = A0(t);
    return Mat(mat_exp(-t * C) * (A0_deriv(t) + a0 * C - C * a0) * mat_exp(t * C));
  };
  A.meta.label = ex.label;
  A.meta.lambda = ex.lambda;
  A.meta.twist = C;
  A.meta.base = A0;
  A.meta.base_deriv = A0_deriv;
  A.meta.base_constant = A0_constant;

  ProjectionFamily& P = ex.P;
  P.dim = dim;
  P.rank = static_cast<int>(std::lround(P0.trace().real()));
  P.provenance = Provenance::AnalyticSimilarity;
  P.eval = [P0, C](double t) { return Mat(mat_exp(-t * C) * P0 * mat_exp(t * C)); };
  P.deriv = [P0, C](double t) {
    const Mat p = mat_exp(-t * C) * P0 * mat_exp(t * C);
    return Mat(p * C - C * p);
  };
}

namespace {

using Builder = StandardExample (*)(const Params&);

double get(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void only_keys(const Params& p, std::initializer_list<const char*> allowed,
               const std::string& label) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : p)
    if (!ok.count(k)) throw InvalidInput(label + ": unknown parameter '" + k + "'");
}

int truncation(const Params& p, const std::string& key, int fallback) {
  const double v = get(p, key, fallback);
  if (v != std::floor(v) || v < 4)
    throw InvalidInput("truncation size '" + key + "' must be an integer >= 4");
  return static_cast<int>(v);
}

Mat diag_projection(Eigen::Index n, Eigen::Index rank) {
  Mat p = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < rank; ++i) p(i, i) = 1.0;
  return p;
}

// Example 3.1 family: Jordan-type 2x2 block plus one complementary eigenvalue.
// On [0, 0.7] the block is 0; afterwards lambda = -s/3 and alpha = 4 s^2 with
// s = t - 0.7, so the block is not dissipative at t = 1 while r0 = 5/18.
StandardExample build_ex31(const Params& p, bool uniform) {
  StandardExample ex;
  ex.label = uniform ? "ex3-1u" : "ex3-1";
  only_keys(p, {"twist", "shift", "kappa", "gap"}, ex.label);
  ex.params = p;
  const double twist = get(p, "twist", 0.5);
  const double shift = get(p, "shift", 0.0);
  const double kappa = get(p, "kappa", 1.0);
  const double gap = get(p, "gap", 1.0);
  if (uniform && !(gap > 0.0)) throw InvalidInput("ex3-1u: gap must be positive");
  constexpr double t_kink = 0.7;
  auto s = [](double t) { return std::max(0.0, t - t_kink); };
  auto lam = [=](double t) { return cplx(shift - s(t) / 3.0, 0.0); };
  auto dlam = [=](double t) { return t > t_kink ? cplx(-1.0 / 3.0) : cplx(0.0); };
  auto alpha = [=](double t) { return 4.0 * s(t) * s(t); };
  auto dalpha = [=](double t) { return 8.0 * s(t); };
  auto mu = [=](double t) {
    return uniform ? lam(t) - gap : lam(t) + kI * kappa * (2.0 * t - 1.0);
  };
  auto dmu = [=](double t) {
    return uniform ? dlam(t) : dlam(t) + 2.0 * kI * kappa;
  };
  ex.lambda = Curve{lam, {t_kink}};
  MatFn A0 = [=](double t) {
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = a(1, 1) = lam(t);
    a(0, 1) = alpha(t);
    a(2, 2) = mu(t);
    return a;
  };
  MatFn A0d = [=](double t) {
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = a(1, 1) = dlam(t);
    a(0, 1) = dalpha(t);
    a(2, 2) = dmu(t);
    return a;
  };
  Mat C = Mat::Zero(3, 3);
  C(1, 2) = twist;
  C(2, 1) = -twist;
  ex.m0 = 2;
  ex.gapped = uniform;
  ex.gap = uniform ? gap : 0.0;
  attach_similarity(ex, 3, A0, A0d, false, C, diag_projection(3, 2), {t_kink});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = alpha;
  return ex;
}

StandardExample build_ex31u(const Params& p) { return build_ex31(p, true); }
StandardExample build_ex31c(const Params& p) { return build_ex31(p, false); }

// Discretized Volterra operator on L^2(0,1) next to a multiplication operator
// whose spectrum [a(t)-1, a(t)] meets the Volterra eigenvalue at t = 1/2.
StandardExample build_ex32(const Params& p) {
  StandardExample ex;
  ex.label = "ex3-2";
  only_keys(p, {"d"}, ex.label);
  ex.params = p;
  const int n = truncation(p, "d", 16);
  const double h = 1.0 / n;
  Mat V = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    V(i, i) = 0.5 * h;
    for (int j = 0; j < i; ++j) V(i, j) = h;
  }
  auto a = [](double t) { return -0.5 * std::abs(2.0 * t - 1.0); };
  auto da = [](double t) { return t > 0.5 ? -1.0 : (t < 0.5 ? 1.0 : 0.0); };
  MatFn A0 = [=](double t) {
    Mat m = Mat::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = -V;
    for (int j = 0; j < n; ++j) m(n + j, n + j) = a(t) - (j + 0.5) * h;
    return m;
  };
  MatFn A0d = [=](double t) {
    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) m(n + j, n + j) = da(t);
    return m;
  };
  Mat C = Mat::Zero(2 * n, 2 * n);
  C.topRightCorner(n, n) = identity(n);
  C.bottomLeftCorner(n, n) = -identity(n);
  ex.lambda = Curve{[h](double) { return cplx(-0.5 * h); }, {}};
  ex.m0 = n;
  ex.truncation_key = "d";
  ex.trunc_dim = n;
  ex.registered_dims = {8, 16, 32};
  attach_similarity(ex, 2 * n, A0, A0d, false, C, diag_projection(2 * n, n), {0.5});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  return ex;
}

// Rank-one projection rotating at angular speed 2 pi; lambda(t) = lam * t.
StandardExample build_ex33(const Params& p) {
  StandardExample ex;
  ex.label = "ex3-3";
  only_keys(p, {"lam", "t0"}, ex.label);
  ex.params = p;
  const double slope = get(p, "lam", 1.0);
  ex.horizon = get(p, "t0", 0.25);
  if (!(ex.horizon > 0.0 && ex.horizon <= 1.0))
    throw InvalidInput("ex3-3: t0 must lie in (0, 1]");
  auto lam = [=](double t) { return cplx(slope * t); };
  ex.lambda = Curve{lam, {}};
  MatFn A0 = [=](double t) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = lam(t);
    return m;
  };
  MatFn A0d = [=](double) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = slope;
    return m;
  };
  Mat C = Mat::Zero(2, 2);
  C(0, 1) = 2.0 * kPi;
  C(1, 0) = -2.0 * kPi;
  ex.m0 = 1;
  attach_similarity(ex, 2, A0, A0d, false, C, diag_projection(2, 1), {});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = [](double) { return 0.0; };
  return ex;
}

// Joye's example: constant A0 with a nilpotent block at 0, and a twist whose
// parameter k < 0 drives the transition.
StandardExample build_joye(const Params& p) {
  StandardExample ex;
  ex.label = "ex-joye";
  only_keys(p, {"k"}, ex.label);
  ex.params = p;
  const double k = get(p, "k", -1.0);
  Mat A0 = Mat::Zero(3, 3);
  A0(0, 1) = kI;
  A0(2, 2) = kI;
  Mat C = Mat::Zero(3, 3);
  C(1, 0) = kI * k;
  C(1, 2) = k;
  C(2, 0) = 1.0;
  C(2, 1) = -1.0;
  ex.lambda = Curve{[](double) { return cplx(0.0); }, {}};
  ex.m0 = 2;
  ex.gapped = true;
  ex.gap = 1.0;
  const Mat zero = Mat::Zero(3, 3);
  attach_similarity(ex, 3, [A0](double) { return A0; },
                    [zero](double) { return zero; }, true, C,
                    diag_projection(3, 2), {});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = [](double) { return 1.0; };
  return ex;
}

// Base-2 van der Corput sequence, n >= 1.
double van_der_corput(unsigned n) {
  double v = 0.0, f = 0.5;
  while (n) {
    if (n & 1u) v += f;
    n >>= 1;
    f *= 0.5;
  }
  return v;
}

// Nilpotent block lambda + alpha N next to d eigenvalues from a deterministic
// dense enumeration of [-1, 0]; the right shift couples everything.
StandardExample build_ex45(const Params& p) {
  StandardExample ex;
  ex.label = "ex4-5";
  only_keys(p, {"d", "nil", "slope"}, ex.label);
  ex.params = p;
  const int d = truncation(p, "d", 16);
  const double nild = get(p, "nil", 2.0);
  if (nild != std::floor(nild) || nild < 1) throw InvalidInput("ex4-5: nil must be >= 1");
  const int nil = static_cast<int>(nild);
  const double slope = get(p, "slope", 1.2);
  const int n = nil + d;
  auto lam = [=](double t) { return cplx(-slope * std::max(0.0, t - 0.5)); };
  auto dlam = [=](double t) { return t > 0.5 ? -slope : 0.0; };
  auto alpha = [=](double t) { return std::abs(lam(t).real()); };
  std::vector<double> rest(d);
  for (int i = 0; i < d; ++i) rest[i] = -van_der_corput(i + 1);
  MatFn A0 = [=](double t) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < nil; ++i) {
      m(i, i) = lam(t);
      if (i + 1 < nil) m(i, i + 1) = alpha(t);
    }
    for (int i = 0; i < d; ++i) m(nil + i, nil + i) = rest[i];
    return m;
  };
  MatFn A0d = [=](double t) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < nil; ++i) {
      m(i, i) = dlam(t);
      if (i + 1 < nil) m(i, i + 1) = -dlam(t);
    }
    return m;
  };
  Mat C = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) C(i + 1, i) = 1.0;
  ex.lambda = Curve{lam, {0.5}};
  ex.theta = [](double) { return 0.5 * kPi; };
  ex.m0 = nil;
  ex.truncation_key = "d";
  ex.trunc_dim = d;
  ex.registered_dims = {8, 16, 32};
  attach_similarity(ex, n, A0, A0d, false, C, diag_projection(n, nil), {0.5});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = alpha;
  return ex;
}

// lambda(t) = -1 + e^{i omega t} on the unit circle around -1, complement
// S_+ - 1 (truncated), twist swapping the two coordinates at the interface.
StandardExample build_ex46(const Params& p) {
  StandardExample ex;
  ex.label = "ex4-6";
  only_keys(p, {"d", "nil", "omega"}, ex.label);
  ex.params = p;
  const int d = truncation(p, "d", 16);
  const double nild = get(p, "nil", 2.0);
  if (nild != std::floor(nild) || nild < 1) throw InvalidInput("ex4-6: nil must be >= 1");
  const int nil = static_cast<int>(nild);
  const double omega = get(p, "omega", 0.6);
  const int n = nil + d;
  auto theta = [=](double t) { return omega * t; };
  auto lam = [=](double t) { return cplx(-1.0) + std::polar(1.0, theta(t)); };
  auto dlam = [=](double t) { return kI * omega * std::polar(1.0, theta(t)); };
  auto alpha = [=](double t) { return 1.0 - std::cos(theta(t)); };
  auto dalpha = [=](double t) { return omega * std::sin(theta(t)); };
  MatFn A0 = [=](double t) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < nil; ++i) {
      m(i, i) = lam(t);
      if (i + 1 < nil) m(i, i + 1) = alpha(t);
    }
    for (int i = 0; i < d; ++i) {
      m(nil + i, nil + i) = -1.0;
      if (i + 1 < d) m(nil + i + 1, nil + i) = 1.0;
    }
    return m;
  };
  MatFn A0d = [=](double t) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < nil; ++i) {
      m(i, i) = dlam(t);
      if (i + 1 < nil) m(i, i + 1) = dalpha(t);
    }
    return m;
  };
  Mat C = Mat::Zero(n, n);
  C(nil - 1, nil) = 1.0;
  C(nil, nil - 1) = -1.0;
  ex.lambda = Curve{lam, {}};
  ex.theta = theta;
  ex.m0 = nil;
  ex.truncation_key = "d";
  ex.trunc_dim = d;
  ex.registered_dims = {8, 16, 32};
  attach_similarity(ex, n, A0, A0d, false, C, diag_projection(n, nil), {});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = alpha;
  return ex;
}

// Multiplication by a translated bump f0(x + t) on a grid over [-L, L].
// P(t) is the indicator of the zero set, which jumps as the support moves.
StandardExample build_ex47(const Params& p, const std::string& label) {
  StandardExample ex;
  ex.label = label;
  only_keys(p, {"d", "L"}, ex.label);
  ex.params = p;
  const int d = truncation(p, "d", 128);
  const double L = get(p, "L", 2.0);
  if (!(L > 1.0)) throw InvalidInput("ex4-7: L must exceed 1");
  std::vector<double> x(d);
  for (int j = 0; j < d; ++j) x[j] = -L + (j + 0.5) * 2.0 * L / d;
  auto f0 = [](double y) {
    return std::abs(y) < 1.0 ? kI * std::pow(1.0 - y * y, 2) : cplx(0.0);
  };
  auto df0 = [](double y) {
    return std::abs(y) < 1.0 ? -4.0 * kI * y * (1.0 - y * y) : cplx(0.0);
  };
  ex.A.dim = d;
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.eval = [=](double t) {
    Mat m = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) m(j, j) = f0(x[j] + t);
    return m;
  };
  ex.A.deriv = [=](double t) {
    Mat m = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) m(j, j) = df0(x[j] + t);
    return m;
  };
  ex.lambda = Curve{[](double) { return cplx(0.0); }, {}};
  ex.A.meta.label = label;
  ex.A.meta.lambda = ex.lambda;
  // No similarity structure: the frame path must not be used here.
  ex.C = Mat::Zero(d, d);
  ex.P.dim = d;
  ex.P.provenance = Provenance::AnalyticSimilarity;
  ex.P.eval = [=](double t) {
    Mat m = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) m(j, j) = std::abs(x[j] + t) >= 1.0 ? 1.0 : 0.0;
    return m;
  };
  ex.P.deriv = [=](double) { return Mat(Mat::Zero(d, d)); };
  ex.P0 = ex.P.eval(0.0);
  ex.P.rank = static_cast<int>(std::lround(ex.P0.trace().real()));
  ex.m0 = 1;
  ex.theta = [](double) { return 0.0; };
  ex.truncation_key = "d";
  ex.trunc_dim = d;
  ex.registered_dims = {64, 128, 256};
  return ex;
}

StandardExample build_ex47_default(const Params& p) { return build_ex47(p, "ex4-7"); }
StandardExample build_ex47_discrete(const Params& p) {
  return build_ex47(p, "ex4-7-discrete");
}

// Analytic 3x3 family, skew-Hermitian, gap at least 1 on [0, 1].
StandardExample build_superad(const Params& p) {
  StandardExample ex;
  ex.label = "ex-superad";
  only_keys(p, {"c"}, ex.label);
  ex.params = p;
  const double c = get(p, "c", 1.0);
  MatFn A0 = [](double t) {
    Mat m = Mat::Zero(3, 3);
    m(1, 1) = kI * (1.0 + 0.5 * t);
    m(2, 2) = -kI * (1.0 + 0.5 * t);
    return m;
  };
  MatFn A0d = [](double) {
    Mat m = Mat::Zero(3, 3);
    m(1, 1) = 0.5 * kI;
    m(2, 2) = -0.5 * kI;
    return m;
  };
  Mat C(3, 3);
  C << 0.0, 0.6, 0.4, -0.6, 0.0, 0.3, -0.4, -0.3, 0.0;
  C *= c;
  ex.lambda = Curve{[](double) { return cplx(0.0); }, {}};
  ex.m0 = 1;
  ex.gapped = true;
  ex.gap = 1.0;
  attach_similarity(ex, 3, A0, A0d, false, C, diag_projection(3, 1), {});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = [](double) { return 0.0; };
  return ex;
}

// Diagonal model for the Hoelder-rate corollary: one level at 0 coupled with
// equal weights to d levels spread uniformly over i[-1, 1] (spectral measure
// with Hoelder exponent 1 at 0).
StandardExample build_holder(const Params& p) {
  StandardExample ex;
  ex.label = "ex-holder";
  only_keys(p, {"d"}, ex.label);
  ex.params = p;
  const int d = truncation(p, "d", 64);
  const int n = d + 1;
  Mat A0 = Mat::Zero(n, n);
  for (int k = 1; k <= d; ++k) A0(k, k) = kI * (-1.0 + (2.0 * k - 1.0) / d);
  Mat C = Mat::Zero(n, n);
  const double ck = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 1; k <= d; ++k) {
    C(k, 0) = ck;
    C(0, k) = -ck;
  }
  ex.lambda = Curve{[](double) { return cplx(0.0); }, {}};
  ex.theta = [](double) { return 0.0; };
  ex.m0 = 1;
  ex.truncation_key = "d";
  ex.trunc_dim = d;
  ex.registered_dims = {64, 128, 256};
  const Mat zero = Mat::Zero(n, n);
  attach_similarity(ex, n, [A0](double) { return A0; },
                    [zero](double) { return zero; }, true, C,
                    diag_projection(n, 1), {});
  ex.A.lo = -1.0;
  ex.A.hi = 2.0;
  ex.A.meta.alpha = [](double) { return 0.0; };
  return ex;
}

const std::map<std::string, Builder>& registry() {
  static const std::map<std::string, Builder> r{
      {"ex3-1", &build_ex31c},       {"ex3-1u", &build_ex31u},
      {"ex3-2", &build_ex32},        {"ex3-3", &build_ex33},
      {"ex-joye", &build_joye},      {"ex4-5", &build_ex45},
      {"ex4-6", &build_ex46},        {"ex4-7", &build_ex47_default},
      {"ex4-7-discrete", &build_ex47_discrete},
      {"ex-superad", &build_superad}, {"ex-holder", &build_holder},
  };
  return r;
}

}  // namespace

std::vector<std::string> example_labels() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

StandardExample build_standard_example(const std::string& label,
                                       const Params& params) {
  const auto& r = registry();
  auto it = r.find(label);
  if (it == r.end()) throw UnknownExample("unknown example '" + label + "'");
  return it->second(params);
}

ProjectionFamily projection_family_from_path(const OperatorFamily& a,
                                             const ContourPath& cycle,
                                             const std::vector<double>& grid,
                                             double h) {
  if (grid.empty()) throw InvalidInput("projection_family_from_path: empty grid");
  // Fix the node count once so the difference quotients see one quadrature
  // rule instead of an adaptively changing one.
  const double tm = grid[grid.size() / 2];
  int nodes = 0;
  try {
    nodes = 2 * riesz_projection_detailed(a.eval(tm), cycle(tm)).nodes;
  } catch (const NearSingular&) {
    throw GapViolation("projection_family_from_path: cycle meets spectrum", tm);
  } catch (const QuadratureFailure&) {
    throw GapViolation("projection_family_from_path: quadrature failed", tm);
  }
  int expected = -1;
  for (double t : grid) {
    ContourCycle c = cycle(t);
    const Certificate cert = certify(c, a.eval(t));
    if (!cert.ok) throw GapViolation("projection_family_from_path: enclosure lost", t);
    if (expected < 0) expected = cert.enclosed_count;
    if (cert.enclosed_count != expected)
      throw GapViolation("projection_family_from_path: enclosed count changed", t);
  }
  ProjectionFamily p;
  p.dim = a.dim;
  p.rank = expected;
  p.provenance = Provenance::RieszPath;
  const MatFn A = a.eval;
  p.eval = [A, cycle, nodes](double t) {
    return riesz_sum(A(t), cycle(t).refined(nodes));
  };
  const MatFn pe = p.eval;
  const double lo = a.lo, hi = a.hi;
  p.deriv = [pe, h, lo, hi](double t) {
    return family_derivative(pe, t, h, lo, hi).value;
  };
  for (double t : grid) {
    const Mat pt = p.eval(t);
    if (op_norm(pt * pt - pt) > 1e-8)
      throw GapViolation("projection_family_from_path: projection not idempotent", t);
  }
  return p;
}

}  // namespace adiab
