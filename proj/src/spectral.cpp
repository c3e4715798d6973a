#include "adiab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace adiab {

namespace {
constexpr cplx kI{0.0, 1.0};
}

ContourCycle ContourCycle::circle(cplx c, double r, int n) {
  if (!(r > 0.0) || n < 4) throw InvalidInput("circle: radius must be positive");
  ContourCycle cyc;
  cyc.shape = Shape::Circle;
  cyc.center = c;
  cyc.radius = r;
  cyc.nodes.resize(n);
  cyc.weights.resize(n);
  const double dphi = 2.0 * kPi / n;
  for (int k = 0; k < n; ++k) {
    const cplx e = std::polar(1.0, k * dphi);
    cyc.nodes[k] = c + r * e;
    cyc.weights[k] = kI * r * e * dphi;
  }
  return cyc;
}

ContourCycle ContourCycle::ellipse(cplx a, cplx b, double r, int n) {
  if (!(r > 0.0) || n < 4) throw InvalidInput("ellipse: radius must be positive");
  const double len = std::abs(b - a);
  if (len == 0.0) return circle(a, r, n);
  ContourCycle cyc;
  cyc.shape = Shape::Ellipse;
  cyc.focus_a = a;
  cyc.focus_b = b;
  cyc.center = 0.5 * (a + b);
  cyc.radius = r;
  const cplx u = (b - a) / len;
  const double ax = 0.5 * len + r;
  // Foci at a and b: the closest curve point to either end is at distance r.
  const double by = std::sqrt(ax * ax - 0.25 * len * len);
  cyc.nodes.resize(n);
  cyc.weights.resize(n);
  const double dphi = 2.0 * kPi / n;
  for (int k = 0; k < n; ++k) {
    const double phi = k * dphi;
    cyc.nodes[k] = cyc.center + u * cplx(ax * std::cos(phi), by * std::sin(phi));
    cyc.weights[k] = u * cplx(-ax * std::sin(phi), by * std::cos(phi)) * dphi;
  }
  return cyc;
}

ContourCycle ContourCycle::refined(int n) const {
  ContourCycle c = shape == Shape::Circle ? circle(center, radius, n)
                                          : ellipse(focus_a, focus_b, radius, n);
  c.enclosed = enclosed;
  return c;
}

double ContourCycle::winding(cplx w) const {
  cplx s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] / (nodes[k] - w);
  return (s / (2.0 * kPi * kI)).real();
}

std::vector<cplx> eigenvalues(const Mat& a) {
  require_operator(a, "eigenvalues");
  Eigen::ComplexEigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw InvalidInput("eigenvalues: no convergence");
  const auto& ev = es.eigenvalues();
  return std::vector<cplx>(ev.data(), ev.data() + ev.size());
}

Certificate certify(ContourCycle& cycle, const Mat& a) {
  Certificate cert;
  const auto ev = eigenvalues(a);
  double dmin = std::numeric_limits<double>::infinity();
  for (const cplx& z : cycle.nodes)
    for (const cplx& l : ev) dmin = std::min(dmin, std::abs(z - l));
  cert.min_distance = dmin;
  cycle.certificate = dmin;
  cert.ok = dmin > 0.0;
  for (const cplx& l : ev) {
    const double w = cycle.winding(l);
    if (std::abs(w - 1.0) < 0.1) {
      ++cert.enclosed_count;
    } else if (std::abs(w) >= 0.1) {
      cert.ok = false;
    }
  }
  return cert;
}

Mat riesz_sum(const Mat& a, const ContourCycle& cycle) {
  require_operator(a, "riesz_sum");
  Mat p = Mat::Zero(a.rows(), a.cols());
  const cplx scale = 1.0 / (2.0 * kPi * kI);
  for (int k = 0; k < cycle.size(); ++k)
    accumulate(p, scale * cycle.weights[k], resolvent(a, cycle.nodes[k]));
  return p;
}

RieszResult riesz_projection_detailed(const Mat& a, const ContourCycle& cycle,
                                      double tol, int cap) {
  require_operator(a, "riesz_projection");
  if (cycle.size() < 4) throw InvalidInput("riesz_projection: empty cycle");
  RieszResult res;
  int n = cycle.size();
  double last = 0.0;
  for (;;) {
    const ContourCycle c = n == cycle.size() ? cycle : cycle.refined(n);
    Mat p = riesz_sum(a, c);
    const double scale = std::max(1.0, op_norm(p));
    last = op_norm(matmul(p, p) - p) / scale;
    if (last <= tol) {
      res.P = std::move(p);
      res.nodes = n;
      res.idempotency = last;
      res.commutation = op_norm(commutator(a, res.P)) /
                        std::max(1.0, op_norm(a) * scale);
      return res;
    }
    if (n >= cap) break;
    n *= 2;
  }
  throw QuadratureFailure("riesz_projection: node cap reached", n, last);
}

Mat riesz_projection(const Mat& a, const ContourCycle& cycle) {
  return riesz_projection_detailed(a, cycle).P;
}

namespace {

// Orthonormal basis of the orthogonal complement of span(cols of q).
Mat complement_basis(const Mat& q, Eigen::Index n) {
  if (q.cols() == 0) return identity(n);
  Eigen::HouseholderQR<Mat> qr(q);
  Mat full = qr.householderQ() * identity(n);
  return full.rightCols(n - q.cols());
}

// ker M^k for k = 1, 2, ... via preimages: K_{k+1} = ker((1 - K_k K_k^*) M).
// Returns the chain of bases; stops once the dimension is stationary.
std::vector<Mat> kernel_chain(const Mat& m, double tol) {
  const Eigen::Index n = m.rows();
  std::vector<Mat> chain;
  const double scale = op_norm(m);
  Mat k = null_space(m, tol, scale);
  chain.push_back(k);
  for (Eigen::Index step = 0; step < n; ++step) {
    const Mat proj = identity(n) - k * k.adjoint();
    Mat next = null_space(proj * m, tol, scale);
    if (next.cols() <= k.cols()) break;
    k = next;
    chain.push_back(k);
  }
  return chain;
}

double smallest_singular(const Mat& m) {
  if (m.cols() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace

WeakAssociation weakly_associated_projection(const Mat& a, cplx lambda,
                                             double tol) {
  require_operator(a, "weakly_associated_projection");
  const Eigen::Index n = a.rows();
  Mat m = a;
  m.diagonal().array() -= lambda;

  const auto chain = kernel_chain(m, tol);
  const Mat& K = chain.back();
  if (chain.front().cols() == 0)
    throw NoWeakAssociation("weak association: lambda is not an eigenvalue");
  WeakAssociation w;
  w.lambda = lambda;
  w.m = static_cast<int>(chain.size());
  const Eigen::Index p = K.cols();

  // Kernel first: range(M^m) as the orthogonal complement of ker((M^*)^m).
  const auto adj_chain = kernel_chain(m.adjoint(), tol);
  const Mat R1 = complement_basis(adj_chain.back(), n);
  if (R1.cols() + p != n)
    throw NoWeakAssociation("weak association: kernel and range do not split X");
  Mat KR(n, n);
  KR << K, R1;
  Eigen::JacobiSVD<Mat> svd(KR);
  const auto& s = svd.singularValues();
  w.condition = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(w.condition < 1e10))
    throw NoWeakAssociation("weak association: ker and range intersect numerically");
  Mat sel = Mat::Zero(n, n);
  sel.topLeftCorner(p, p) = identity(p);
  Eigen::PartialPivLU<Mat> lu(KR);
  const Mat P1 = KR * sel * lu.inverse();

  // Range first: project along ker(M^m) onto range(M^m) from the SVD of the
  // power, then P = 1 - Q.
  const Mat mm = mat_pow(m, w.m);
  Eigen::BDCSVD<Mat> psvd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat R2 = psvd.matrixU().leftCols(n - p);
  const Mat W2 = psvd.matrixV().leftCols(n - p);
  Mat P2 = identity(n);
  if (n - p > 0) {
    const Mat wr = W2.adjoint() * R2;
    P2 -= R2 * wr.partialPivLu().solve(W2.adjoint());
  }

  w.P = P1;
  w.uniqueness = op_norm(P1 - P2);
  const double pn = std::max(1.0, op_norm(P1));
  w.residuals.idempotency = op_norm(P1 * P1 - P1) / pn;
  w.residuals.commutation = op_norm(a * P1 - P1 * a) / (pn * std::max(1.0, op_norm(a)));
  w.residuals.nilpotency = op_norm(mm * P1) / pn;
  w.residuals.injectivity_margin = smallest_singular(m * R1);
  if (!(w.residuals.injectivity_margin > tol * std::max(1.0, op_norm(m))))
    throw NoWeakAssociation("weak association: A - lambda not injective off the kernel");
  return w;
}

const char* to_string(GapClass c) {
  switch (c) {
    case GapClass::Uniform: return "uniform-gap";
    case GapClass::NonUniform: return "non-uniform-gap";
    case GapClass::Gapless: return "gapless";
  }
  return "?";
}

namespace {

double gap_at(const OperatorFamily& a, const Curve& lambda, double t,
              int multiplicity) {
  auto ev = eigenvalues(a.eval(t));
  const cplx l = lambda.value(t);
  std::sort(ev.begin(), ev.end(), [&](cplx x, cplx y) {
    return std::abs(x - l) < std::abs(y - l);
  });
  if (static_cast<int>(ev.size()) <= multiplicity)
    return std::numeric_limits<double>::infinity();
  return std::abs(ev[multiplicity] - l);
}

}  // namespace

GapReport gap_analysis(const OperatorFamily& a, const Curve& lambda,
                       const std::vector<double>& grid, int multiplicity,
                       double tol_gap) {
  GapReport rep;
  const std::size_t n = grid.size();
  rep.gaps.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    rep.gaps[k] = gap_at(a, lambda, grid[k], multiplicity);

  std::size_t tiny = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (rep.gaps[k] < tol_gap) ++tiny;
    const bool left = k == 0 || rep.gaps[k] <= rep.gaps[k - 1];
    const bool right = k + 1 == n || rep.gaps[k] <= rep.gaps[k + 1];
    if (!(left && right)) continue;
    // Local minimum on the grid: refine inside the neighbouring bracket.
    double lo = k == 0 ? grid[k] : grid[k - 1];
    double hi = k + 1 == n ? grid[k] : grid[k + 1];
    double best_t = grid[k], best = rep.gaps[k];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = gap_at(a, lambda, x1, multiplicity);
    double f2 = gap_at(a, lambda, x2, multiplicity);
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
      if (f1 < f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = gap_at(a, lambda, x1, multiplicity);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = gap_at(a, lambda, x2, multiplicity);
      }
    }
    if (f1 < best) { best = f1; best_t = x1; }
    if (f2 < best) { best = f2; best_t = x2; }
    if (best < tol_gap) {
      if (rep.crossings.empty() || std::abs(rep.crossings.back() - best_t) > 1e-9)
        rep.crossings.push_back(best_t);
    }
  }
  rep.min_gap = *std::min_element(rep.gaps.begin(), rep.gaps.end());
  if (2 * tiny > n) {
    rep.classification = GapClass::Gapless;
  } else if (rep.crossings.empty() && rep.min_gap >= tol_gap) {
    rep.classification = GapClass::Uniform;
  } else {
    rep.classification = GapClass::NonUniform;
  }
  return rep;
}

RayBound resolvent_ray_bound(const OperatorFamily& a, const Curve& lambda,
                             const std::function<double(double)>& theta,
                             const ProjectionFamily& p,
                             std::vector<double> deltas,
                             const std::vector<double>& grid, int multiplicity) {
  (void)multiplicity;  // kept for API symmetry; P fixes the split
  if (deltas.empty()) throw InvalidInput("resolvent_ray_bound: no deltas");
  std::sort(deltas.begin(), deltas.end());
  const double dmax = deltas.back();
  RayBound rb;
  rb.deltas = deltas;
  rb.per_delta.assign(deltas.size(), 0.0);
  for (double t : grid) {
    const Mat at = a.eval(t);
    const cplx l = lambda.value(t);
    const cplx dir = std::polar(1.0, theta(t));
    const Mat q = identity(at.rows()) - p.eval(t);
    // Only the spectrum of A on ran(1 - P) matters; lambda itself may be
    // embedded in it.
    const Mat b = range_basis(q);
    if (b.cols() > 0) {
      const Mat bp = b.completeOrthogonalDecomposition().pseudoInverse();
      for (const cplx e : eigenvalues(bp * at * b)) {
        const cplx rel = (e - l) / dir;
        const double scale = std::max(1.0, std::abs(e));
        if (rel.real() > 1e-10 * scale && rel.real() <= dmax * (1.0 + 1e-12) &&
            std::abs(rel.imag()) <= 1e-9 * scale)
          throw RayHitsSpectrum("resolvent_ray_bound: ray meets the spectrum", t,
                                rel.real());
      }
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      Mat r;
      try {
        r = resolvent(at, l + deltas[i] * dir);
      } catch (const NearSingular&) {
        throw RayHitsSpectrum("resolvent_ray_bound: ray meets the spectrum", t,
                              deltas[i]);
      }
      const double v = deltas[i] * op_norm(matmul(r, q));
      rb.per_delta[i] = std::max(rb.per_delta[i], v);
    }
  }
  rb.M0 = *std::max_element(rb.per_delta.begin(), rb.per_delta.end());
  // Growth exponent from the smallest deltas (up to four of them).
  const std::size_t m = std::min<std::size_t>(4, deltas.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::log(deltas[i]);
      const double y = std::log(std::max(rb.per_delta[i], 1e-300));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rb.growth_exponent = -slope;
  }
  rb.unbounded = !std::isfinite(rb.M0) || rb.growth_exponent > 0.1;
  return rb;
}

}  // namespace adiab
