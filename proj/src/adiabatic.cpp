#include "adiab/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adiab {

namespace {
constexpr cplx kI{0.0, 1.0};
}

MatFn kato_generator(const ProjectionFamily& p) {
  const MatFn pe = p.eval, pd = p.deriv;
  return [pe, pd](double t) {
    const Mat x = pe(t), dx = pd(t);
    return Mat(dx * x - x * dx);
  };
}

Propagator evolve(const OperatorFamily& a, const ProjectionFamily* p,
                  EvolutionKind kind, double eps, const EvolutionOptions& opt) {
  if (kind != EvolutionKind::Full && !p)
    throw InvalidInput("evolve: projection family required");
  const bool frame = opt.use_frame && a.meta.twist && a.meta.base &&
                     (kind == EvolutionKind::Full ||
                      p->provenance == Provenance::AnalyticSimilarity);
  const double t_end = opt.t_end;
  if (frame) {
    const Mat C = *a.meta.twist;
    const MatFn base = a.meta.base;
    Mat bounded = C;
    Mat P0;
    if (kind != EvolutionKind::Full) {
      P0 = p->eval(0.0);
      const Mat x = P0 * C - C * P0;
      bounded += x * P0 - P0 * x;
    }
    MatFn slow = base;
    if (kind == EvolutionKind::Projected) slow = [base, P0](double t) { return Mat(base(t) * P0); };
    if (a.meta.base_constant) {
      Propagator u = propagate_constant(slow(0.0), bounded, C, eps, 0.0, t_end);
      if (u.frame()) return u;
      return u.with_source(u.source()->W, C, P0);
    }
    Generator g{a.dim, slow, [bounded](double) { return bounded; }, a.kinks};
    Propagator w = propagate(g, eps, 0.0, t_end, opt.tol_step);
    return unframe(w, C).with_source(std::move(w), C, P0);
  }
  Generator g;
  g.dim = a.dim;
  g.kinks = a.kinks;
  if (kind == EvolutionKind::Projected) {
    const MatFn ae = a.eval, pe = p->eval;
    g.slow = [ae, pe](double t) { return Mat(ae(t) * pe(t)); };
  } else {
    g.slow = a.eval;
  }
  if (kind != EvolutionKind::Full) g.bounded = kato_generator(*p);
  return propagate(g, eps, 0.0, t_end, opt.tol_step);
}

double intertwining_residual(const Propagator& v, const ProjectionFamily& p,
                             std::size_t stride) {
  const auto& grid = v.grid();
  double worst = 0.0;
  stride = std::max<std::size_t>(1, stride);
  const FrameSource* src = v.source();
  if (src && src->P0.size() > 0) {
    // P(t)V(t,s) - V(t,s)P(s) = e^{-Ct} (P0 W - W P0) e^{Cs}. Forming V first
    // would bury an exact zero under roundoff of size eps_mach * |V|.
    const Mat& P0 = src->P0;
    std::vector<Mat> R(grid.size()), Rinv(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      R[k] = mat_exp(grid[k] * src->C);
      Rinv[k] = mat_exp(-grid[k] * src->C);
    }
    for (std::size_t s = 0; s + 1 < grid.size(); s += stride) {
      Mat w = identity(v.dim());
      for (std::size_t k = s + 1; k < grid.size(); ++k) {
        w = s == 0 ? src->W.at(k) : Mat(src->W.between(k, k - 1) * w);
        const Mat x = P0 * w - w * P0;
        worst = std::max(worst, op_norm(Rinv[k] * x * R[s]));
      }
    }
    return worst;
  }
  std::vector<Mat> pg(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) pg[k] = p.eval(grid[k]);
  for (std::size_t s = 0; s + 1 < grid.size(); s += stride) {
    Mat vts = identity(v.dim());
    for (std::size_t k = s + 1; k < grid.size(); ++k) {
      vts = s == 0 ? v.at(k) : Mat(v.between(k, k - 1) * vts);
      worst = std::max(worst, op_norm(pg[k] * vts - vts * pg[s]));
    }
  }
  return worst;
}

AdiabaticEvolution adiabatic_evolution(const OperatorFamily& a,
                                       const ProjectionFamily& p, double eps,
                                       const EvolutionOptions& opt,
                                       double threshold) {
  AdiabaticEvolution out{evolve(a, &p, EvolutionKind::Kato, eps, opt), 0.0};
  out.intertwining = intertwining_residual(out.V, p);
  if (!(out.intertwining <= threshold))
    throw AdiabaticityViolation("adiabatic_evolution: V does not intertwine P",
                                out.intertwining);
  return out;
}

ProjectedEvolution projected_evolution(const OperatorFamily& a,
                                       const ProjectionFamily& p,
                                       const Curve& lambda, int m0, double eps,
                                       const EvolutionOptions& opt) {
  if (m0 < 1) throw InvalidInput("projected_evolution: m0 must be >= 1");
  ProjectedEvolution out;
  for (double t : output_grid(0.0, opt.t_end, 65)) {
    Mat m = a.eval(t);
    m.diagonal().array() -= lambda.value(t);
    const Mat pt = p.eval(t);
    const double r = op_norm(mat_pow(m, m0) * pt) / std::max(1.0, op_norm(pt));
    out.kernel_residual = std::max(out.kernel_residual, r);
    if (r > 1e-7)
      throw KernelInclusionViolation("projected_evolution: P(t)X not in ker(A - lambda)^m0", t, r);
  }
  out.V0 = evolve(a, &p, EvolutionKind::Projected, eps, opt);
  const Mat p0 = p.eval(0.0);
  std::vector<std::pair<double, double>> samples;
  for (std::size_t k = 0; k < out.V0.size(); ++k) {
    const double v = op_norm(out.V0.at(k) * p0);
    samples.emplace_back(out.V0.grid()[k], v);
    out.sup_norm = std::max(out.sup_norm, v);
  }
  auto excess = [&](double mc) {
    double e = -std::numeric_limits<double>::infinity();
    for (auto [t, v] : samples) e = std::max(e, v - mc * std::exp(mc * t));
    return e;
  };
  double lo = 1.0, hi = 1.0;
  if (excess(1.0) > 0.0) {
    while (excess(hi) > 0.0 && hi < 1e8) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
  }
  out.bound_constant = hi;
  return out;
}

Mat commutator_solution_B(const Mat& a, cplx lambda, const Mat& p,
                          const Mat& p_deriv, int m0) {
  require_operator(a, "commutator_solution_B");
  if (m0 < 1) throw InvalidInput("commutator_solution_B: m0 must be >= 1");
  const Eigen::Index n = a.rows();
  const Mat q = identity(n) - p;
  Mat lam_minus_a = -a;
  lam_minus_a.diagonal().array() += lambda;
  // (lambda - A) on range(1-P), identity on range P.
  const Mat x = lam_minus_a * q + p;
  Eigen::PartialPivLU<Mat> lu(x);
  const double scale = std::max(1.0, x.cwiseAbs().colwise().sum().maxCoeff());
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-14 * scale) || !(lu.rcond() * scale > 1e-12))
    throw GapViolation("commutator_solution_B: reduced resolvent is singular",
                       std::numeric_limits<double>::quiet_NaN());
  const Mat rbar = lu.solve(q);
  Mat b = Mat::Zero(n, n);
  Mat rpow = rbar;               // Rbar^{k+1}
  Mat lpow = identity(n);        // (lambda - A)^k
  for (int k = 0; k < m0; ++k) {
    b += rpow * p_deriv * lpow * p + lpow * p * p_deriv * rpow;
    rpow = rpow * rbar;
    lpow = lpow * lam_minus_a;
  }
  return b;
}

Mat commutator_solution_B_contour(const Mat& a, const Mat& p_deriv,
                                  const ContourCycle& cycle, double tol) {
  auto sum = [&](const ContourCycle& c) {
    Mat b = Mat::Zero(a.rows(), a.cols());
    for (int k = 0; k < c.size(); ++k) {
      const Mat r = resolvent(a, c.nodes[k]);
      accumulate(b, c.weights[k] / (2.0 * kPi * kI), matmul(matmul(r, p_deriv), r));
    }
    return b;
  };
  int n = cycle.size();
  Mat prev = sum(cycle);
  while (n < (1 << 14)) {
    n *= 2;
    Mat next = sum(cycle.refined(n));
    const double diff = op_norm(next - prev);
    if (diff <= tol * std::max(1.0, op_norm(next))) return next;
    prev = std::move(next);
  }
  throw QuadratureFailure("commutator_solution_B_contour: no convergence", n,
                          std::numeric_limits<double>::quiet_NaN());
}

double commutator_residual(const Mat& b, const Mat& a, const Mat& p,
                           const Mat& p_deriv) {
  return op_norm(b * a - a * b - (p_deriv * p - p * p_deriv));
}

struct SuperadiabaticState::Memo {
  double t;
  std::map<std::pair<int, int>, Mat> p, k;
};

SuperadiabaticState::SuperadiabaticState(OperatorFamily a, ContourPath cycle,
                                         double eps, int level, int nodes,
                                         int rank, double h)
    : a_(std::move(a)),
      cycle_(std::move(cycle)),
      eps_(eps),
      level_(level),
      nodes_(nodes),
      rank_(rank),
      h_(h) {}

Mat SuperadiabaticState::p_at(Memo& memo, int j, double t, int off) const {
  const auto key = std::make_pair(j, off);
  auto it = memo.p.find(key);
  if (it != memo.p.end()) return it->second;
  const double x = t + off * h_;
  Mat aj = a_.eval(x);
  if (j > 0) aj -= eps_ * k_at(memo, j - 1, t, off);
  Mat pj;
  try {
    pj = riesz_sum(aj, cycle_(x).refined(nodes_));
  } catch (const NearSingular&) {
    throw IterationBreakdown("superadiabatic: cycle meets the spectrum of A_n", j, x);
  }
  memo.p.emplace(key, pj);
  return pj;
}

Mat SuperadiabaticState::k_at(Memo& memo, int j, double t, int off) const {
  const auto key = std::make_pair(j, off);
  auto it = memo.k.find(key);
  if (it != memo.k.end()) return it->second;
  const double x = t + off * h_;
  const Mat pc = p_at(memo, j, t, off);
  Mat d;
  if (x - 2 * h_ >= a_.lo && x + 2 * h_ <= a_.hi) {
    const Mat d1 = (p_at(memo, j, t, off + 1) - p_at(memo, j, t, off - 1)) / (2 * h_);
    const Mat d2 = (p_at(memo, j, t, off + 2) - p_at(memo, j, t, off - 2)) / (4 * h_);
    d = (4.0 * d1 - d2) / 3.0;
  } else if (x - 2 * h_ < a_.lo) {
    d = (-3.0 * pc + 4.0 * p_at(memo, j, t, off + 1) - p_at(memo, j, t, off + 2)) / (2 * h_);
  } else {
    d = (3.0 * pc - 4.0 * p_at(memo, j, t, off - 1) + p_at(memo, j, t, off - 2)) / (2 * h_);
  }
  Mat kj = d * pc - pc * d;
  memo.k.emplace(key, kj);
  return kj;
}

Mat SuperadiabaticState::P(int j, double t) const {
  if (j < 0 || j > level_) throw InvalidInput("superadiabatic: level out of range");
  Memo memo{t, {}, {}};
  return p_at(memo, j, t, 0);
}

Mat SuperadiabaticState::K(int j, double t) const {
  if (j < 0 || j > level_) throw InvalidInput("superadiabatic: level out of range");
  Memo memo{t, {}, {}};
  return k_at(memo, j, t, 0);
}

Mat SuperadiabaticState::A(int j, double t) const {
  if (j < 0 || j > level_) throw InvalidInput("superadiabatic: level out of range");
  if (j == 0) return a_.eval(t);
  return a_.eval(t) - eps_ * K(j - 1, t);
}

ProjectionFamily SuperadiabaticState::projection(int j) const {
  if (j < 0 || j > level_) throw InvalidInput("superadiabatic: level out of range");
  ProjectionFamily pf;
  pf.dim = a_.dim;
  pf.rank = rank_;
  pf.provenance = Provenance::RieszPath;
  // The state is copied into the closures; it is immutable.
  auto self = std::make_shared<const SuperadiabaticState>(*this);
  pf.eval = [self, j](double t) { return self->P(j, t); };
  pf.deriv = [self, j](double t) {
    Memo memo{t, {}, {}};
    const double hh = self->h_;
    return Mat(((4.0 / 3.0) * (self->p_at(memo, j, t, 1) - self->p_at(memo, j, t, -1)) / (2 * hh)) -
               ((1.0 / 3.0) * (self->p_at(memo, j, t, 2) - self->p_at(memo, j, t, -2)) / (4 * hh)));
  };
  return pf;
}

std::vector<double> SuperadiabaticState::telescoping(const std::vector<double>& grid) const {
  std::vector<double> out(level_, 0.0);
  for (double t : grid) {
    Memo memo{t, {}, {}};
    Mat prev = k_at(memo, 0, t, 0);
    for (int j = 1; j <= level_; ++j) {
      const Mat kj = k_at(memo, j, t, 0);
      out[j - 1] = std::max(out[j - 1], op_norm(kj - prev));
      prev = kj;
    }
  }
  return out;
}

SuperadiabaticState superadiabatic_iterate(const OperatorFamily& a,
                                           const ContourPath& cycle, double eps,
                                           int n, double h) {
  if (n < 0) throw InvalidInput("superadiabatic_iterate: n must be >= 0");
  if (!(eps > 0.0)) throw InvalidInput("superadiabatic_iterate: eps must be positive");
  const double tm = 0.5;
  int nodes = 0;
  try {
    nodes = riesz_projection_detailed(a.eval(tm), cycle(tm), 1e-13).nodes;
  } catch (const Error&) {
    throw IterationBreakdown("superadiabatic: level 0 projection failed", 0, tm);
  }
  nodes *= 2;
  const int rank = static_cast<int>(std::lround(riesz_sum(a.eval(tm), cycle(tm).refined(nodes)).trace().real()));
  SuperadiabaticState st(a, cycle, eps, n, nodes, rank, h);
  // Certify every level on a coarse grid.
  for (double t : output_grid(0.0, 1.0, 33)) {
    for (int j = 0; j <= n; ++j) {
      const Mat aj = st.A(j, t);
      ContourCycle c = cycle(t);
      const Certificate cert = certify(c, aj);
      if (!cert.ok || cert.enclosed_count != rank)
        throw IterationBreakdown("superadiabatic: enclosure lost", j, t);
      const Mat pj = st.P(j, t);
      if (op_norm(pj * pj - pj) > 1e-8)
        throw IterationBreakdown("superadiabatic: projection not idempotent", j, t);
    }
  }
  return st;
}

Transition transition_amplitude(const Propagator& u, const MatFn& p) {
  Transition tr;
  const auto& grid = u.grid();
  const Mat p0 = p(grid.front());
  const Mat q0 = identity(u.dim()) - p0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Mat pt = p(grid[k]);
    const Mat ut = u.at(k);
    tr.out = std::max(tr.out, op_norm(matmul(identity(u.dim()) - pt, matmul(ut, p0))));
    tr.in = std::max(tr.in, op_norm(matmul(pt, matmul(ut, q0))));
  }
  return tr;
}

Transition transition_amplitude(const Propagator& u, const ProjectionFamily& p) {
  return transition_amplitude(u, p.eval);
}

}  // namespace adiab
