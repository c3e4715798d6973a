#include "adiab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

namespace adiab {

namespace {

constexpr cplx kI{0.0, 1.0};
const double kSqrt3 = std::sqrt(3.0);

bool is_diag(const Mat& m) { return m.isDiagonal(0.0); }

// s * t, cheap when s is diagonal.
Mat left_multiply(const Mat& s, const Mat& t) {
  if (is_diag(s)) {
    Mat r = t;
    for (Eigen::Index i = 0; i < r.rows(); ++i) r.row(i) *= s(i, i);
    return r;
  }
  return matmul(s, t);
}

bool skew(const Mat& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m + m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

}  // namespace

Mat Generator::eval(double t, double eps) const {
  Mat g = slow(t) / eps;
  if (bounded) g += bounded(t);
  return g;
}

std::vector<double> output_grid(double s, double t_end, int points) {
  if (!(t_end > s) || points < 2) throw InvalidInput("output_grid: need s < t_end");
  std::vector<double> g{s};
  for (int k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / (points - 1);
    if (x > s + 1e-12 && x < t_end - 1e-12) g.push_back(x);
  }
  g.push_back(t_end);
  return g;
}

Propagator::Propagator(std::vector<double> grid, std::vector<Mat> steps,
                       double eps, double tol_step, StepStats stats)
    : grid_(std::move(grid)),
      steps_(std::move(steps)),
      eps_(eps),
      tol_step_(tol_step),
      stats_(stats) {
  if (grid_.empty() || steps_.size() + 1 != grid_.size())
    throw InvalidInput("Propagator: grid/step count mismatch");
  dim_ = grid_.size() > 1 ? steps_.front().rows() : 0;
  cumulative_.reserve(grid_.size());
  cumulative_.push_back(identity(dim_));
  for (const Mat& s : steps_) cumulative_.push_back(left_multiply(s, cumulative_.back()));
}

Propagator Propagator::spectral(std::vector<double> grid, SpectralFrame frame,
                                double eps) {
  Propagator p;
  p.grid_ = std::move(grid);
  p.dim_ = frame.W.rows();
  p.eps_ = eps;
  p.stats_.accepted = static_cast<long>(p.grid_.size()) - 1;
  p.frame_ = std::make_shared<const SpectralFrame>(std::move(frame));
  return p;
}

Mat Propagator::between(std::size_t j, std::size_t i) const {
  if (j >= grid_.size() || i > j) throw InvalidInput("Propagator: bad indices");
  if (frame_) {
    const double tau = grid_[j] - grid_[i];
    Eigen::VectorXcd d(frame_->omega.size());
    for (Eigen::Index q = 0; q < d.size(); ++q)
      d(q) = std::exp(kI * frame_->omega(q) * tau);
    const Mat core = frame_->W * d.asDiagonal() * frame_->W.adjoint();
    return mat_exp(-grid_[j] * frame_->C) * core * mat_exp(grid_[i] * frame_->C);
  }
  if (i == 0) return cumulative_[j];
  Mat r = identity(dim_);
  for (std::size_t k = i; k < j; ++k) r = left_multiply(steps_[k], r);
  return r;
}

Propagator Propagator::with_source(Propagator w, const Mat& C, const Mat& P0) const {
  Propagator p = *this;
  p.source_ = std::make_shared<const FrameSource>(FrameSource{std::move(w), C, P0});
  return p;
}

Mat Propagator::at(std::size_t k) const { return between(k, 0); }

std::size_t Propagator::index_of(double t) const {
  auto it = std::lower_bound(grid_.begin(), grid_.end(), t - 1e-12);
  if (it == grid_.end() || std::abs(*it - t) > 1e-12)
    throw InvalidInput("Propagator: t is not a grid node");
  return static_cast<std::size_t>(it - grid_.begin());
}

Mat cf4_step(const Generator& g, double eps, double t, double h) {
  const double c1 = 0.5 - kSqrt3 / 6.0, c2 = 0.5 + kSqrt3 / 6.0;
  const double a1 = 0.25 + kSqrt3 / 6.0, a2 = 0.25 - kSqrt3 / 6.0;
  const Mat g1 = g.eval(t + c1 * h, eps);
  const Mat g2 = g.eval(t + c2 * h, eps);
  if (!all_finite(g1) || !all_finite(g2))
    throw Divergence("cf4_step: generator is not finite", t);
  // The first factor applied leans on the early node, the second on the late one.
  const Mat first = mat_exp(h * (a1 * g1 + a2 * g2));
  const Mat second = mat_exp(h * (a2 * g1 + a1 * g2));
  return left_multiply(second, first);
}

Propagator propagate(const Generator& g, double eps, double s, double t_end,
                     double tol_step, const PropagateOptions& opt) {
  if (!(eps > 0.0)) throw InvalidInput("propagate: eps must be positive");
  if (!(tol_step > 0.0)) throw InvalidInput("propagate: tol_step must be positive");
  const std::vector<double> grid = output_grid(s, t_end);
  const Eigen::Index n = g.dim;
  const double h_cap = opt.c_phase * eps;
  double h_cur = std::min({eps, 1e-2, h_cap});
  StepStats st;
  st.h_min = std::numeric_limits<double>::infinity();
  double h_sum = 0.0;
  std::vector<Mat> steps;
  steps.reserve(grid.size() - 1);

  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    std::vector<double> stops{grid[k]};
    for (double kink : g.kinks)
      if (kink > grid[k] + 1e-14 && kink < grid[k + 1] - 1e-14) stops.push_back(kink);
    stops.push_back(grid[k + 1]);
    Mat T = identity(n);
    for (std::size_t seg = 0; seg + 1 < stops.size(); ++seg) {
      double t = stops[seg];
      const double b = stops[seg + 1];
      while (b - t > 1e-15) {
        const double h = std::min({h_cur, b - t, h_cap});
        const bool clipped = h < h_cur;
        if (h < opt.h_min && b - t > opt.h_min)
          throw StiffnessFailure("propagate: step size underflow", t, h);
        const Mat full = cf4_step(g, eps, t, h);
        const Mat half = left_multiply(cf4_step(g, eps, t + 0.5 * h, 0.5 * h),
                                       cf4_step(g, eps, t, 0.5 * h));
        if (!all_finite(half) || !all_finite(full))
          throw Divergence("propagate: non-finite step matrix", t);
        const double err =
            (full - half).norm() / (15.0 * std::max(1.0, half.norm()));
        const double fac =
            err == 0.0 ? 2.0
                       : std::clamp(0.9 * std::pow(tol_step / err, 0.2), 0.2, 2.0);
        if (err > tol_step && h <= opt.h_min)
          throw StiffnessFailure("propagate: tolerance not met at the minimum step", t, h);
        if (err <= tol_step) {
          T = left_multiply(half, T);
          if (!all_finite(T)) throw Divergence("propagate: state overflowed", t);
          t += h;
          ++st.accepted;
          st.error_estimate += err;
          st.h_min = std::min(st.h_min, h);
          st.h_max = std::max(st.h_max, h);
          h_sum += h;
          h_cur = clipped ? std::max(h_cur, h * fac) : h * fac;
        } else {
          ++st.rejected;
          h_cur = std::max(h * fac, opt.h_min);
        }
      }
    }
    steps.push_back(std::move(T));
  }
  st.h_mean = st.accepted ? h_sum / st.accepted : 0.0;
  st.error_bound = st.h_mean > 0.0 ? 10.0 * tol_step * (t_end - s) / st.h_mean : 0.0;
  return Propagator(grid, std::move(steps), eps, tol_step, st);
}

Propagator propagate_constant(const Mat& slow, const Mat& bounded, const Mat& C,
                              double eps, double s, double t_end) {
  if (!(eps > 0.0)) throw InvalidInput("propagate_constant: eps must be positive");
  const Mat M = slow / eps + bounded;
  require_operator(M, "propagate_constant");
  std::vector<double> grid = output_grid(s, t_end);
  if (skew(M) && skew(C)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(-kI * M));
    if (es.info() != Eigen::Success)
      throw InvalidInput("propagate_constant: eigensolver failed");
    SpectralFrame f{es.eigenvectors(), es.eigenvalues(), C};
    return Propagator::spectral(std::move(grid), std::move(f), eps);
  }
  std::map<long long, Mat> cache;
  std::vector<Mat> steps;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    const long long key = std::llround(dt * 1e12);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, mat_exp(dt * M)).first;
    steps.push_back(it->second);
  }
  StepStats st;
  st.accepted = static_cast<long>(steps.size());
  return unframe(Propagator(std::move(grid), std::move(steps), eps, 0.0, st), C);
}

Propagator unframe(const Propagator& w, const Mat& C) {
  const auto& grid = w.grid();
  std::vector<Mat> steps;
  steps.reserve(grid.size() - 1);
  Mat r_prev = mat_exp(grid[0] * C);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const Mat rinv_next = mat_exp(-grid[k + 1] * C);
    steps.push_back(matmul(matmul(rinv_next, w.between(k + 1, k)), r_prev));
    r_prev = mat_exp(grid[k + 1] * C);
  }
  return Propagator(grid, std::move(steps), w.eps(), w.tol_step(), w.stats())
      .with_source(w, C, Mat());
}

DysonResult dyson_series(const Propagator& U, const MatFn& B, int N, double tol) {
  if (N < 1) throw InvalidInput("dyson_series: N must be >= 1");
  const auto& grid = U.grid();
  const std::size_t K = grid.size();
  if (K < 3) throw InvalidInput("dyson_series: grid too coarse");
  const double h = grid[1] - grid[0];
  for (std::size_t k = 1; k < K; ++k)
    if (std::abs(grid[k] - grid[k - 1] - h) > 1e-12)
      throw InvalidInput("dyson_series: grid spacing must be uniform");

  std::vector<Mat> u(K), uinv(K), b(K);
  double bsup = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    u[k] = U.at(k);
    uinv[k] = u[k].partialPivLu().inverse();
    b[k] = B(grid[k]);
    bsup = std::max(bsup, op_norm(b[k]));
  }
  // sup over j >= i of ||U(t_j, t_i)|| on a subsample of the grid.
  double usup = 1.0;
  const std::size_t stride = std::max<std::size_t>(1, K / 16);
  for (std::size_t i = 0; i < K; i += stride)
    for (std::size_t j = i; j < K; j += stride)
      usup = std::max(usup, op_norm(u[j] * uinv[i]));

  DysonResult res;
  res.V = u;
  std::vector<Mat> term = u;
  for (int n = 1; n <= N; ++n) {
    std::vector<Mat> y(K);
    for (std::size_t k = 0; k < K; ++k) y[k] = uinv[k] * b[k] * term[k];
    std::vector<Mat> acc(K);
    acc[0] = Mat::Zero(U.dim(), U.dim());
    for (std::size_t k = 1; k < K; ++k) {
      if (k == 1) {
        acc[1] = h / 12.0 * (5.0 * y[0] + 8.0 * y[1] - y[2]);
      } else if (k % 2 == 0) {
        acc[k] = acc[k - 2] + h / 3.0 * (y[k - 2] + 4.0 * y[k - 1] + y[k]);
      } else {
        acc[k] = acc[k - 3] +
                 3.0 * h / 8.0 * (y[k - 3] + 3.0 * y[k - 2] + 3.0 * y[k - 1] + y[k]);
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      term[k] = u[k] * acc[k];
      res.V[k] += term[k];
    }
  }
  const double span = grid.back() - grid.front();
  res.tail_bound = std::pow(bsup * span, N + 1) / std::tgamma(N + 2.0) *
                   std::pow(usup, N + 2);
  res.truncation_warning = res.tail_bound > tol;
  return res;
}

LawResiduals check_evolution_laws(const Propagator& U,
                                  const std::vector<Triple>& samples) {
  LawResiduals r;
  for (const auto& s : samples) {
    if (!(s.r <= s.s && s.s <= s.t)) throw InvalidInput("check_evolution_laws: r <= s <= t");
    const Mat ts = U.between(s.t, s.s), sr = U.between(s.s, s.r), tr = U.between(s.t, s.r);
    r.composition = std::max(r.composition, op_norm(ts * sr - tr));
    r.identity = std::max(r.identity, op_norm(U.between(s.t, s.t) - identity(U.dim())));
  }
  return r;
}

double sup_difference(const Propagator& U, const Propagator& V) {
  if (U.size() != V.size()) throw InvalidInput("sup_difference: grid mismatch");
  double best = 0.0;
  const SpectralFrame* fu = U.frame();
  const SpectralFrame* fv = V.frame();
  if (fu && fv && fu->C.isApprox(fv->C, 0.0) && skew(fu->C)) {
    // Both are e^{-Ct} W e^{i omega t} W^* e^{Cs}; unitary factors drop out.
    const Mat Q = fu->W.adjoint() * fv->W;
    const auto& grid = U.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double tau = grid[k] - grid[0];
      Mat F = Q;
      for (Eigen::Index i = 0; i < F.rows(); ++i)
        F.row(i) *= std::exp(kI * fu->omega(i) * tau);
      for (Eigen::Index j = 0; j < F.cols(); ++j)
        F.col(j) -= Q.col(j) * std::exp(kI * fv->omega(j) * tau);
      best = std::max(best, op_norm(F));
    }
    return best;
  }
  for (std::size_t k = 0; k < U.size(); ++k)
    best = std::max(best, op_norm(U.at(k) - V.at(k)));
  return best;
}

}  // namespace adiab
