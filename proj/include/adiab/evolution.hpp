#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "adiab/families.hpp"
#include "adiab/operator_core.hpp"

namespace adiab {

// G(t) = slow(t) / eps + bounded(t).
struct Generator {
  Eigen::Index dim = 0;
  MatFn slow;
  MatFn bounded;  // may be empty
  std::vector<double> kinks;

  Mat eval(double t, double eps) const;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  double h_mean = 0.0;
  double error_estimate = 0.0;  // sum of accepted local error estimates
  double error_bound = 0.0;     // 10 * tol * (t_end - s) / h_mean
};

// Exact evolution of a constant skew-Hermitian frame generator,
// U(t,s) = e^{-Ct} W e^{i omega (t-s)} W^* e^{Cs}.
struct SpectralFrame {
  Mat W;
  Eigen::VectorXd omega;
  Mat C;
};

struct FrameSource;

class Propagator {
 public:
  Propagator() = default;
  Propagator(std::vector<double> grid, std::vector<Mat> steps, double eps,
             double tol_step, StepStats stats);
  static Propagator spectral(std::vector<double> grid, SpectralFrame frame,
                             double eps);

  const std::vector<double>& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  Eigen::Index dim() const { return dim_; }
  double eps() const { return eps_; }
  double tol_step() const { return tol_step_; }
  const StepStats& stats() const { return stats_; }
  const SpectralFrame* frame() const { return frame_.get(); }
  // Set when this propagator was mapped back from the rotating frame.
  const FrameSource* source() const { return source_.get(); }
  Propagator with_source(Propagator w, const Mat& C, const Mat& P0) const;

  // U(t_k, t_0)
  Mat at(std::size_t k) const;
  // U(t_j, t_i), j >= i
  Mat between(std::size_t j, std::size_t i) const;
  // Index of a grid node (throws InvalidInput if t is not one).
  std::size_t index_of(double t) const;

 private:
  std::vector<double> grid_;
  std::vector<Mat> steps_;
  std::vector<Mat> cumulative_;
  std::shared_ptr<const SpectralFrame> frame_;
  std::shared_ptr<const FrameSource> source_;
  Eigen::Index dim_ = 0;
  double eps_ = 0.0;
  double tol_step_ = 0.0;
  StepStats stats_;
};

// U(t,s) = e^{-Ct} W(t,s) e^{Cs}; P0 is the frame projection (may be empty).
struct FrameSource {
  Propagator W;
  Mat C;
  Mat P0;
};

// Nodes k/256 inside [s, t_end] plus both end points.
std::vector<double> output_grid(double s = 0.0, double t_end = 1.0, int points = 257);

struct PropagateOptions {
  double c_phase = 1.0;
  double h_min = 1e-12;
};

// One commutator-free fourth-order step from t to t + h.
Mat cf4_step(const Generator& g, double eps, double t, double h);

// Adaptive integration of x' = G(t) x, recorded on output_grid(s, t_end).
Propagator propagate(const Generator& g, double eps, double s, double t_end,
                     double tol_step, const PropagateOptions& opt = {});

// Constant generator M = slow / eps + bounded seen in the frame e^{Ct}:
// U(t,s) = e^{-Ct} e^{(t-s) M} e^{Cs}. Uses a spectral representation when
// M and C are skew-Hermitian.
Propagator propagate_constant(const Mat& slow, const Mat& bounded, const Mat& C,
                              double eps, double s, double t_end);

// Maps W, computed in the frame y = e^{Ct} x, back to U = e^{-Ct} W e^{Cs}.
Propagator unframe(const Propagator& w, const Mat& C);

struct DysonResult {
  std::vector<Mat> V;  // V(t_k, t_0) on the propagator grid
  double tail_bound = 0.0;
  bool truncation_warning = false;
};

// Partial sum of the Dyson series for A + B around the propagator U of A,
// nested integrals by composite Simpson on U's grid (uniform spacing needed).
DysonResult dyson_series(const Propagator& U, const MatFn& B, int N,
                         double tol = 1e-6);

struct LawResiduals {
  double composition = 0.0;
  double identity = 0.0;
};

struct Triple {
  std::size_t r, s, t;  // grid indices, r <= s <= t
};

LawResiduals check_evolution_laws(const Propagator& U,
                                  const std::vector<Triple>& samples);

// sup_k ||U(t_k) - V(t_k)|| with a fast path for two spectral propagators.
double sup_difference(const Propagator& U, const Propagator& V);

}  // namespace adiab
