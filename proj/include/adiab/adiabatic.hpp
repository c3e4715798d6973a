#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "adiab/evolution.hpp"
#include "adiab/families.hpp"
#include "adiab/spectral.hpp"

namespace adiab {

// K(t) = [P'(t), P(t)]
MatFn kato_generator(const ProjectionFamily& p);

enum class EvolutionKind {
  Full,       // (1/eps) A
  Kato,       // (1/eps) A + [P', P]
  Projected,  // (1/eps) A P + [P', P]
};

struct EvolutionOptions {
  double tol_step = 1e-10;
  double t_end = 1.0;
  // Integrate similarity families in the rotating frame y = e^{Ct} x.
  bool use_frame = true;
};

// Picks the frame path when A carries twist/base metadata and P is the
// analytic similarity projection; otherwise integrates G(t) directly.
Propagator evolve(const OperatorFamily& a, const ProjectionFamily* p,
                  EvolutionKind kind, double eps, const EvolutionOptions& opt = {});

// max over the sampled (t, s) of ||P(t) V(t,s) - V(t,s) P(s)||; s runs over
// every stride-th grid node.
double intertwining_residual(const Propagator& v, const ProjectionFamily& p,
                             std::size_t stride = 64);

struct AdiabaticEvolution {
  Propagator V;
  double intertwining = 0.0;
};

AdiabaticEvolution adiabatic_evolution(const OperatorFamily& a,
                                       const ProjectionFamily& p, double eps,
                                       const EvolutionOptions& opt = {},
                                       double threshold = 1e-7);

struct ProjectedEvolution {
  Propagator V0;
  double kernel_residual = 0.0;  // max ||(A - lambda)^{m0} P|| on the grid
  double sup_norm = 0.0;         // sup_t ||V0(t,0) P(0)||
  double bound_constant = 0.0;   // smallest Mc >= 1 with sup <= Mc e^{Mc t}
};

ProjectedEvolution projected_evolution(const OperatorFamily& a,
                                       const ProjectionFamily& p,
                                       const Curve& lambda, int m0, double eps,
                                       const EvolutionOptions& opt = {});

// Closed form through the reduced resolvent. Throws GapViolation when lambda
// meets the spectrum of A on range(1 - P).
Mat commutator_solution_B(const Mat& a, cplx lambda, const Mat& p,
                          const Mat& p_deriv, int m0);

// (1/2 pi i) sum_k w_k (z_k - A)^{-1} P' (z_k - A)^{-1}, nodes doubled until
// successive sums agree to tol.
Mat commutator_solution_B_contour(const Mat& a, const Mat& p_deriv,
                                  const ContourCycle& cycle, double tol = 1e-12);

double commutator_residual(const Mat& b, const Mat& a, const Mat& p,
                           const Mat& p_deriv);

// Iterated projections A_n = A - eps K_{n-1}, P_n = Riesz path of A_n,
// K_n = [P_n', P_n]. Level 0 is the plain Riesz path of A.
class SuperadiabaticState {
 public:
  SuperadiabaticState(OperatorFamily a, ContourPath cycle, double eps, int level,
                      int nodes, int rank, double h);

  int level() const { return level_; }
  double eps() const { return eps_; }
  int rank() const { return rank_; }

  Mat P(int j, double t) const;
  Mat K(int j, double t) const;
  Mat A(int j, double t) const;
  ProjectionFamily projection(int j) const;

  // sup over the grid of ||K_j - K_{j-1}||, j = 1..level. Certifies every
  // level on the way; throws IterationBreakdown.
  std::vector<double> telescoping(const std::vector<double>& grid) const;

 private:
  struct Memo;
  Mat p_at(Memo& memo, int j, double t, int off) const;
  Mat k_at(Memo& memo, int j, double t, int off) const;

  OperatorFamily a_;
  ContourPath cycle_;
  double eps_;
  int level_;
  int nodes_;
  int rank_;
  double h_;
};

SuperadiabaticState superadiabatic_iterate(const OperatorFamily& a,
                                           const ContourPath& cycle, double eps,
                                           int n, double h = 1e-4);

struct Transition {
  double out = 0.0;  // sup_t ||(1 - P(t)) U(t) P(0)||
  double in = 0.0;   // sup_t ||P(t) U(t) (1 - P(0))||
};

Transition transition_amplitude(const Propagator& u, const MatFn& p);
Transition transition_amplitude(const Propagator& u, const ProjectionFamily& p);

}  // namespace adiab
