#pragma once

#include <limits>
#include <string>
#include <vector>

#include "adiab/families.hpp"
#include "adiab/operator_core.hpp"

namespace adiab {

// Closed curve discretized by the trapezoidal rule. Weights carry dz, so a
// contour integral is sum_k w_k f(z_k).
struct ContourCycle {
  enum class Shape { Circle, Ellipse };

  Shape shape = Shape::Circle;
  cplx center{0.0, 0.0};
  cplx focus_a{0.0, 0.0}, focus_b{0.0, 0.0};  // ellipse only
  double radius = 0.0;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
  std::string enclosed;
  double certificate = std::numeric_limits<double>::quiet_NaN();

  static ContourCycle circle(cplx c, double r, int n = 32);
  // Smooth curve around the segment [a, b] keeping distance about r from it.
  static ContourCycle ellipse(cplx a, cplx b, double r, int n = 32);

  ContourCycle refined(int n) const;
  int size() const { return static_cast<int>(nodes.size()); }
  // Winding number around w from the quadrature itself.
  double winding(cplx w) const;
};

struct Certificate {
  double min_distance = 0.0;
  int enclosed_count = 0;  // eigenvalues counted with multiplicity
  bool ok = false;
};

// Fills cycle.certificate. ok requires positive distance and winding numbers
// within 0.1 of 0 or 1 for every eigenvalue.
Certificate certify(ContourCycle& cycle, const Mat& a);

struct RieszResult {
  Mat P;
  int nodes = 0;
  double idempotency = 0.0;
  double commutation = 0.0;
};

// Doubles the node count from cycle.size() until ||P^2 - P|| <= tol.
RieszResult riesz_projection_detailed(const Mat& a, const ContourCycle& cycle,
                                      double tol = 1e-10, int cap = 1 << 14);
Mat riesz_projection(const Mat& a, const ContourCycle& cycle);

// Single quadrature pass on the given nodes, no refinement.
Mat riesz_sum(const Mat& a, const ContourCycle& cycle);

struct WeakAssociation {
  Mat P;
  cplx lambda;
  int m = 0;
  struct {
    double idempotency = 0.0;
    double commutation = 0.0;
    double nilpotency = 0.0;
    double injectivity_margin = 0.0;
  } residuals;
  double condition = 0.0;   // of the [K | R] basis
  double uniqueness = 0.0;  // ||P_kernel_first - P_range_first||
};

WeakAssociation weakly_associated_projection(const Mat& a, cplx lambda,
                                             double tol = 1e-9);

enum class GapClass { Uniform, NonUniform, Gapless };
const char* to_string(GapClass c);

struct GapReport {
  double min_gap = 0.0;
  std::vector<double> crossings;
  GapClass classification = GapClass::Uniform;
  std::vector<double> gaps;  // per grid node
};

// multiplicity = number of eigenvalues attached to lambda(t) (rank of P).
GapReport gap_analysis(const OperatorFamily& a, const Curve& lambda,
                       const std::vector<double>& grid, int multiplicity = 1,
                       double tol_gap = 1e-6);

struct RayBound {
  double M0 = 0.0;
  std::vector<double> deltas;     // ascending
  std::vector<double> per_delta;  // sup over t for each delta
  double growth_exponent = 0.0;   // fitted -d log(sup)/d log(delta) at small delta
  bool unbounded = false;
};

RayBound resolvent_ray_bound(const OperatorFamily& a, const Curve& lambda,
                             const std::function<double(double)>& theta,
                             const ProjectionFamily& p,
                             std::vector<double> deltas,
                             const std::vector<double>& grid,
                             int multiplicity = 1);

std::vector<cplx> eigenvalues(const Mat& a);

}  // namespace adiab
