#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adiab/operator_core.hpp"

namespace adiab {

using MatFn = std::function<Mat(double)>;
using Params = std::map<std::string, double>;

// Complex-valued curve t -> value with the points where it is only C^0.
struct Curve {
  std::function<cplx(double)> value;
  std::vector<double> kinks;
};

struct FamilyMeta {
  std::string label;
  std::optional<Curve> lambda;
  std::function<double(double)> alpha;  // nilpotent scale, may be empty
  std::optional<Mat> twist;             // C in A = e^{-Ct} A0 e^{Ct}
  MatFn base;                           // A0(t), may be empty
  MatFn base_deriv;
  bool base_constant = false;
};

struct OperatorFamily {
  Eigen::Index dim = 0;
  MatFn eval;
  MatFn deriv;  // empty when only numeric differentiation is available
  // Evaluation domain. Usually [0,1]; analytic examples allow a margin so
  // difference stencils stay two-sided at the ends.
  double lo = 0.0, hi = 1.0;
  std::vector<double> kinks;
  FamilyMeta meta;
};

enum class Provenance { AnalyticSimilarity, NumericDiff, RieszPath };
const char* to_string(Provenance p);

struct ProjectionFamily {
  Eigen::Index dim = 0;
  int rank = 0;
  MatFn eval;
  MatFn deriv;
  Provenance provenance = Provenance::AnalyticSimilarity;
};

struct Derivative {
  Mat value;
  bool one_sided = false;
};

// Richardson-extrapolated central difference (error O(h^4)). Falls back to a
// second-order one-sided stencil when t -/+ 2h leaves [lo, hi].
Derivative family_derivative(const MatFn& f, double t, double h, double lo,
                             double hi);
Derivative family_derivative(const OperatorFamily& f, double t, double h = 1e-3);

struct M0Stability {
  bool stable = false;
  double r0 = 0.0;
};

M0Stability check_m0_stability(const Curve& lambda,
                               const std::function<double(double)>& alpha,
                               const std::vector<double>& grid);

// Everything the registry knows about one example instance.
struct StandardExample {
  std::string label;
  Params params;
  OperatorFamily A;
  ProjectionFamily P;
  Curve lambda;
  std::function<double(double)> theta;  // ray direction for the gap-free tests
  Mat C;                                // twist generator (zero when absent)
  Mat P0;
  int m0 = 1;          // nilpotence order of (A - lambda) on range P
  bool gapped = false;
  double gap = 0.0;    // lower bound of dist(lambda, rest of spectrum) when gapped
  double horizon = 1.0;
  std::string truncation_key;  // empty for genuinely finite models
  int trunc_dim = 0;
  std::vector<int> registered_dims;  // the three dims used for drift checks
};

std::vector<std::string> example_labels();

// Label plus key=value parameters. Unknown labels throw UnknownExample.
StandardExample build_standard_example(const std::string& label,
                                       const Params& params = {});

// Parses "k=v" strings into Params (values are numbers).
Params parse_params(const std::vector<std::string>& kv);

// Build a similarity family A = e^{-Ct} A0(t) e^{Ct} with P = e^{-Ct} P0 e^{Ct}.
void attach_similarity(StandardExample& ex, Eigen::Index dim, MatFn A0,
                       MatFn A0_deriv, bool A0_constant, const Mat& C,
                       const Mat& P0, std::vector<double> kinks);

struct ContourCycle;
using ContourPath = std::function<ContourCycle(double)>;

// Riesz projections along t with numeric derivative. Enclosure is certified
// on the grid; a failed certificate throws GapViolation(t).
ProjectionFamily projection_family_from_path(const OperatorFamily& a,
                                             const ContourPath& cycle,
                                             const std::vector<double>& grid,
                                             double h = 1e-4);

}  // namespace adiab
