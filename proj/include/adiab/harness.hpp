#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "adiab/adiabatic.hpp"
#include "adiab/families.hpp"

namespace adiab {

inline constexpr int kSchemaVersion = 1;

struct MetricSpec {
  std::string name;  // uv-gap, uv0-gap, transition, superad-transition, k-telescope, p-eps-gap
  int n = 0;         // level for the superadiabatic metrics
  std::string str() const;
};

// Accepts "superad-transition(2)" or "superad-transition:2".
MetricSpec parse_metric(const std::string& s);

// "2^-3:2^-12" -> {2^-3, 2^-4, ..., 2^-12}; a single "2^-5" or a plain
// comma-separated list of numbers also works.
std::vector<double> parse_eps_grid(const std::string& s);
std::vector<double> default_eps_grid();

struct SweepConfig {
  Params params;
  std::vector<double> eps = default_eps_grid();
  int threads = 0;  // 0: ADIAB_THREADS or hardware concurrency
};

struct SweepReport {
  std::string example;
  Params params;
  std::string metric;
  std::vector<double> eps;
  std::vector<double> value;
  std::vector<bool> excluded;
  std::vector<double> error_floor;
  std::vector<double> tol_step;
  std::optional<double> slope;
  std::optional<double> stderr_slope;
  std::vector<int> dims;
  std::map<std::string, double> tolerances;
  std::vector<double> wallclock_ms;
  std::vector<std::pair<double, std::string>> failures;

  nlohmann::json to_json(bool with_wallclock = true) const;
  std::string to_csv() const;
};

struct PointValue {
  double value = 0.0;
  double error_floor = 0.0;  // estimated global integrator error
  double tol_step = 0.0;
};

// One metric evaluation. tol_step < 0 selects min(1e-10, 1e-3 * expected).
PointValue metric_value(const StandardExample& ex, const MetricSpec& m, double eps,
                        double tol_step = -1.0);

SweepReport sweep(const std::string& example, const std::string& metric,
                  const SweepConfig& cfg = {});

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  int used = 0;
};

// Least squares on (log eps, log value) over unexcluded points.
RateFit fit_rate(const SweepReport& report);

// Worker count: ADIAB_THREADS caps it.
int worker_count(int requested = 0);

bool strictly_decreasing(const std::vector<double>& v);
// max over eps of (max_d - min_d) / max_d
double drift_across(const std::vector<SweepReport>& reports);

struct ExampleReport {
  std::string label;
  std::string verdict;
  bool pass = false;
  nlohmann::json evidence;
  nlohmann::json to_json() const;
};

struct RunConfig {
  Params params;
  std::optional<std::vector<double>> eps;  // per-example default otherwise
  int threads = 0;
};

ExampleReport run_example(const std::string& label, const RunConfig& cfg = {});

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Suites: invariants, gallery, rates.
std::vector<CheckResult> run_suite(const std::string& suite);

// Int_0^{t0} lambda(tau) cos^2(2 pi tau) d tau for ex3-3, by adaptive Simpson.
double ex33_integral(double slope, double t0);

}  // namespace adiab
