// One line per acceptance criterion. Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "adiab/adiabatic.hpp"
#include "adiab/errors.hpp"
#include "adiab/harness.hpp"
#include "adiab/spectral.hpp"
#include "oracles.hpp"

using namespace adiab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slope_str(const SweepReport& r) {
  return r.slope ? num(*r.slope) : std::string("none");
}

std::vector<std::string> gapped_labels() {
  std::vector<std::string> out;
  for (const auto& l : example_labels())
    if (build_standard_example(l).gapped) out.push_back(l);
  return out;
}

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = sweep("ex3-1u", "uv-gap");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = r.failures.empty() && r.slope && *r.slope >= 0.85 && *r.slope <= 1.15 &&
                  secs < 120.0;
  return {ok, "slope=" + slope_str(r) + " runtime=" + num(secs) + "s"};
}

Outcome c2() {
  const auto r = sweep("ex3-1", "uv-gap");
  const bool dec = strictly_decreasing(r.value);
  const bool ok = r.failures.empty() && dec && r.value.back() < 0.25 * r.value.front();
  return {ok, std::string("decreasing=") + (dec ? "yes" : "no") + " first=" +
                  num(r.value.front()) + " last=" + num(r.value.back())};
}

Outcome c3() {
  SweepConfig cfg;
  cfg.params = {{"twist", 0.0}};
  const auto r = sweep("ex3-1u", "transition", cfg);
  double worst = 0.0;
  for (double v : r.value) worst = std::max(worst, std::isfinite(v) ? v : 1e300);
  return {r.failures.empty() && worst <= 1e-7, "max transition=" + num(worst)};
}

Outcome c4() {
  double worst = 0.0;
  std::string where;
  int runs = 0;
  for (const auto& label : gapped_labels()) {
    const StandardExample ex = build_standard_example(label);
    for (double eps : default_eps_grid()) {
      const auto r = adiabatic_evolution(ex.A, ex.P, eps, {}, 1e300);
      const double res = intertwining_residual(r.V, ex.P, 16);
      ++runs;
      if (res >= worst) {
        worst = res;
        where = label + "@" + num(eps);
      }
    }
  }
  // Same quantity with the frame switched off, where |V| stays bounded (the
  // Joye family reaches 1e29 at eps = 2^-12, and only the frame form stays exact).
  double generic = 0.0;
  for (const char* label : {"ex3-1u", "ex-superad"}) {
    const StandardExample ex = build_standard_example(label);
    EvolutionOptions opt;
    opt.use_frame = false;
    for (double eps : default_eps_grid()) {
      const auto r = adiabatic_evolution(ex.A, ex.P, eps, opt, 1e300);
      generic = std::max(generic, intertwining_residual(r.V, ex.P, 16));
    }
  }
  return {worst <= 1e-7 && generic <= 1e-7,
          "max residual=" + num(worst) + " (" + where + ", " + std::to_string(runs) +
              " runs) generic path=" + num(generic)};
}

Outcome c5() {
  const double pi = std::acos(-1.0);
  const double i0 = oracle::gauss_kronrod(
      [pi](double t) { return t * std::cos(2 * pi * t) * std::cos(2 * pi * t); }, 0.0, 0.25,
      1e-15);
  bool ok = std::abs(i0 - oracle::ex33_closed_form()) < 1e-12;
  const StandardExample ex = build_standard_example("ex3-3");
  double min_margin = 1e300, min_tr = 1e300;
  for (double eps : default_eps_grid()) {
    EvolutionOptions opt;
    opt.t_end = 0.25;
    const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, opt);
    const double x = u.at(u.size() - 1)(0, 0).real();
    const double tol = 1e-9 * std::max(1.0, std::abs(x));
    const double margin = x - (1.0 + i0 / eps) + tol;
    min_margin = std::min(min_margin, margin / std::max(1.0, std::abs(x)));
    ok = ok && margin >= 0.0;
    if (eps <= std::ldexp(1.0, -5)) {
      const double tr = transition_amplitude(u, ex.P).out;
      min_tr = std::min(min_tr, tr);
      ok = ok && tr >= 0.1;
    }
  }
  return {ok, "I0=" + num(i0) + " min relative margin=" + num(min_margin) +
                  " min transition(eps<=2^-5)=" + num(min_tr)};
}

Outcome c6() {
  const auto r = sweep("ex-joye", "transition");
  double lo = 1e300;
  for (double v : r.value) lo = std::min(lo, v);
  return {r.failures.empty() && lo >= 0.05, "min transition=" + num(lo)};
}

Outcome c7() {
  bool ok = true;
  std::string d;
  const auto pg = sweep("ex-superad", "p-eps-gap");
  ok = ok && pg.slope && std::abs(*pg.slope - 1.0) <= 0.15;
  d += "p-eps-gap slope=" + slope_str(pg);
  for (int n = 1; n <= 3; ++n) {
    const auto r = sweep("ex-superad", "superad-transition(" + std::to_string(n) + ")");
    ok = ok && r.failures.empty() && r.slope && *r.slope >= n - 0.25;
    d += " n=" + std::to_string(n) + ":" + slope_str(r);
  }
  return {ok, d};
}

Outcome c8() {
  std::vector<SweepReport> reps;
  bool ok = true;
  std::string d;
  for (int dim : {8, 16, 32}) {
    SweepConfig cfg;
    cfg.params = {{"d", double(dim)}};
    reps.push_back(sweep("ex4-5", "uv0-gap", cfg));
    const bool dec = strictly_decreasing(reps.back().value);
    ok = ok && dec && reps.back().failures.empty();
    d += "d=" + std::to_string(dim) + (dec ? " decreasing " : " NOT decreasing ");
  }
  const double drift = drift_across(reps);
  const StandardExample ex = build_standard_example("ex4-5");
  std::vector<double> deltas;
  for (int k = 1; k <= 12; ++k) deltas.push_back(std::ldexp(1.0, -k));
  const RayBound rb = resolvent_ray_bound(ex.A, ex.lambda, ex.theta, ex.P, deltas,
                                          output_grid(0.0, 1.0, 33), ex.P.rank);
  ok = ok && drift <= 0.2 && std::isfinite(rb.M0) && !rb.unbounded;
  return {ok, d + "drift=" + num(drift) + " M0=" + num(rb.M0) +
                  " growth=" + num(rb.growth_exponent)};
}

Outcome c9() {
  std::mt19937_64 rng(90210);
  std::normal_distribution<double> nd;
  double worst = 0.0, uniq = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    const int jb = 1 + (trial / 8) % std::min(n, 3);
    const Mat s = identity(n) + 0.3 * oracle::random_matrix(rng, n) / std::sqrt(double(n));
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      d(i, i) = i < jb ? cplx(0.0) : cplx(1.5 + std::abs(nd(rng)), nd(rng));
    for (int i = 0; i + 1 < jb; ++i) d(i, i + 1) = 1.0;
    const Mat a = s * d * s.inverse();
    const auto w = weakly_associated_projection(a, 0.0);
    const Mat pr = riesz_projection(a, ContourCycle::circle(0.0, 0.5));
    worst = std::max(worst, oracle::spectral_norm(w.P - pr));
    uniq = std::max(uniq, w.uniqueness);
  }
  return {worst <= 1e-8 && uniq <= 1e-8,
          "max |P_weak - P_riesz|=" + num(worst) + " max uniqueness=" + num(uniq)};
}

Outcome c10() {
  const StandardExample ex = build_standard_example("ex3-1u");
  double diff = 0.0;
  for (double eps : {1.0, 0.5, 0.25}) {
    const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, eps);
    const Propagator v = evolve(ex.A, &ex.P, EvolutionKind::Kato, eps);
    const DysonResult dy = dyson_series(u, kato_generator(ex.P), 8);
    for (std::size_t k = 0; k < u.size(); ++k)
      diff = std::max(diff, oracle::spectral_norm(dy.V[k] - v.at(k)));
  }
  double unit = 0.0;
  for (const char* label : {"ex-superad", "ex-holder", "ex4-7-discrete"}) {
    const StandardExample sk = build_standard_example(label);
    for (double eps : {0.125, 1.0 / 512}) {
      const Propagator u = evolve(sk.A, &sk.P, EvolutionKind::Full, eps);
      for (std::size_t k = 0; k < u.size(); k += 8) {
        const Mat x = u.at(k);
        unit = std::max(unit, op_norm(x.adjoint() * x - identity(x.rows())));
      }
    }
  }
  return {diff <= 1e-6 && unit <= 1e-9,
          "Dyson vs propagate=" + num(diff) + " unitarity=" + num(unit)};
}

Outcome c11() {
  double res = 0.0, diff = 0.0;
  for (const auto& label : gapped_labels()) {
    const StandardExample ex = build_standard_example(label);
    for (double t : output_grid(0.0, 1.0, 33)) {
      const Mat a = ex.A.eval(t), p = ex.P.eval(t), dp = ex.P.deriv(t);
      const Mat b = commutator_solution_B(a, ex.lambda.value(t), p, dp, ex.m0);
      res = std::max(res, commutator_residual(b, a, p, dp));
      const Mat bc = commutator_solution_B_contour(
          a, dp, ContourCycle::circle(ex.lambda.value(t), 0.45 * ex.gap));
      diff = std::max(diff, op_norm(b - bc));
    }
  }
  return {res <= 1e-8 && diff <= 1e-8,
          "max residual=" + num(res) + " closed vs contour=" + num(diff)};
}

Outcome c12() {
  bool ok = true;
  std::string d;
  for (int dim : {64, 256}) {
    SweepConfig cfg;
    cfg.params = {{"d", double(dim)}};
    const auto r = sweep("ex-holder", "uv-gap", cfg);
    ok = ok && r.failures.empty() && r.slope && *r.slope >= 0.15;
    d += "d=" + std::to_string(dim) + " slope=" + slope_str(r) + " ";
  }
  return {ok, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"uniform-gap O(eps) rate on ex3-1u", c1},
      {"non-uniform gap o(1) trend on ex3-1", c2},
      {"constant-P family has no transitions", c3},
      {"adiabatic evolution intertwines exactly", c4},
      {"ex3-3 lower bound and transition", c5},
      {"Joye k=-1 transition stays above 0.05", c6},
      {"superadiabatic orders", c7},
      {"gap-free convergence on ex4-5", c8},
      {"weak association equals Riesz projection", c9},
      {"Dyson oracle and unitarity", c10},
      {"commutator solver residual and contour form", c11},
      {"Hoelder-rate bound on the diagonal model", c12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s  %s  [%s] (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures;
}
