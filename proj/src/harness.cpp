#include "adiab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace adiab {

using nlohmann::json;

namespace {

constexpr double kSaturation = 50.0;
constexpr double kTolCap = 1e-10;
constexpr double kTolFloor = 1e-14;
constexpr double kRoundoffFloor = 1e-14;

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

ContourPath circle_path(const StandardExample& ex) {
  const Curve lam = ex.lambda;
  const double r = 0.45 * ex.gap;
  return [lam, r](double t) { return ContourCycle::circle(lam.value(t), r); };
}

json params_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

}  // namespace

std::string MetricSpec::str() const {
  if (name == "superad-transition" || name == "k-telescope" ||
      (name == "p-eps-gap" && n != 1))
    return name + "(" + std::to_string(n) + ")";
  return name;
}

MetricSpec parse_metric(const std::string& s) {
  MetricSpec m;
  std::string base = s;
  std::string arg;
  const auto open = s.find('(');
  const auto colon = s.find(':');
  if (open != std::string::npos) {
    if (s.back() != ')') throw InvalidInput("metric '" + s + "': missing ')'");
    base = s.substr(0, open);
    arg = s.substr(open + 1, s.size() - open - 2);
  } else if (colon != std::string::npos) {
    base = s.substr(0, colon);
    arg = s.substr(colon + 1);
  }
  static const std::vector<std::string> known{"uv-gap", "uv0-gap", "transition",
                                              "superad-transition", "k-telescope",
                                              "p-eps-gap"};
  if (std::find(known.begin(), known.end(), base) == known.end())
    throw InvalidInput("unknown metric '" + s + "'");
  m.name = base;
  const bool leveled = base == "superad-transition" || base == "k-telescope" ||
                       base == "p-eps-gap";
  if (!arg.empty()) {
    if (!leveled) throw InvalidInput("metric '" + base + "' takes no level");
    try {
      std::size_t used = 0;
      m.n = std::stoi(arg, &used);
      if (used != arg.size()) throw InvalidInput("bad level");
    } catch (const std::exception&) {
      throw InvalidInput("metric '" + s + "': level must be an integer");
    }
  } else if (leveled) {
    m.n = 1;
  }
  if (leveled && m.n < 1) throw InvalidInput("metric level must be >= 1");
  return m;
}

namespace {

double parse_number(const std::string& s) {
  const auto caret = s.find('^');
  std::size_t used = 0;
  if (caret != std::string::npos) {
    const std::string b = s.substr(0, caret), e = s.substr(caret + 1);
    const double base = std::stod(b, &used);
    if (used != b.size()) throw InvalidInput("bad number '" + s + "'");
    const double ex = std::stod(e, &used);
    if (used != e.size()) throw InvalidInput("bad number '" + s + "'");
    return std::pow(base, ex);
  }
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InvalidInput("bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_eps_grid(const std::string& s) {
  std::vector<double> out;
  try {
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const double a = parse_number(s.substr(0, colon));
      const double b = parse_number(s.substr(colon + 1));
      if (!(a > 0 && b > 0)) throw InvalidInput("eps must be positive");
      const double hi = std::max(a, b), lo = std::min(a, b);
      for (double e = hi; e >= lo * (1 - 1e-12); e /= 2) out.push_back(e);
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
    }
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse eps grid '" + s + "'");
  }
  if (out.empty()) throw InvalidInput("empty eps grid");
  for (double e : out)
    if (!(e > 0)) throw InvalidInput("eps must be positive");
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> default_eps_grid() { return parse_eps_grid("2^-3:2^-12"); }

int worker_count(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("ADIAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

PointValue metric_value(const StandardExample& ex, const MetricSpec& m, double eps,
                        double tol_step) {
  if (!(eps > 0.0)) throw InvalidInput("metric_value: eps must be positive");
  double expected = 1.0;
  if (m.name == "uv-gap" || m.name == "uv0-gap") {
    expected = ex.gapped ? eps : std::sqrt(eps);
  } else if (m.name == "transition") {
    expected = eps;
  } else if (m.name == "superad-transition") {
    expected = std::pow(eps, m.n + 1);
  }
  PointValue pv;
  pv.tol_step = tol_step > 0.0 ? tol_step : std::clamp(1e-3 * expected, kTolFloor, kTolCap);
  EvolutionOptions opt;
  opt.tol_step = pv.tol_step;
  opt.t_end = ex.horizon;

  auto floor_of = [](const Propagator& p) {
    return std::max(p.stats().error_estimate, kRoundoffFloor);
  };

  if (m.name == "uv-gap") {
    const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, opt);
    const Propagator V = evolve(ex.A, &ex.P, EvolutionKind::Kato, eps, opt);
    pv.value = sup_difference(U, V);
    pv.error_floor = std::max(floor_of(U), floor_of(V));
  } else if (m.name == "uv0-gap") {
    const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, opt);
    const Propagator V0 = evolve(ex.A, &ex.P, EvolutionKind::Projected, eps, opt);
    const Mat p0 = ex.P.eval(0.0);
    for (std::size_t k = 0; k < U.size(); ++k)
      pv.value = std::max(pv.value, op_norm((U.at(k) - V0.at(k)) * p0));
    pv.error_floor = std::max(floor_of(U), floor_of(V0));
  } else if (m.name == "transition") {
    const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, opt);
    pv.value = transition_amplitude(U, ex.P).out;
    pv.error_floor = floor_of(U);
  } else {
    if (!ex.gapped)
      throw InvalidInput(m.name + " needs a gapped example");
    const auto state = superadiabatic_iterate(ex.A, circle_path(ex), eps, m.n);
    const auto grid = output_grid(0.0, ex.horizon);
    if (m.name == "k-telescope") {
      pv.value = state.telescoping(grid).back();
    } else if (m.name == "p-eps-gap") {
      for (double t : grid)
        pv.value = std::max(pv.value, op_norm(state.P(m.n, t) - ex.P.eval(t)));
    } else {
      const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, opt);
      pv.value = transition_amplitude(U, state.projection(m.n)).out;
      pv.error_floor = floor_of(U);
    }
  }
  if (!std::isfinite(pv.value) || pv.value < 0.0)
    throw Divergence("metric_value: non-finite metric", 0.0);
  return pv;
}

SweepReport sweep(const std::string& example, const std::string& metric,
                  const SweepConfig& cfg) {
  const StandardExample ex = build_standard_example(example, cfg.params);
  const MetricSpec m = parse_metric(metric);
  SweepReport rep;
  rep.example = example;
  rep.params = cfg.params;
  rep.metric = m.str();
  rep.eps = cfg.eps;
  std::sort(rep.eps.begin(), rep.eps.end(), std::greater<>());
  const std::size_t n = rep.eps.size();
  rep.value.assign(n, std::numeric_limits<double>::quiet_NaN());
  rep.excluded.assign(n, true);
  rep.error_floor.assign(n, 0.0);
  rep.tol_step.assign(n, 0.0);
  rep.wallclock_ms.assign(n, 0.0);
  if (ex.trunc_dim > 0) rep.dims = {ex.trunc_dim};
  std::vector<std::string> errors(n);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      const double t0 = now_ms();
      try {
        const PointValue pv = metric_value(ex, m, rep.eps[i]);
        rep.value[i] = pv.value;
        rep.error_floor[i] = pv.error_floor;
        rep.tol_step[i] = pv.tol_step;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      rep.wallclock_ms[i] = now_ms() - t0;
    }
  };
  const int workers = std::min<int>(worker_count(cfg.threads), static_cast<int>(n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      rep.failures.emplace_back(rep.eps[i], errors[i]);
      continue;
    }
    rep.excluded[i] = rep.value[i] < kSaturation * rep.error_floor[i];
  }
  rep.tolerances = {{"tol_step_cap", kTolCap},
                    {"tol_step_floor", kTolFloor},
                    {"saturation_factor", kSaturation},
                    {"roundoff_floor", kRoundoffFloor},
                    {"c_phase", 1.0}};
  try {
    const RateFit f = fit_rate(rep);
    rep.slope = f.slope;
    rep.stderr_slope = f.stderr_slope;
  } catch (const FitRejected&) {
  }
  return rep;
}

RateFit fit_rate(const SweepReport& r) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    if (i < r.excluded.size() && r.excluded[i]) continue;
    const double v = r.value[i];
    if (!std::isfinite(v) || v <= 0.0 || !(r.eps[i] > 0.0))
      throw FitRejected("fit_rate: non-finite or non-positive value at eps=" +
                        std::to_string(r.eps[i]));
    x.push_back(std::log(r.eps[i]));
    y.push_back(std::log(v));
  }
  if (x.size() < 4)
    throw FitRejected("fit_rate: only " + std::to_string(x.size()) +
                      " unsaturated points (need 4)");
  // Order by decreasing eps and require a one-directional trend (5% slack).
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] > x[b]; });
  const double slack = std::log(1.05);
  bool down = true, up = true;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    const double d = y[idx[i]] - y[idx[i - 1]];
    if (d > slack) down = false;
    if (d < -slack) up = false;
  }
  if (!down && !up) throw FitRejected("fit_rate: metric is not monotone in eps");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitRejected("fit_rate: degenerate eps grid");
  RateFit f;
  f.slope = sxy / sxx;
  const double icpt = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (icpt + f.slope * x[i]);
    ssr += e * e;
  }
  f.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  f.used = static_cast<int>(x.size());
  return f;
}

json SweepReport::to_json(bool with_wallclock) const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["example"] = example;
  j["params"] = params_json(params);
  j["metric"] = metric;
  j["eps"] = eps;
  json vals = json::array();
  for (double v : value) vals.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  j["value"] = vals;
  j["slope"] = slope ? json(*slope) : json(nullptr);
  j["stderr"] = stderr_slope ? json(*stderr_slope) : json(nullptr);
  j["excluded"] = excluded;
  j["dims"] = dims;
  json tol = json::object();
  for (const auto& [k, v] : tolerances) tol[k] = v;
  tol["tol_step"] = tol_step;
  tol["error_floor"] = error_floor;
  j["tolerances"] = tol;
  j["wallclock_ms"] = with_wallclock ? json(wallclock_ms) : json::array();
  if (!failures.empty()) {
    json f = json::array();
    for (const auto& [e, what] : failures) f.push_back({{"eps", e}, {"error", what}});
    j["failures"] = f;
  }
  return j;
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "eps,value\n";
  for (std::size_t i = 0; i < eps.size(); ++i) os << eps[i] << ',' << value[i] << '\n';
  return os.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return !v.empty();
}

double drift_across(const std::vector<SweepReport>& reports) {
  if (reports.empty()) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < reports.front().value.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : reports) {
      lo = std::min(lo, r.value[i]);
      hi = std::max(hi, r.value[i]);
    }
    if (hi > 0.0) worst = std::max(worst, (hi - lo) / hi);
  }
  return worst;
}

json ExampleReport::to_json() const {
  return json{{"schema_version", kSchemaVersion},
              {"example", label},
              {"verdict", verdict},
              {"pass", pass},
              {"evidence", evidence}};
}

namespace {

double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

std::vector<double> eps_or(const RunConfig& cfg, const std::string& spec) {
  return cfg.eps ? *cfg.eps : parse_eps_grid(spec);
}

SweepReport sweep_with(const std::string& label, const std::string& metric,
                       const RunConfig& cfg, const std::vector<double>& eps,
                       const Params& extra = {}) {
  SweepConfig sc;
  sc.params = cfg.params;
  for (const auto& [k, v] : extra) sc.params[k] = v;
  sc.eps = eps;
  sc.threads = cfg.threads;
  return sweep(label, metric, sc);
}

json slope_json(const SweepReport& r) {
  return r.slope ? json(*r.slope) : json(nullptr);
}

bool all_ok(const SweepReport& r) { return r.failures.empty(); }

// Runs one sweep per registered truncation size.
std::vector<SweepReport> sweep_dims(const std::string& label, const std::string& metric,
                                    const RunConfig& cfg, const std::vector<double>& eps) {
  const StandardExample ex = build_standard_example(label, cfg.params);
  std::vector<SweepReport> out;
  for (int d : ex.registered_dims)
    out.push_back(sweep_with(label, metric, cfg, eps, {{ex.truncation_key, double(d)}}));
  return out;
}

ExampleReport gap_free_example(const std::string& label, const RunConfig& cfg,
                               const std::string& spec, bool contraction) {
  ExampleReport rep{label, "", false, json::object()};
  const auto eps = eps_or(cfg, spec);
  const auto reports = sweep_dims(label, "uv0-gap", cfg, eps);
  bool decreasing = true, ok = true;
  json sweeps = json::array();
  for (const auto& r : reports) {
    decreasing = decreasing && strictly_decreasing(r.value);
    ok = ok && all_ok(r);
    sweeps.push_back(r.to_json());
  }
  const double drift = drift_across(reports);
  const StandardExample ex = build_standard_example(label, cfg.params);
  std::vector<double> deltas;
  for (int k = 1; k <= 10; ++k) deltas.push_back(std::ldexp(1.0, -k));
  const RayBound rb = resolvent_ray_bound(ex.A, ex.lambda, ex.theta, ex.P, deltas,
                                          output_grid(0.0, 1.0, 33), ex.P.rank);
  const bool ray_ok = std::isfinite(rb.M0) && !rb.unbounded &&
                      (!contraction || rb.M0 <= 1.0 + 1e-9);
  rep.evidence = {{"sweeps", sweeps},
                  {"drift", drift},
                  {"decreasing", decreasing},
                  {"ray_M0", rb.M0},
                  {"ray_growth_exponent", rb.growth_exponent},
                  {"ray_unbounded", rb.unbounded}};
  rep.pass = ok && decreasing && drift <= 0.2 && ray_ok;
  rep.verdict = rep.pass ? "gap-free convergence confirmed"
                         : "gap-free convergence not confirmed";
  return rep;
}

}  // namespace

double ex33_integral(double slope, double t0) {
  auto f = [slope](double t) {
    const double c = std::cos(2.0 * kPi * t);
    return slope * t * c * c;
  };
  const double fa = f(0.0), fb = f(t0), fm = f(0.5 * t0);
  const double whole = t0 / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_adaptive(f, 0.0, t0, fa, fm, fb, whole, 1e-14, 40);
}

ExampleReport run_example(const std::string& label, const RunConfig& cfg) {
  build_standard_example(label, cfg.params);  // validates label and params
  ExampleReport rep{label, "", false, json::object()};

  if (label == "ex3-1u") {
    const auto r = sweep_with(label, "uv-gap", cfg, eps_or(cfg, "2^-3:2^-12"));
    const bool ok = all_ok(r) && r.slope && *r.slope >= 0.85 && *r.slope <= 1.15 &&
                    strictly_decreasing(r.value);
    rep.evidence = {{"sweep", r.to_json()}, {"slope", slope_json(r)}};
    rep.pass = ok;
    rep.verdict = ok ? "O(eps) confirmed" : "O(eps) not confirmed";
  } else if (label == "ex3-1") {
    const auto r = sweep_with(label, "uv-gap", cfg, eps_or(cfg, "2^-3:2^-12"));
    const bool ok = all_ok(r) && strictly_decreasing(r.value) &&
                    r.value.back() < 0.25 * r.value.front();
    rep.evidence = {{"sweep", r.to_json()}, {"slope", slope_json(r)}};
    rep.pass = ok;
    rep.verdict = ok ? "o(1) trend confirmed" : "o(1) trend not confirmed";
  } else if (label == "ex3-2") {
    const auto reports = sweep_dims(label, "uv-gap", cfg, eps_or(cfg, "2^-3:2^-8"));
    bool ok = true;
    json sweeps = json::array();
    for (const auto& r : reports) {
      ok = ok && all_ok(r) && strictly_decreasing(r.value);
      sweeps.push_back(r.to_json());
    }
    const double drift = drift_across(reports);
    const bool stable = drift <= 0.2;
    rep.evidence = {{"sweeps", sweeps}, {"drift", drift}, {"trend_per_dim", ok}};
    rep.pass = ok && stable;
    rep.verdict = rep.pass ? "o(1) trend confirmed"
                  : ok     ? "o(1) trend per dimension, but drift across d exceeds 20%"
                           : "o(1) trend not confirmed";
  } else if (label == "ex3-3") {
    const StandardExample ex = build_standard_example(label, cfg.params);
    const double slope = ex.params.count("lam") ? ex.params.at("lam") : 1.0;
    const double i0 = ex33_integral(slope, ex.horizon);
    const auto eps = eps_or(cfg, "2^-3:2^-12");
    json rows = json::array();
    bool ok = true;
    for (double e : eps) {
      EvolutionOptions opt;
      opt.t_end = ex.horizon;
      const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, e, opt);
      const double x = U.at(U.size() - 1)(0, 0).real();
      const double bound = 1.0 + i0 / e;
      const double tr = transition_amplitude(U, ex.P).out;
      const bool row_ok = x >= bound - 1e-9 * std::abs(x) &&
                          (e > std::ldexp(1.0, -5) || tr >= 0.1);
      ok = ok && row_ok;
      rows.push_back({{"eps", e}, {"e1_U_e1", x}, {"lower_bound", bound},
                      {"transition", tr}, {"ok", row_ok}});
    }
    rep.evidence = {{"I0", i0}, {"rows", rows}};
    rep.pass = ok;
    rep.verdict = ok ? "non-adiabatic confirmed" : "non-adiabatic not confirmed";
  } else if (label == "ex-joye") {
    const auto r = sweep_with(label, "transition", cfg, eps_or(cfg, "2^-3:2^-12"));
    double lo = std::numeric_limits<double>::infinity();
    for (double v : r.value) lo = std::min(lo, v);
    const bool ok = all_ok(r) && lo >= 0.05;
    rep.evidence = {{"sweep", r.to_json()}, {"min_transition", lo}};
    rep.pass = ok;
    rep.verdict = ok ? "non-adiabatic confirmed" : "non-adiabatic not confirmed";
  } else if (label == "ex4-5") {
    rep = gap_free_example(label, cfg, "2^-3:2^-12", false);
  } else if (label == "ex4-6") {
    rep = gap_free_example(label, cfg, "2^-3:2^-12", true);
  } else if (label == "ex4-7" || label == "ex4-7-discrete") {
    const auto eps = eps_or(cfg, "2^-3:2^-8");
    const StandardExample base = build_standard_example(label, cfg.params);
    json per_dim = json::array();
    bool ok = true;
    std::vector<double> levels;
    for (int d : base.registered_dims) {
      Params p = cfg.params;
      p[base.truncation_key] = d;
      const StandardExample ex = build_standard_example(label, p);
      const Vec g = Vec::Constant(ex.A.dim, 1.0 / std::sqrt(double(ex.A.dim)));
      const Mat p0 = ex.P.eval(0.0);
      const Mat I = identity(ex.A.dim);
      double mismatch = 0.0, level = 0.0, spread = 0.0;
      std::vector<double> sup_per_eps;
      for (double e : eps) {
        const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, e, {});
        double sup = 0.0;
        for (std::size_t k = 0; k < U.size(); ++k) {
          const Mat pt = ex.P.eval(U.grid()[k]);
          const Mat ut = U.at(k);
          const double lhs = ((I - pt) * ut * p0 * g - pt * ut * (I - p0) * g).norm();
          const double rhs = ((pt - p0) * g).norm();
          mismatch = std::max(mismatch, std::abs(lhs - rhs));
          sup = std::max(sup, lhs);
        }
        sup_per_eps.push_back(sup);
      }
      level = *std::min_element(sup_per_eps.begin(), sup_per_eps.end());
      spread = *std::max_element(sup_per_eps.begin(), sup_per_eps.end()) - level;
      levels.push_back(level);
      const bool dim_ok = mismatch <= 1e-8 && level > 0.1 && spread <= 1e-8;
      ok = ok && dim_ok;
      per_dim.push_back({{"d", d}, {"mismatch", mismatch}, {"sup_transition", sup_per_eps},
                         {"eps", eps}, {"ok", dim_ok}});
    }
    const double hi = *std::max_element(levels.begin(), levels.end());
    const double lo = *std::min_element(levels.begin(), levels.end());
    const double drift = hi > 0 ? (hi - lo) / hi : 0.0;
    ok = ok && drift <= 0.2;
    rep.evidence = {{"per_dim", per_dim}, {"drift", drift}};
    rep.pass = ok;
    rep.verdict = ok ? "hypothesis violated and conclusion fails"
                     : "eps-independence not confirmed";
  } else if (label == "ex-superad") {
    const auto eps = eps_or(cfg, "2^-3:2^-12");
    json sweeps = json::object();
    bool ok = true;
    const auto pg = sweep_with(label, "p-eps-gap", cfg, eps);
    sweeps["p-eps-gap"] = pg.to_json();
    ok = ok && all_ok(pg) && pg.slope && std::abs(*pg.slope - 1.0) <= 0.15;
    for (int n = 1; n <= 3; ++n) {
      const std::string name = "superad-transition(" + std::to_string(n) + ")";
      const auto r = sweep_with(label, name, cfg, eps);
      sweeps[name] = r.to_json();
      ok = ok && all_ok(r) && r.slope && *r.slope >= n - 0.25;
    }
    // Largest eps in the sweep without a breakdown.
    double eps_star = 0.0;
    const StandardExample ex = build_standard_example(label, cfg.params);
    for (double e : eps) {
      try {
        superadiabatic_iterate(ex.A, circle_path(ex), e, 3);
        eps_star = e;
        break;
      } catch (const IterationBreakdown&) {
      }
    }
    rep.evidence = {{"sweeps", sweeps}, {"eps_star", eps_star}};
    rep.pass = ok;
    rep.verdict = ok ? "superadiabatic orders confirmed"
                     : "superadiabatic orders not confirmed";
  } else if (label == "ex-holder") {
    const auto eps = eps_or(cfg, "2^-3:2^-12");
    const auto reports = sweep_dims(label, "uv-gap", cfg, eps);
    bool ok = true;
    json sweeps = json::array();
    for (const auto& r : reports) {
      ok = ok && all_ok(r) && r.slope && *r.slope >= 0.15;
      sweeps.push_back(r.to_json());
    }
    const double drift = drift_across(reports);
    rep.evidence = {{"sweeps", sweeps}, {"drift", drift}, {"exponent_bound", 0.25}};
    rep.pass = ok;
    rep.verdict = ok ? "Hoelder-rate bound respected" : "Hoelder-rate bound not respected";
  } else {
    throw UnknownExample("no gallery entry for '" + label + "'");
  }
  rep.evidence["params"] = params_json(cfg.params);
  return rep;
}

namespace {

CheckResult check(const std::string& name, bool pass, const std::string& detail) {
  return CheckResult{name, pass, detail};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<CheckResult> invariants_suite() {
  std::vector<CheckResult> out;
  const auto grid = output_grid(0.0, 1.0, 33);
  for (const auto& label : example_labels()) {
    const StandardExample ex = build_standard_example(label);
    double idem = 0, ppp = 0, comm = 0;
    for (double t : grid) {
      const Mat p = ex.P.eval(t), dp = ex.P.deriv(t), a = ex.A.eval(t);
      idem = std::max(idem, op_norm(p * p - p));
      ppp = std::max(ppp, op_norm(p * dp * p));
      comm = std::max(comm, op_norm(a * p - p * a) / std::max(1.0, op_norm(a)));
    }
    out.push_back(check("projection invariants " + label,
                        idem <= 1e-8 && ppp <= 1e-7 && comm <= 1e-10,
                        "idem=" + fmt(idem) + " PP'P=" + fmt(ppp) + " [A,P]=" + fmt(comm)));
  }
  {
    const StandardExample ex = build_standard_example("ex3-3");
    const auto st = check_m0_stability(ex.lambda, ex.A.meta.alpha, grid);
    out.push_back(check("ex3-3 not (M,0)-stable", !st.stable, "r0=" + fmt(st.r0)));
  }
  {
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> nd;
    double worst = 0.0, uniq = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + trial % 6;
      Mat S = identity(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) += 0.3 * cplx(nd(rng), nd(rng)) / std::sqrt(double(n));
      Mat D = Mat::Zero(n, n);
      const int jb = 1 + trial % 3;
      for (int i = 0; i < n; ++i) D(i, i) = i < jb ? cplx(0.0) : cplx(1.5 + std::abs(nd(rng)), nd(rng));
      for (int i = 0; i + 1 < jb; ++i) D(i, i + 1) = 1.0;
      const Mat A = S * D * S.inverse();
      const auto w = weakly_associated_projection(A, 0.0);
      const Mat pr = riesz_projection(A, ContourCycle::circle(0.0, 0.5));
      worst = std::max(worst, op_norm(w.P - pr));
      uniq = std::max(uniq, w.uniqueness);
    }
    out.push_back(check("weak = Riesz on random matrices", worst <= 1e-8 && uniq <= 1e-8,
                        "max diff=" + fmt(worst) + " uniqueness=" + fmt(uniq)));
  }
  {
    const StandardExample ex = build_standard_example("ex-superad");
    const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, 1.0 / 64, {});
    double un = 0.0;
    for (std::size_t k = 0; k < U.size(); ++k) {
      const Mat u = U.at(k);
      un = std::max(un, op_norm(u.adjoint() * u - identity(u.rows())));
    }
    out.push_back(check("unitarity for skew-Hermitian generator", un <= 1e-9, "residual=" + fmt(un)));
  }
  {
    const StandardExample ex = build_standard_example("ex3-1");
    EvolutionOptions opt;
    opt.use_frame = false;
    const Propagator U = evolve(ex.A, &ex.P, EvolutionKind::Full, 0.05, opt);
    const auto law = check_evolution_laws(U, {{0, 64, 256}, {10, 100, 200}, {50, 50, 50}});
    out.push_back(check("evolution laws ex3-1", law.composition <= 10 * opt.tol_step && law.identity == 0.0,
                        "composition=" + fmt(law.composition)));
  }
  for (const std::string label : {"ex3-1u", "ex-joye", "ex-superad"}) {
    const StandardExample ex = build_standard_example(label);
    double res = 0.0, diff = 0.0;
    for (double t : grid) {
      const Mat a = ex.A.eval(t), p = ex.P.eval(t), dp = ex.P.deriv(t);
      const Mat b = commutator_solution_B(a, ex.lambda.value(t), p, dp, ex.m0);
      res = std::max(res, commutator_residual(b, a, p, dp));
      const Mat bc = commutator_solution_B_contour(
          a, dp, ContourCycle::circle(ex.lambda.value(t), 0.45 * ex.gap));
      diff = std::max(diff, op_norm(b - bc));
    }
    out.push_back(check("commutator solver " + label, res <= 1e-8 && diff <= 1e-8,
                        "residual=" + fmt(res) + " contour diff=" + fmt(diff)));
  }
  return out;
}

std::vector<CheckResult> rates_suite() {
  std::vector<CheckResult> out;
  {
    const auto r = sweep("ex3-1u", "uv-gap");
    const bool ok = r.slope && *r.slope >= 0.85 && *r.slope <= 1.15;
    out.push_back(check("ex3-1u uv-gap slope in [0.85, 1.15]", ok,
                        "slope=" + (r.slope ? fmt(*r.slope) : std::string("none"))));
  }
  {
    const auto r = sweep("ex-superad", "p-eps-gap");
    const bool ok = r.slope && std::abs(*r.slope - 1.0) <= 0.15;
    out.push_back(check("ex-superad p-eps-gap slope 1 +- 0.15", ok,
                        "slope=" + (r.slope ? fmt(*r.slope) : std::string("none"))));
  }
  for (int n = 1; n <= 3; ++n) {
    const auto r = sweep("ex-superad", "superad-transition(" + std::to_string(n) + ")");
    const bool ok = r.slope && *r.slope >= n - 0.25;
    out.push_back(check("ex-superad superad-transition(" + std::to_string(n) + ") slope", ok,
                        "slope=" + (r.slope ? fmt(*r.slope) : std::string("none"))));
  }
  for (int d : {64, 256}) {
    SweepConfig sc;
    sc.params = {{"d", double(d)}};
    const auto r = sweep("ex-holder", "uv-gap", sc);
    const bool ok = r.slope && *r.slope >= 0.15;
    out.push_back(check("ex-holder d=" + std::to_string(d) + " uv-gap exponent >= 0.15", ok,
                        "slope=" + (r.slope ? fmt(*r.slope) : std::string("none"))));
  }
  {
    SweepConfig sc;
    sc.params = {{"shift", -1.0}};
    const auto r = sweep("ex3-1u", "uv-gap", sc);
    const bool ok = r.slope && *r.slope >= 1.0 - 1e-9;
    out.push_back(check("dissipative family uv-gap slope >= 1", ok,
                        "slope=" + (r.slope ? fmt(*r.slope) : std::string("none"))));
  }
  return out;
}

}  // namespace

std::vector<CheckResult> run_suite(const std::string& suite) {
  if (suite == "invariants") return invariants_suite();
  if (suite == "rates") return rates_suite();
  if (suite == "gallery") {
    std::vector<CheckResult> out;
    for (const std::string label : {"ex3-1u", "ex3-1", "ex3-2", "ex3-3", "ex-joye", "ex4-5",
                                    "ex4-6", "ex4-7-discrete", "ex-superad", "ex-holder"}) {
      const auto rep = run_example(label);
      out.push_back(check(label, rep.pass, rep.verdict));
    }
    return out;
  }
  throw InvalidInput("unknown suite '" + suite + "'");
}

}  // namespace adiab
