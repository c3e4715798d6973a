#include <catch_amalgamated.hpp>

#include "adiab/adiabatic.hpp"
#include "adiab/errors.hpp"
#include "adiab/evolution.hpp"
#include "oracles.hpp"

using namespace adiab;

namespace {

Generator smooth_generator() {
  Generator g;
  g.dim = 2;
  g.slow = [](double t) {
    Mat m(2, 2);
    m << cplx(0, 1), cplx(std::sin(3 * t), 0.2), cplx(-0.5, t), cplx(-0.3, -1);
    return m;
  };
  return g;
}

Mat fixed_steps(const Generator& g, double eps, int n) {
  Mat u = identity(g.dim);
  for (int k = 0; k < n; ++k) u = cf4_step(g, eps, double(k) / n, 1.0 / n) * u;
  return u;
}

}  // namespace

TEST_CASE("cf4_step is fourth order") {
  const Generator g = smooth_generator();
  const Mat ref = fixed_steps(g, 1.0, 2048);
  const double e1 = (fixed_steps(g, 1.0, 16) - ref).norm();
  const double e2 = (fixed_steps(g, 1.0, 32) - ref).norm();
  CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("propagate reproduces the exponential of a constant generator") {
  std::mt19937_64 rng(8);
  const Mat m = oracle::random_matrix(rng, 4, 0.5);
  Generator g;
  g.dim = 4;
  g.slow = [m](double) { return m; };
  const double eps = 0.125;
  const Propagator u = propagate(g, eps, 0.0, 1.0, 1e-12);
  for (std::size_t k : {std::size_t(1), std::size_t(100), u.size() - 1}) {
    const Mat ref = oracle::exp_taylor(u.grid()[k] / eps * m);
    CHECK((u.at(k) - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
  }
  CHECK(u.stats().accepted > 0);
}

TEST_CASE("propagate_constant agrees with the generic integrator") {
  const StandardExample ex = build_standard_example("ex-joye");
  const double eps = 0.25;
  EvolutionOptions framed, direct;
  direct.use_frame = false;
  direct.tol_step = 1e-12;
  const Propagator a = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, framed);
  const Propagator b = evolve(ex.A, &ex.P, EvolutionKind::Full, eps, direct);
  CHECK(sup_difference(a, b) <= 1e-7 * std::max(1.0, op_norm(a.at(a.size() - 1))));
}

TEST_CASE("evolution laws hold on ex3-1") {
  const StandardExample ex = build_standard_example("ex3-1");
  EvolutionOptions opt;
  opt.use_frame = false;
  const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, 0.05, opt);
  const auto law = check_evolution_laws(u, {{0, 64, 256}, {3, 170, 201}, {10, 10, 30}});
  CHECK(law.composition <= 10 * opt.tol_step);
  CHECK(law.identity == 0.0);
  CHECK_THROWS_AS(check_evolution_laws(u, {{5, 3, 9}}), InvalidInput);
}

TEST_CASE("skew-Hermitian generators give unitary propagators") {
  for (const char* label : {"ex-superad", "ex-holder", "ex3-1u"}) {
    const StandardExample ex = build_standard_example(label, {});
    if (std::string(label) == "ex3-1u") continue;  // not skew; covered elsewhere
    const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, 1.0 / 32);
    for (std::size_t k = 0; k < u.size(); k += 16) {
      const Mat x = u.at(k);
      CHECK((x.adjoint() * x - identity(x.rows())).norm() <= 1e-9);
    }
  }
}

TEST_CASE("Dyson partial sum matches the Kato propagator on ex3-1u") {
  const StandardExample ex = build_standard_example("ex3-1u");
  const double eps = 0.5;
  const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, eps);
  const Propagator v = evolve(ex.A, &ex.P, EvolutionKind::Kato, eps);
  const DysonResult d = dyson_series(u, kato_generator(ex.P), 8);
  double diff = 0;
  for (std::size_t k = 0; k < u.size(); ++k) diff = std::max(diff, op_norm(d.V[k] - v.at(k)));
  INFO("diff=" << diff << " tail=" << d.tail_bound);
  CHECK(diff <= 1e-6);
}

TEST_CASE("propagate rejects bad input and reports step failure") {
  const Generator g = smooth_generator();
  CHECK_THROWS_AS(propagate(g, 0.0, 0.0, 1.0, 1e-10), InvalidInput);
  CHECK_THROWS_AS(propagate(g, 1.0, 0.0, 1.0, -1.0), InvalidInput);
  PropagateOptions opt;
  opt.h_min = 0.5;
  Generator stiff = g;
  stiff.slow = [](double t) {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = std::exp(40 * t);
    m(1, 0) = -std::exp(40 * t);
    return m;
  };
  CHECK_THROWS_AS(propagate(stiff, 1e-3, 0.0, 1.0, 1e-14, opt), StiffnessFailure);
  Generator bad = g;
  bad.slow = [](double t) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = t > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    return m;
  };
  CHECK_THROWS_AS(propagate(bad, 1.0, 0.0, 1.0, 1e-8), Divergence);
}

TEST_CASE("output grid has 257 nodes including kinks of the domain ends") {
  const auto g = output_grid();
  CHECK(g.size() == 257);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(output_grid(0.0, 0.25).size() == 65);
}
