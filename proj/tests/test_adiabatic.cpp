#include <catch_amalgamated.hpp>

#include "adiab/adiabatic.hpp"
#include "adiab/errors.hpp"
#include "adiab/spectral.hpp"

using namespace adiab;

TEST_CASE("Kato generator is off-diagonal with respect to P") {
  const StandardExample ex = build_standard_example("ex3-1u");
  const MatFn k = kato_generator(ex.P);
  for (double t : {0.1, 0.5, 0.9}) {
    const Mat p = ex.P.eval(t), kt = k(t);
    CHECK((p * kt * p).norm() < 1e-12);
    CHECK(((identity(3) - p) * kt * (identity(3) - p)).norm() < 1e-12);
  }
}

TEST_CASE("adiabatic evolution intertwines on gapped examples") {
  for (const char* label : {"ex3-1u", "ex-joye", "ex-superad"}) {
    const StandardExample ex = build_standard_example(label);
    for (double eps : {0.125, 1.0 / 1024}) {
      const auto r = adiabatic_evolution(ex.A, ex.P, eps);
      INFO(label << " eps=" << eps);
      CHECK(r.intertwining <= 1e-7);
    }
  }
}

TEST_CASE("generic path intertwines too") {
  const StandardExample ex = build_standard_example("ex3-1u");
  EvolutionOptions opt;
  opt.use_frame = false;
  const auto r = adiabatic_evolution(ex.A, ex.P, 0.125, opt);
  CHECK(r.intertwining <= 1e-7);
}

TEST_CASE("projected evolution keeps the kernel condition") {
  const StandardExample ex = build_standard_example("ex4-5");
  const auto r = projected_evolution(ex.A, ex.P, ex.lambda, ex.m0, 1.0 / 16);
  CHECK(r.kernel_residual <= 1e-7);
  CHECK(std::isfinite(r.sup_norm));
  CHECK(r.bound_constant >= 1.0);
}

TEST_CASE("commutator solver: closed form, contour form, residual") {
  for (const char* label : {"ex3-1u", "ex-joye", "ex-superad"}) {
    const StandardExample ex = build_standard_example(label);
    for (double t : {0.0, 0.37, 0.8}) {
      const Mat a = ex.A.eval(t), p = ex.P.eval(t), dp = ex.P.deriv(t);
      const Mat b = commutator_solution_B(a, ex.lambda.value(t), p, dp, ex.m0);
      const Mat bc = commutator_solution_B_contour(
          a, dp, ContourCycle::circle(ex.lambda.value(t), 0.45 * ex.gap));
      INFO(label << " t=" << t);
      CHECK(commutator_residual(b, a, p, dp) <= 1e-8);
      CHECK(op_norm(b - bc) <= 1e-8);
    }
  }
}

TEST_CASE("commutator solver refuses a closed gap") {
  Mat a = Mat::Zero(2, 2);
  Mat p = Mat::Zero(2, 2);
  p(0, 0) = 1.0;
  CHECK_THROWS_AS(commutator_solution_B(a, 0.0, p, Mat::Zero(2, 2), 1), GapViolation);
}

TEST_CASE("trivial adiabaticity: constant projection has no transitions") {
  const StandardExample ex = build_standard_example("ex3-1u", {{"twist", 0.0}});
  for (double eps : {0.125, 1.0 / 4096}) {
    const Propagator u = evolve(ex.A, &ex.P, EvolutionKind::Full, eps);
    CHECK(transition_amplitude(u, ex.P).out <= 1e-7);
  }
}

TEST_CASE("superadiabatic telescoping shrinks with eps") {
  const StandardExample ex = build_standard_example("ex-superad");
  const Curve lam = ex.lambda;
  ContourPath path = [lam](double t) { return ContourCycle::circle(lam.value(t), 0.45); };
  const auto grid = output_grid(0.0, 1.0, 17);
  const auto s1 = superadiabatic_iterate(ex.A, path, 1.0 / 16, 2).telescoping(grid);
  const auto s2 = superadiabatic_iterate(ex.A, path, 1.0 / 32, 2).telescoping(grid);
  REQUIRE(s1.size() == 2);
  CHECK(s2[0] < s1[0]);
  CHECK(s2[1] < s1[1]);
  // Level 0 is the Riesz path of A, i.e. P itself.
  const auto st = superadiabatic_iterate(ex.A, path, 1.0 / 16, 1);
  CHECK(op_norm(st.P(0, 0.3) - ex.P.eval(0.3)) <= 1e-9);
}
