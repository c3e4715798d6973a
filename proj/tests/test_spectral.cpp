#include <catch_amalgamated.hpp>

#include "adiab/errors.hpp"
#include "adiab/evolution.hpp"
#include "adiab/spectral.hpp"
#include "oracles.hpp"

using namespace adiab;

namespace {

// S J S^{-1} with a Jordan block of size jb at 0 and the rest away from 0.
Mat planted(std::mt19937_64& rng, int n, int jb, Mat* oracle_p) {
  std::normal_distribution<double> nd;
  Mat s = identity(n) + 0.3 * oracle::random_matrix(rng, n) / std::sqrt(double(n));
  Mat d = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = i < jb ? cplx(0) : cplx(1.5 + std::abs(nd(rng)), nd(rng));
  for (int i = 0; i + 1 < jb; ++i) d(i, i + 1) = 1.0;
  Mat e = Mat::Zero(n, n);
  for (int i = 0; i < jb; ++i) e(i, i) = 1.0;
  const Mat si = s.inverse();
  *oracle_p = s * e * si;
  return s * d * si;
}

}  // namespace

TEST_CASE("Riesz projection of a diagonal matrix picks the enclosed eigenvalues") {
  Mat a = Mat::Zero(4, 4);
  a(0, 0) = 0.1;
  a(1, 1) = -0.2;
  a(2, 2) = 3.0;
  a(3, 3) = cplx(0, 4);
  const auto r = riesz_projection_detailed(a, ContourCycle::circle(0.0, 1.0));
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = expect(1, 1) = 1.0;
  CHECK((r.P - expect).norm() < 1e-10);
  CHECK(r.idempotency <= 1e-10);
}

TEST_CASE("ellipse contour around a segment") {
  Mat a = Mat::Zero(3, 3);
  a(0, 0) = -1.0;
  a(1, 1) = -0.5;
  a(2, 2) = 0.6;
  ContourCycle c = ContourCycle::ellipse(-1.0, -0.5, 0.2);
  const Certificate cert = certify(c, a);
  CHECK(cert.ok);
  CHECK(cert.enclosed_count == 2);
  CHECK(std::abs(c.winding(-0.75) - 1.0) < 1e-8);
  CHECK(std::abs(c.winding(2.0)) < 1e-8);
}

TEST_CASE("certify rejects a contour through the spectrum") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 1.0;
  ContourCycle c = ContourCycle::circle(0.0, 1.0);
  CHECK_FALSE(certify(c, a).ok);
}

TEST_CASE("weak association equals the Riesz projection and the planted oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 7, jb = 1 + trial % std::min(n - 1, 3);
    Mat p_true;
    const Mat a = planted(rng, n, jb, &p_true);
    const auto w = weakly_associated_projection(a, 0.0);
    const Mat pr = riesz_projection(a, ContourCycle::circle(0.0, 0.5));
    INFO("trial " << trial);
    CHECK(w.m == jb);
    CHECK(oracle::spectral_norm(w.P - p_true) <= 1e-8);
    CHECK(oracle::spectral_norm(pr - p_true) <= 1e-8);
    CHECK(w.uniqueness <= 1e-8);
  }
}

TEST_CASE("weak association fails when lambda is not an eigenvalue") {
  Mat a = identity(3);
  CHECK_THROWS_AS(weakly_associated_projection(a, 0.0), NoWeakAssociation);
}

TEST_CASE("gap_analysis classifies uniform and crossing families") {
  const auto grid = output_grid(0.0, 1.0, 65);
  const StandardExample u = build_standard_example("ex3-1u");
  const GapReport ru = gap_analysis(u.A, u.lambda, grid, u.P.rank);
  CHECK(ru.classification == GapClass::Uniform);
  CHECK(ru.min_gap >= 1.0 - 1e-9);
  const StandardExample c = build_standard_example("ex3-1");
  const GapReport rc = gap_analysis(c.A, c.lambda, grid, c.P.rank);
  CHECK(rc.classification == GapClass::NonUniform);
  REQUIRE(rc.crossings.size() == 1);
  CHECK(std::abs(rc.crossings[0] - 0.5) < 1e-6);
}

TEST_CASE("resolvent ray bound for the contraction example is at most 1") {
  const StandardExample ex = build_standard_example("ex4-6");
  std::vector<double> deltas;
  for (int k = 1; k <= 8; ++k) deltas.push_back(std::ldexp(1.0, -k));
  const RayBound rb = resolvent_ray_bound(ex.A, ex.lambda, ex.theta, ex.P, deltas,
                                          output_grid(0.0, 1.0, 17), ex.P.rank);
  CHECK(rb.M0 <= 1.0 + 1e-9);
  CHECK_FALSE(rb.unbounded);
}

TEST_CASE("ray through the spectrum is reported") {
  OperatorFamily a;
  a.dim = 2;
  a.eval = [](double) {
    Mat m = Mat::Zero(2, 2);
    m(1, 1) = 0.25;
    return m;
  };
  ProjectionFamily p;
  p.dim = 2;
  p.rank = 1;
  p.eval = [](double) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    return m;
  };
  Curve lam{[](double) { return cplx(0.0); }, {}};
  CHECK_THROWS_AS(resolvent_ray_bound(a, lam, [](double) { return 0.0; }, p, {0.5, 0.1},
                                      {0.0, 1.0}, 1),
                  RayHitsSpectrum);
}
