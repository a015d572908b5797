#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bergman/functionals.hpp>
#include <bergman/oracles.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

using namespace bergman;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// int w_2 over the unit square, frozen from the single series below
constexpr double kSquareTorsionIntegral = 0.035144253742872766;

std::shared_ptr<const Mesh> shared(const DomainSpec& spec, double h) {
  return std::make_shared<const Mesh>(generate_mesh(spec, h));
}

// 1/12 - (16/pi^5) sum_{n odd} tanh(n pi / 2) / n^5
double square_single_series() {
  double s = 0.0;
  for (int n = 199; n >= 1; n -= 2) s += std::tanh(n * pi / 2.0) / std::pow(n, 5);
  return 1.0 / 12.0 - 16.0 / std::pow(pi, 5) * s;
}

// sum_{m, n odd} 64 / (pi^6 m^2 n^2 (m^2 + n^2)), the double-sine expansion
double square_double_series(int terms) {
  double s = 0.0;
  for (int m = 2 * terms - 1; m >= 1; m -= 2)
    for (int n = 2 * terms - 1; n >= 1; n -= 2) s += 1.0 / (double(m) * m * n * n * (double(m) * m + double(n) * n));
  return 64.0 / std::pow(pi, 6) * s;
}

double square_Q2() { return 2.0 * std::sqrt(kSquareTorsionIntegral); }

}  // namespace

TEST_CASE("square torsion oracle: frozen constant matches two independent series") {
  CHECK(square_single_series() == Approx(kSquareTorsionIntegral).epsilon(1e-14));
  CHECK(std::abs(square_double_series(2000) - kSquareTorsionIntegral) <= 1e-10);
  CHECK(square_Q2() == Approx(0.37493).epsilon(1e-4));
  CHECK(4.0 * kSquareTorsionIntegral == Approx(0.140577).epsilon(1e-5));
}

TEST_CASE("st_venant_Qq examples") {
  SUBCASE("unit disk, p = 2: all three routes") {
    const QqRoutes r = st_venant_Qq(shared(make_disk(1.0), 0.02), 2.0);
    const double target = std::sqrt(pi / 2.0);
    CHECK(r.converged);
    CHECK(r.primary == Approx(target).epsilon(0.01));
    REQUIRE(r.dual_route.has_value());
    CHECK(*r.dual_route == Approx(target).epsilon(0.01));
    CHECK(r.pairing_route == Approx(target).epsilon(0.01));
  }
  SUBCASE("annulus 1..3, p = 1") {
    const QqRoutes r = st_venant_Qq(shared(make_annulus(1.0, 3.0), 0.05), 1.0);
    CHECK(r.primary == Approx(8.0 * pi).epsilon(0.01));
    CHECK(r.primary == Approx(qinf_annulus(2, 1.0, 3.0)).epsilon(0.01));
    CHECK_FALSE(r.dual_route.has_value());
    CHECK(r.pairing_route == Approx(8.0 * pi).epsilon(0.01));
  }
  SUBCASE("unit square, p = 2") {
    const QqRoutes r = st_venant_Qq(shared(make_unit_square(), 0.02), 2.0);
    CHECK(r.primary == Approx(square_Q2()).epsilon(0.01));
  }
  CHECK_THROWS_AS(st_venant_Qq(shared(make_unit_square(), 0.2), 0.5), std::invalid_argument);
}

TEST_CASE("torsional rigidity examples") {
  CHECK(torsional_rigidity(shared(make_disk(1.0), 0.02)) == Approx(pi / 2.0).epsilon(0.01));
  CHECK(torsional_rigidity(shared(make_unit_square(), 0.02)) == Approx(4.0 * kSquareTorsionIntegral).epsilon(0.01));
  const RadialSolution oracle(2, 2.0, 1.0, 2.0, RadialProblem::rigidity_with_flux);
  const double exact = oracle.gradient_power_integral(2.0);
  CHECK(torsional_rigidity(shared(make_annulus(1.0, 2.0), 0.05)) == Approx(exact).epsilon(0.01));
}

TEST_CASE("torsional rigidity on annulus 1..2 lies strictly below Q_2 squared") {
  auto m = shared(make_annulus(1.0, 2.0), 0.05);
  const double rho = torsional_rigidity(m);
  const double q2 = st_venant_Qq(m, 2.0).primary;
  CHECK(rho < q2 * q2);
}

TEST_CASE("lambda_B2 examples") {
  CHECK(lambda_B2(shared(make_disk(1.0), 0.02)) == Approx(std::sqrt(pi / 2.0)).epsilon(0.01));

  auto square = shared(make_unit_square(), 0.02);
  const double b2 = lambda_B2(square);
  CHECK(b2 == Approx(st_venant_Qq(square, 2.0).primary).epsilon(0.005));

  auto annulus = shared(make_annulus(1.0, 2.0), 0.05);
  const double a2 = lambda_B2(annulus);
  CHECK(a2 == Approx(st_venant_Qq(annulus, 2.0).primary).epsilon(0.005));
  CHECK(a2 > std::sqrt(torsional_rigidity(annulus)));
}

TEST_CASE("lambda_Bp at p = 2 is the linear case") {
  for (const DomainSpec& spec : {make_unit_square(), make_annulus(1.0, 2.0)}) {
    auto m = shared(spec, 0.05);
    const BpResult r = lambda_Bp(m, 2.0);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.value == Approx(st_venant_Qq(m, 2.0).primary).epsilon(1e-8));
    CHECK(r.value == Approx(lambda_B2(m)).epsilon(1e-8));
  }
}

TEST_CASE("lambda_Bp on the unit disk at p = 1.5 equals the ball value") {
  const BpResult r = lambda_Bp(shared(make_disk(1.0), 0.05), 1.5);
  CHECK(r.converged);
  CHECK(r.value == Approx(qq_ball(2, 1.5, 1.0)).epsilon(0.01));
  CHECK(qq_ball(2, 1.5, 1.0) == Approx(std::pow(2.0 / 3.5 * pi, 1.0 / 1.5)).epsilon(1e-14));
}

TEST_CASE("lambda_Bp on the unit square at p = 1.5") {
  const BpResult r = lambda_Bp(shared(make_unit_square(), 0.02), 1.5);
  REQUIRE(r.converged);
  CHECK(r.value <= qq_ball(2, 1.5, 1.0 / std::sqrt(pi)));
  // regression value of this build at h = 0.02
  CHECK(r.value == Approx(0.3615270721).epsilon(1e-8));
}

TEST_CASE("lambda_Ap bracket examples") {
  SUBCASE("disk: the bracket closes") {
    auto m = shared(make_disk(1.0), 0.05);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      CAPTURE(p);
      const ApBracket b = lambda_Ap_bracket(m, p);
      CHECK(b.lower == Approx(b.upper).epsilon(0.01));
    }
  }
  SUBCASE("square, p = 2: the bracket closes") {
    const ApBracket b = lambda_Ap_bracket(shared(make_unit_square(), 0.05), 2.0);
    CHECK(b.lower == Approx(b.upper).epsilon(0.01));
  }
  SUBCASE("square, p = 1.5: ordered and finite") {
    const ApBracket b = lambda_Ap_bracket(shared(make_unit_square(), 0.05), 1.5);
    CHECK(std::isfinite(b.lower));
    CHECK(std::isfinite(b.upper));
    CHECK(b.lower <= b.upper);
  }
}

TEST_CASE("three Q_q routes agree within twice the estimated error") {
  for (const DomainSpec& spec : {make_disk(1.0), make_unit_square(), make_annulus(1.0, 2.0)}) {
    for (double p : {1.5, 2.0, 3.0}) {
      CAPTURE(p);
      const ConstantsReport r = compute_constants(spec, p, 0.05);
      const double tol = 2.0 * r.estimated_error;
      REQUIRE(r.Q_q_dual_route.has_value());
      CHECK(std::abs(*r.Q_q_dual_route - r.Q_q) <= tol);
      CHECK(std::abs(r.Q_q_pairing_route - r.Q_q) <= tol);
    }
  }
}

TEST_CASE("scaling covariance: Q_q scales by s^(1 + N/p)") {
  for (double p : {1.5, 2.0, 3.0}) {
    CAPTURE(p);
    const double disk = st_venant_Qq(shared(make_disk(2.0), 0.1), p).primary;
    CHECK(disk == Approx(qq_ball(2, p, 2.0)).epsilon(0.01));
    CHECK(qq_ball(2, p, 2.0) == Approx(std::pow(2.0, 1.0 + 2.0 / p) * qq_ball(2, p, 1.0)).epsilon(1e-13));

    const ConstantsReport unit = compute_constants(make_unit_square(), p, 0.05);
    const ConstantsReport big = compute_constants(make_rectangle({0.0, 0.0}, {2.0, 2.0}), p, 0.1);
    const double factor = std::pow(2.0, 1.0 + 2.0 / p);
    const double tol = 3.0 * (factor * unit.estimated_error + big.estimated_error);
    CHECK(std::abs(big.Q_q - factor * unit.Q_q) <= tol);
  }
}

TEST_CASE("Faber-Krahn: the square stays strictly below the equal-area disk") {
  auto m = shared(make_unit_square(), 0.05);
  const double r_omega = equivalent_ball_radius(1.0, 2);
  CHECK(r_omega == Approx(1.0 / std::sqrt(pi)).epsilon(1e-15));
  for (double q : {1.5, 2.0, 3.0, inf}) {
    CAPTURE(q);
    const double p = dual_exponent(q);
    CHECK(st_venant_Qq(m, p).primary < qq_ball(2, p, r_omega));
  }
}

TEST_CASE("lambda_Bp iteration properties") {
  auto m = shared(make_unit_square(), 0.05);
  for (double p : {1.0, 1.5, 3.0}) {
    CAPTURE(p);
    SolverConfig cfg;
    const BpResult a = lambda_Bp(m, p, cfg, BpStart::dirichlet_zero);
    CHECK(a.converged);
    for (std::size_t k = 1; k < a.log.size(); ++k) CHECK(a.log[k].objective <= a.log[k - 1].objective);
    // at p = 1 the duality pairing carries the smoothing bias of the weights
    CHECK(a.cross_check == Approx(a.value).epsilon(p == 1.0 ? 1e-2 : 1e-3));

    const BpResult b = lambda_Bp(m, p, cfg, BpStart::quadratic_trace);
    CHECK(b.converged);
    CHECK(std::abs(a.objective - b.objective) <= 10.0 * cfg.tol * std::abs(a.objective));
    double top = 0.0, diff = 0.0;
    for (std::size_t t = 0; t < m->triangle_count(); ++t) {
      const Point2 ga = a.field.gradient(t), gb = b.field.gradient(t);
      top = std::max(top, std::hypot(ga[0], ga[1]));
      diff = std::max(diff, std::hypot(ga[0] - gb[0], ga[1] - gb[1]));
    }
    CHECK(diff <= std::sqrt(cfg.tol) * top);
  }
}

TEST_CASE("compute_constants report") {
  const ConstantsReport r = compute_constants(make_unit_square(), 1.5, 0.1, {}, 3);
  CHECK(r.domain == make_unit_square().name());
  CHECK(r.q == Approx(3.0));
  CHECK(r.sqrt_rho == Approx(std::sqrt(r.rho)).epsilon(1e-15));
  CHECK(r.lambda_Ap_bracket.first == r.Q_q);
  CHECK(r.lambda_Ap_bracket.second == r.lambda_Bp);
  CHECK(r.r_omega == Approx(1.0 / std::sqrt(pi)));
  CHECK(r.Q_q_ball_r_omega == Approx(qq_ball(2, 1.5, r.r_omega)));
  CHECK(r.mesh_h == 0.1);
  CHECK(r.estimated_error == r.error_of("Q_q"));
  CHECK(r.estimated_error == Approx(richardson_error(r.Q_q, st_venant_Qq(shared(make_unit_square(), 0.2), 1.5).primary)));
  CHECK(r.converged());
  CHECK(r.seed == 3);
  CHECK(r.fine.qq_weak_residual <= 1e-4);
  CHECK(richardson_error(1.0, 1.0 + (std::pow(2.0, 1.5) - 1.0)) == Approx(1.0));
  CHECK_THROWS(r.error_of("no_such_constant"));
}
