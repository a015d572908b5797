#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bergman/fem.hpp>
#include <bergman/mesh.hpp>
#include <bergman/oracles.hpp>
#include <bergman/sparse.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

using namespace bergman;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

std::shared_ptr<const Mesh> shared(const DomainSpec& spec, double h) {
  return std::make_shared<const Mesh>(generate_mesh(spec, h));
}

DirichletData constant_data(const Mesh& m, double value) {
  DirichletData d;
  for (int c = 0; c < m.component_count(); ++c) d[c] = [value](const Point2&) { return value; };
  return d;
}

double radius(const Point2& x) { return std::hypot(x[0], x[1]); }

// root-mean-square nodal error
double disk_w2_error(double h) {
  auto m = shared(make_disk(1.0), h);
  const ScalarField w = solve_weighted_poisson(m, {}, 1.0, constant_data(*m, 0.0));
  double e = 0.0;
  for (std::size_t v = 0; v < m->vertex_count(); ++v) {
    const double r = radius(m->vertices()[v]);
    e += std::pow(w[v] - 0.25 * (1.0 - r * r), 2);
  }
  return std::sqrt(e / double(m->vertex_count()));
}
}  // namespace

TEST_CASE("conjugate gradients on a small SPD system") {
  // tridiagonal 2, -1 with known solution
  const std::size_t n = 50;
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < n; ++i) {
    trips.push_back({int(i), int(i), 2.0});
    if (i + 1 < n) {
      trips.push_back({int(i), int(i + 1), -1.0});
      trips.push_back({int(i + 1), int(i), -1.0});
    }
  }
  const CsrMatrix A = CsrMatrix::from_triplets(n, trips);
  std::vector<double> exact(n), b(n), x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) exact[i] = std::sin(0.1 * double(i));
  A.multiply(exact, b);
  const CgResult r = conjugate_gradient(A, b, x);
  CHECK(r.converged);
  CHECK(r.relative_residual <= 1e-10);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == Approx(exact[i]).epsilon(1e-8));

  const CsrMatrix D = CsrMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 4.0}});
  CHECK(D.diagonal() == std::vector<double>{3.0, 4.0});
}

TEST_CASE("unit disk torsion: center value 0.25, nodal error O(h^2)") {
  const double h = 0.02;
  auto m = shared(make_disk(1.0), h);
  const ScalarField w = solve_weighted_poisson(m, {}, 1.0, constant_data(*m, 0.0));
  double top = 0.0;
  for (std::size_t v = 0; v < m->vertex_count(); ++v) top = std::max(top, w[v]);
  CHECK(std::abs(top - 0.25) <= h * h);
  for (std::size_t v = 0; v < m->vertex_count(); ++v) {
    const double r = radius(m->vertices()[v]);
    CHECK(std::abs(w[v] - 0.25 * (1.0 - r * r)) <= h * h);
  }
}

TEST_CASE("nodal error against the closed form converges with order >= 1.5") {
  const double e1 = disk_w2_error(0.1), e2 = disk_w2_error(0.05), e3 = disk_w2_error(0.025);
  CHECK(std::log2(e1 / e2) >= 1.5);
  CHECK(std::log2(e2 / e3) >= 1.5);
}

TEST_CASE("harmonic extensions") {
  auto disk = shared(make_disk(1.0), 0.05);
  DirichletData trace{{0, [](const Point2& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }}};
  const ScalarField H = solve_weighted_poisson(disk, {}, 0.0, trace);
  for (std::size_t v = 0; v < disk->vertex_count(); ++v) CHECK(H[v] == Approx(0.5).epsilon(1e-8));

  auto square = shared(make_unit_square(), 0.05);
  DirichletData linear{{0, [](const Point2& x) { return x[0]; }}};
  const ScalarField u = solve_weighted_poisson(square, {}, 0.0, linear);
  for (std::size_t v = 0; v < square->vertex_count(); ++v) CHECK(u[v] == Approx(square->vertices()[v][0]).epsilon(1e-8));
}

TEST_CASE("weighted solves: maximum principle and Galerkin orthogonality") {
  for (const DomainSpec& spec : {make_disk(1.0), make_unit_square(), make_annulus(1.0, 2.0)}) {
    auto m = shared(spec, 0.05);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    std::vector<double> weight(m->triangle_count());
    for (double& w : weight) w = dist(rng);
    const ScalarField u = solve_weighted_poisson(m, weight, 1.0, constant_data(*m, 0.0));
    for (std::size_t v = 0; v < m->vertex_count(); ++v) CHECK(u[v] >= 0.0);

    std::vector<int> interior;
    std::vector<double> mass(m->vertex_count(), 0.0);
    for (std::size_t t = 0; t < m->triangle_count(); ++t)
      for (int v : m->triangles()[t]) mass[v] += m->area(t) / 3.0;
    for (std::size_t v = 0; v < m->vertex_count(); ++v)
      if (!m->is_boundary(int(v))) interior.push_back(int(v));
    std::shuffle(interior.begin(), interior.end(), rng);
    interior.resize(20);
    const auto res = hat_residuals(u, weight, 1.0, interior);
    for (std::size_t i = 0; i < res.size(); ++i) CHECK(res[i] <= 1e-8 * mass[interior[i]] * 10.0);
  }
}

TEST_CASE("solve_weighted_poisson input validation") {
  auto m = shared(make_annulus(1.0, 2.0), 0.2);
  std::vector<double> bad(m->triangle_count(), 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(solve_weighted_poisson(m, bad, 1.0, constant_data(*m, 0.0)), std::invalid_argument);
  bad[3] = -1.0;
  CHECK_THROWS_AS(solve_weighted_poisson(m, bad, 1.0, constant_data(*m, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(solve_weighted_poisson(m, std::vector<double>(2, 1.0), 1.0, constant_data(*m, 0.0)),
                  std::invalid_argument);
  DirichletData only_outer{{0, [](const Point2&) { return 0.0; }}};
  CHECK_THROWS_AS(solve_weighted_poisson(m, {}, 1.0, only_outer), std::invalid_argument);
}

TEST_CASE("sparse system constraint bookkeeping") {
  const Mesh m = generate_mesh(make_annulus(1.0, 2.0), 0.2);
  SparseSystem sys(m, {}, 2.0);
  sys.fix_component(0, [](const Point2&) { return 0.0; });
  CHECK_THROWS_AS(sys.tie(0), std::invalid_argument);
  CHECK_THROWS_AS(sys.tie(5), std::invalid_argument);
  sys.tie(1, 2.0 * pi);
  const auto sol = sys.solve();
  CHECK(sol.cg.converged);
  REQUIRE(sol.tied_constants.size() == 1);
  for (std::size_t v = 0; v < m.vertex_count(); ++v)
    if (m.vertex_component(int(v)) == 1) CHECK(sol.values[v] == sol.tied_constants[0]);
}

TEST_CASE("floating boundary solve on the disk reduces to the Dirichlet solve") {
  const double h = 0.02;
  auto m = shared(make_disk(1.0), h);
  const FloatingSolution f = floating_boundary_solve(m, 2.0);
  CHECK(f.constants.empty());
  for (std::size_t v = 0; v < m->vertex_count(); ++v) {
    const double r = radius(m->vertices()[v]);
    CHECK(std::abs(f.field[v] - 0.5 * (1.0 - r * r)) <= 2.0 * h * h);
  }
  const double rho = integrate_field(*m, Integrand::grad_norm_pow, f.field, 2.0);
  CHECK(rho == Approx(pi / 2.0).epsilon(0.01));
}

TEST_CASE("floating boundary solve on annulus 1..2 matches the radial oracle") {
  const double h = 0.05;
  auto m = shared(make_annulus(1.0, 2.0), h);
  const FloatingSolution f = floating_boundary_solve(m, 2.0);
  const RadialSolution oracle(2, 2.0, 1.0, 2.0, RadialProblem::rigidity_with_flux);
  REQUIRE(f.constants.size() == 1);
  CHECK(f.constants[0] > 0.0);
  CHECK(f.constants[0] == Approx(oracle.inner_value()).epsilon(0.01));
  CHECK(f.fluxes[0] == Approx(2.0 * pi).epsilon(1e-8));
  for (std::size_t v = 0; v < m->vertex_count(); ++v)
    CHECK(std::abs(f.field[v] - oracle.value(std::clamp(radius(m->vertices()[v]), 1.0, 2.0))) <= 4.0 * h * h);
  const auto fluxes = boundary_fluxes(f.field, 2.0);
  CHECK(fluxes[1] == Approx(2.0 * pi).epsilon(1e-8));
}

TEST_CASE("floating constraint is exact when its fluxes are the Dirichlet fluxes") {
  auto m = shared(make_polygon({{0, 0}, {3, 0}, {3, 3}, {0, 3}}, {{{1, 1}, {1, 2}, {2, 2}, {2, 1}}}), 0.1);
  DirichletData data{{0, [](const Point2&) { return 0.0; }}, {1, [](const Point2&) { return 0.3; }}};
  const CgOptions tight{1e-13, 0};
  const ScalarField u = solve_weighted_poisson(m, {}, 2.0, data, tight);
  const auto fluxes = boundary_fluxes(u, 2.0);
  const FloatingSolution f = floating_boundary_solve(m, 2.0, std::vector<double>{fluxes[1]}, tight);
  REQUIRE(f.constants.size() == 1);
  CHECK(f.constants[0] == Approx(0.3).epsilon(1e-10));
  double scale = 0.0, diff = 0.0;
  for (std::size_t v = 0; v < m->vertex_count(); ++v) {
    scale = std::max(scale, std::abs(u[v]));
    diff = std::max(diff, std::abs(u[v] - f.field[v]));
  }
  CHECK(diff <= 1e-10 * scale);
  CHECK_THROWS_AS(floating_boundary_solve(m, 2.0, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("grad_p_norm examples") {
  auto square = shared(make_unit_square(), 0.05);
  const ScalarField x1 = interpolate(square, [](const Point2& x) { return x[0]; });
  CHECK(grad_p_norm(x1, 2.0) == Approx(1.0).epsilon(1e-12));
  CHECK(grad_p_norm(x1, 1.0) == Approx(1.0).epsilon(1e-12));
  CHECK(grad_p_norm(x1, inf) == Approx(1.0).epsilon(1e-9));

  const ScalarField slope = interpolate(square, [](const Point2& x) { return 0.6 * x[0] - 0.8 * x[1]; });
  CHECK(grad_p_norm(slope, inf) == Approx(1.0).epsilon(1e-9));

  auto disk = shared(make_disk(1.0), 0.02);
  const ScalarField w2 = interpolate(disk, [](const Point2& x) { return 0.25 * (1.0 - x[0] * x[0] - x[1] * x[1]); });
  CHECK(grad_p_norm(w2, 2.0) == Approx(std::sqrt(pi / 8.0)).epsilon(0.01));
  CHECK_THROWS_AS(grad_p_norm(w2, 0.5), std::invalid_argument);
}
