#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bergman/domain.hpp>
#include <bergman/mesh.hpp>

#include <cmath>
#include <memory>
#include <numbers>
#include <set>

using namespace bergman;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;

std::shared_ptr<const Mesh> shared(const DomainSpec& spec, double h) {
  return std::make_shared<const Mesh>(generate_mesh(spec, h));
}

double triangle_area_sum(const Mesh& m) {
  double s = 0.0;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) s += m.area(t);
  return s;
}

// Structural invariants shared by every generated mesh.
void check_structure(const Mesh& m, double h) {
  for (std::size_t t = 0; t < m.triangle_count(); ++t) REQUIRE(m.area(t) > 0.0);
  CHECK(m.min_angle_degrees() >= 20.0);
  CHECK(m.max_edge_length() <= 2.0 * h);

  const auto loops = m.polygonal_loop_areas();
  double holes = 0.0;
  for (std::size_t i = 1; i < loops.size(); ++i) holes += loops[i];
  CHECK(triangle_area_sum(m) + holes == Approx(loops[0]).epsilon(1e-10));

  std::set<int> seen_components;
  for (const auto& e : m.boundary_edges()) {
    seen_components.insert(e.component);
    CHECK(m.vertex_component(e.v[0]) == e.component);
    CHECK(m.vertex_component(e.v[1]) == e.component);
  }
  CHECK(static_cast<int>(seen_components.size()) == m.component_count());
}
}  // namespace

TEST_CASE("disk mesh: area within 2h^2 of pi, vertices on the circle") {
  const double h = 0.05;
  const Mesh m = generate_mesh(make_disk(1.0), h);
  check_structure(m, h);
  CHECK(m.component_count() == 1);
  CHECK(std::abs(m.total_area() - pi) <= 2.0 * h * h);
  for (std::size_t v = 0; v < m.vertex_count(); ++v)
    if (m.is_boundary(static_cast<int>(v)))
      CHECK(std::hypot(m.vertices()[v][0], m.vertices()[v][1]) == Approx(1.0).epsilon(1e-14));
  for (const auto& e : m.boundary_edges()) {
    const auto& a = m.vertices()[e.v[0]];
    const auto& b = m.vertices()[e.v[1]];
    CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) <= h * (1.0 + 1e-12));
  }
}

TEST_CASE("annulus 1..3 mesh: two components, exact hole area") {
  const double h = 0.05;
  const Mesh m = generate_mesh(make_annulus(1.0, 3.0), h);
  check_structure(m, h);
  REQUIRE(m.component_count() == 2);
  REQUIRE(m.hole_areas().size() == 1);
  CHECK(m.hole_areas()[0] == Approx(pi).epsilon(1e-15));
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    const int c = m.vertex_component(static_cast<int>(v));
    const double r = std::hypot(m.vertices()[v][0], m.vertices()[v][1]);
    if (c == 0) CHECK(r == Approx(3.0).epsilon(1e-14));
    if (c == 1) CHECK(r == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("unit square mesh: area 1 to 1e-12") {
  const double h = 0.02;
  const Mesh m = generate_mesh(make_unit_square(), h);
  check_structure(m, h);
  CHECK(m.component_count() == 1);
  CHECK(std::abs(m.total_area() - 1.0) <= 1e-12);
}

TEST_CASE("polygonal domains with re-entrant corners and holes") {
  const Mesh l = generate_mesh(make_polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}), 0.1);
  check_structure(l, 0.1);
  CHECK(l.total_area() == Approx(3.0).epsilon(1e-12));

  const Mesh sq = generate_mesh(make_polygon({{0, 0}, {3, 0}, {3, 3}, {0, 3}}, {{{1, 1}, {1, 2}, {2, 2}, {2, 1}}}), 0.1);
  check_structure(sq, 0.1);
  REQUIRE(sq.hole_areas().size() == 1);
  CHECK(sq.hole_areas()[0] == Approx(1.0).epsilon(1e-15));
  CHECK(sq.total_area() == Approx(8.0).epsilon(1e-12));
}

TEST_CASE("refinement halves the edge length and keeps the area") {
  const Mesh coarse = generate_mesh(make_disk(1.0), 0.1);
  const Mesh fine = generate_mesh(make_disk(1.0), 0.05);
  const double ratio = fine.max_edge_length() / coarse.max_edge_length();
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.65);
  CHECK(std::abs(coarse.total_area() - pi) <= 2.0 * 0.1 * 0.1);
  CHECK(std::abs(fine.total_area() - pi) < std::abs(coarse.total_area() - pi));

  const Mesh s1 = generate_mesh(make_unit_square(), 0.1);
  const Mesh s2 = generate_mesh(make_unit_square(), 0.05);
  CHECK(s1.total_area() == Approx(1.0).epsilon(1e-13));
  CHECK(s2.total_area() == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("mesh generation is deterministic") {
  const Mesh a = generate_mesh(make_annulus(1.0, 2.0), 0.1);
  const Mesh b = generate_mesh(make_annulus(1.0, 2.0), 0.1);
  CHECK(a.vertices() == b.vertices());
  CHECK(a.triangles() == b.triangles());
}

TEST_CASE("generate_mesh rejects bad input") {
  CHECK_THROWS_AS(generate_mesh(make_unit_square(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_mesh(make_unit_square(), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_mesh(make_annulus(1.0, 1.1), 0.2), std::invalid_argument);
  CHECK_THROWS_AS(generate_mesh(DomainSpec(Disk{{0.0, 0.0, 0.0}, 1.0}, 3), 0.1), std::invalid_argument);
}

TEST_CASE("quadrature rules: positive weights summing to one, polynomial exactness") {
  // reference triangle (0,0), (1,0), (0,1) with area 1/2; int x^a y^b = a! b! / (a + b + 2)!
  auto exact = [](int a, int b) {
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
  };
  for (int order : {1, 2, 4}) {
    const QuadratureRule rule = quadrature_rule(order);
    CHECK(rule.order == order);
    double sum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-15));
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < rule.points.size(); ++k) {
          const double x = rule.points[k][1], y = rule.points[k][2];
          s += 0.5 * rule.weights[k] * std::pow(x, a) * std::pow(y, b);
        }
        CHECK(s == Approx(exact(a, b)).epsilon(1e-14));
      }
  }
  CHECK(quadrature_rule(3).order == 4);
  CHECK_THROWS_AS(quadrature_rule(5), std::invalid_argument);
}

TEST_CASE("integrate_field examples") {
  auto square = shared(make_unit_square(), 0.05);
  const ScalarField one = interpolate(square, [](const Point2&) { return 1.0; });
  CHECK(integrate_field(*square, Integrand::field, one) == Approx(1.0).epsilon(1e-13));
  CHECK(integrate_field(*square, Integrand::field, one) == Approx(square->total_area()).epsilon(1e-15));

  // int |x|^2 over the unit disk is pi/2
  const double h = 0.02;
  auto disk = shared(make_disk(1.0), h);
  const ScalarField quad = interpolate(disk, [](const Point2& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
  CHECK(std::abs(integrate_field(*disk, Integrand::x_dot_grad, quad) - pi / 2.0) <= 4.0 * h * h);

  // |grad (1 - |x|^2)/4|^2 = |x|^2 / 4, whose integral over the unit disk is pi/8
  const ScalarField w2 = interpolate(disk, [](const Point2& x) { return 0.25 * (1.0 - x[0] * x[0] - x[1] * x[1]); });
  CHECK(integrate_field(*disk, Integrand::grad_norm_pow, w2, 2.0) == Approx(pi / 8.0).epsilon(0.01));

  // field_times_moment of 1 on the square: int |x|^2/2 = 1/3
  CHECK(integrate_field(*square, Integrand::field_times_moment, one, 2.0, quadrature_rule(4)) ==
        Approx(1.0 / 3.0).epsilon(1e-13));

  auto other = shared(make_unit_square(), 0.1);
  CHECK_THROWS_AS(integrate_field(*other, Integrand::field, one), std::invalid_argument);
  CHECK_THROWS_AS(integrate_field(*square, Integrand::grad_norm_pow, one, 0.5), std::invalid_argument);
}

TEST_CASE("boundary distance examples") {
  CHECK(boundary_distance(make_disk(1.0), {0.0, 0.0}) == Approx(1.0).epsilon(1e-15));
  CHECK(boundary_distance(make_annulus(1.0, 3.0), {2.0, 0.0}) == Approx(1.0).epsilon(1e-15));
  CHECK(boundary_distance(make_annulus(1.0, 3.0), {0.0, -2.0}) == Approx(1.0).epsilon(1e-15));
  CHECK(boundary_distance(make_unit_square(), {0.5, 0.5}) == Approx(0.5).epsilon(1e-15));
  CHECK(boundary_distance(make_unit_square(), {0.2, 0.7}) == Approx(0.2).epsilon(1e-15));
}

TEST_CASE("boundary distance field: nonnegative, zero on the boundary, 1-Lipschitz along edges") {
  for (const DomainSpec& spec : {make_disk(1.0), make_annulus(1.0, 3.0), make_unit_square(),
                                 make_polygon({{0, 0}, {3, 0}, {3, 3}, {0, 3}}, {{{1, 1}, {1, 2}, {2, 2}, {2, 1}}})}) {
    auto m = shared(spec, 0.1);
    const ScalarField d = boundary_distance_field(m);
    for (std::size_t v = 0; v < m->vertex_count(); ++v) {
      CHECK(d[v] >= 0.0);
      if (m->is_boundary(static_cast<int>(v))) CHECK(d[v] == 0.0);
    }
    for (const auto& tri : m->triangles())
      for (int i = 0; i < 3; ++i) {
        const int a = tri[i], b = tri[(i + 1) % 3];
        const double len = std::hypot(m->vertices()[a][0] - m->vertices()[b][0], m->vertices()[a][1] - m->vertices()[b][1]);
        CHECK(std::abs(d[a] - d[b]) <= len * (1.0 + 1e-12));
      }
  }
  auto annulus = shared(make_annulus(1.0, 3.0), 0.1);
  const ScalarField d = boundary_distance_field(annulus);
  for (std::size_t v = 0; v < annulus->vertex_count(); ++v) {
    const double r = std::hypot(annulus->vertices()[v][0], annulus->vertices()[v][1]);
    CHECK(d[v] == Approx(std::max(0.0, std::min(r - 1.0, 3.0 - r))).epsilon(1e-12));
  }
}

TEST_CASE("boundary distance field needs a backing domain") {
  const Mesh m = generate_mesh(make_unit_square(), 0.25);
  auto bare = std::make_shared<const Mesh>(m.vertices(), m.triangles(), m.boundary_edges(), m.hole_areas(),
                                           m.target_h());
  CHECK_THROWS_AS(boundary_distance_field(bare), std::invalid_argument);
}

TEST_CASE("scalar field gradients and point values are exact for linear data") {
  auto m = shared(make_unit_square(), 0.1);
  const ScalarField f = interpolate(m, [](const Point2& x) { return 2.0 * x[0] - 3.0 * x[1] + 1.0; });
  for (std::size_t t = 0; t < m->triangle_count(); ++t) {
    const Point2 g = f.gradient(t);
    CHECK(g[0] == Approx(2.0).epsilon(1e-11));
    CHECK(g[1] == Approx(-3.0).epsilon(1e-11));
    const Point2 c = m->centroid(t);
    CHECK(f.value_at(t, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == Approx(2.0 * c[0] - 3.0 * c[1] + 1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ScalarField(m, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("mesh JSON round trip") {
  const Mesh m = generate_mesh(make_annulus(1.0, 2.0), 0.2);
  const Mesh back = mesh_from_json(to_json(m));
  CHECK(back.vertices() == m.vertices());
  CHECK(back.triangles() == m.triangles());
  CHECK(back.hole_areas() == m.hole_areas());
  CHECK(back.target_h() == m.target_h());
  REQUIRE(back.boundary_edges().size() == m.boundary_edges().size());
  for (std::size_t i = 0; i < m.boundary_edges().size(); ++i) {
    CHECK(back.boundary_edges()[i].v == m.boundary_edges()[i].v);
    CHECK(back.boundary_edges()[i].component == m.boundary_edges()[i].component);
  }
  const auto doc = to_json(m);
  CHECK(doc.contains("vertices"));
  CHECK(doc.contains("triangles"));
  CHECK(doc.contains("boundary_edges"));
  CHECK(doc.contains("hole_areas"));
}

TEST_CASE("mesh constructor rejects invalid structure") {
  const std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<BoundaryEdge> loop{{{0, 1}, 0}, {{1, 2}, 0}, {{2, 3}, 0}, {{3, 0}, 0}};
  CHECK_NOTHROW(Mesh(v, {{0, 1, 2}, {0, 2, 3}}, loop, {}, 1.0));
  CHECK_THROWS_AS(Mesh(v, {{0, 2, 1}, {0, 2, 3}}, loop, {}, 1.0), std::invalid_argument);  // clockwise
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 2, 3}}, {{{0, 1}, 0}, {{1, 2}, 0}, {{2, 3}, 0}}, {}, 1.0),
                  std::invalid_argument);  // open loop
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 1, 2}}, loop, {}, 1.0), std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 2, 3}}, loop, {1.0}, 1.0), std::invalid_argument);  // phantom hole
}
