#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <bergman/domain.hpp>

namespace bergman {

struct BoundaryEdge {
  std::array<int, 2> v;  // the domain lies to the left of v[0] -> v[1]
  int component = 0;     // 0 = outer boundary, 1..j = hole boundaries
};

/// Conforming triangulation of a planar domain with tagged boundary loops.
///
/// The constructor validates the structural invariants (positive orientation,
/// conformity, closed disjoint boundary loops) and caches per-triangle areas
/// and hat-function gradients. Immutable afterwards.
class Mesh {
 public:
  Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges, std::vector<double> hole_areas, double target_h,
       std::optional<DomainSpec> domain = std::nullopt);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<double>& hole_areas() const { return hole_areas_; }
  double target_h() const { return target_h_; }
  const std::optional<DomainSpec>& domain() const { return domain_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  /// Number of boundary components (outer boundary plus holes).
  int component_count() const { return static_cast<int>(hole_areas_.size()) + 1; }

  /// Component of a boundary vertex, or -1 for interior vertices.
  int vertex_component(int v) const { return vertex_component_[v]; }
  bool is_boundary(int v) const { return vertex_component_[v] >= 0; }

  double area(std::size_t t) const { return areas_[t]; }
  double total_area() const;

  /// Gradients of the three hat functions of triangle t (constant on t).
  const std::array<Point2, 3>& hat_gradients(std::size_t t) const { return gradients_[t]; }

  Point2 centroid(std::size_t t) const;

  /// Area enclosed by each boundary loop, by the shoelace formula on the mesh
  /// polygon (index = component).
  std::vector<double> polygonal_loop_areas() const;

  double max_edge_length() const;
  double min_angle_degrees() const;

 private:
  std::vector<Point2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> hole_areas_;
  double target_h_;
  std::optional<DomainSpec> domain_;

  std::vector<int> vertex_component_;
  std::vector<double> areas_;
  std::vector<std::array<Point2, 3>> gradients_;
};

/// Barycentric quadrature rule shared by all triangles; weights sum to 1 and
/// are multiplied by the triangle area.
struct QuadratureRule {
  int order = 2;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Rules of order 1 (centroid), 2 (three interior points) and 4 (six points).
QuadratureRule quadrature_rule(int order = 2);

/// Piecewise-linear nodal function on a mesh.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Constant gradient on triangle t.
  Point2 gradient(std::size_t t) const;

  /// Value at barycentric coordinates inside triangle t.
  double value_at(std::size_t t, const std::array<double, 3>& bary) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
};

/// Nodal interpolant of f.
template <class F>
ScalarField interpolate(std::shared_ptr<const Mesh> mesh, F&& f) {
  std::vector<double> v;
  v.reserve(mesh->vertex_count());
  for (const Point2& x : mesh->vertices()) v.push_back(f(x));
  return ScalarField(std::move(mesh), std::move(v));
}

enum class Integrand {
  field,               // int u dm
  grad_norm_pow,       // int |grad u|^p dm
  field_times_moment,  // int u |x|^2 / 2 dm
  x_dot_grad,          // int x . grad u dm
};

/// Integral over the mesh of the chosen integrand of a field.
double integrate_field(const Mesh& mesh, Integrand integrand, const ScalarField& field, double p = 2.0,
                       const QuadratureRule& rule = quadrature_rule(2));

/// Exact distance from each vertex to the boundary curves of the mesh's
/// domain; exactly zero on boundary vertices.
ScalarField boundary_distance_field(const std::shared_ptr<const Mesh>& mesh);

class MeshingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quality triangulation of a planar domain with nominal edge length h.
///
/// Boundary vertices lie on the exact boundary curves (arc spacing <= h).
/// The result has maximal edge length <= 2h and minimal angle >= 20 degrees;
/// MeshingError is thrown when refinement cannot reach these bounds.
Mesh generate_mesh(const DomainSpec& spec, double h);

nlohmann::json to_json(const Mesh& mesh);
Mesh mesh_from_json(const nlohmann::json& doc);
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace bergman
