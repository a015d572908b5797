#include <bergman/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace bergman {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid mesh: " + what);
}

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges, std::vector<double> hole_areas, double target_h,
           std::optional<DomainSpec> domain)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      hole_areas_(std::move(hole_areas)),
      target_h_(target_h),
      domain_(std::move(domain)) {
  const int nv = static_cast<int>(vertices_.size());
  require(!triangles_.empty(), "no triangles");
  require(std::isfinite(target_h_) && target_h_ > 0.0, "target_h must be positive");
  for (const Point2& p : vertices_) require(std::isfinite(p[0]) && std::isfinite(p[1]), "non-finite vertex");

  areas_.reserve(triangles_.size());
  gradients_.reserve(triangles_.size());
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(3 * triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) require(v >= 0 && v < nv, "triangle vertex index out of range");
    const Point2& a = vertices_[tri[0]];
    const Point2& b = vertices_[tri[1]];
    const Point2& c = vertices_[tri[2]];
    const double twice = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    require(twice > 0.0, "triangle " + std::to_string(t) + " is not positively oriented");
    areas_.push_back(0.5 * twice);
    // grad phi_i = rot90(opposite edge) / (2 area)
    std::array<Point2, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Point2& p = vertices_[tri[(i + 1) % 3]];
      const Point2& q = vertices_[tri[(i + 2) % 3]];
      g[i] = {(p[1] - q[1]) / twice, (q[0] - p[0]) / twice};
    }
    gradients_.push_back(g);
    for (int i = 0; i < 3; ++i) {
      const auto [it, fresh] = directed.emplace(edge_key(tri[i], tri[(i + 1) % 3]), static_cast<int>(t));
      require(fresh, "edge used twice with the same orientation");
    }
  }

  // edges without a twin are exactly the boundary edges
  std::size_t open_edges = 0;
  for (const auto& [key, t] : directed) {
    const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    if (!directed.count(edge_key(b, a))) ++open_edges;
  }
  require(open_edges == boundary_edges_.size(), "boundary edge list does not match the triangulation");

  const int components = static_cast<int>(hole_areas_.size()) + 1;
  vertex_component_.assign(vertices_.size(), -1);
  std::vector<int> next(vertices_.size(), -1);
  std::vector<int> incoming(vertices_.size(), 0);
  for (const BoundaryEdge& e : boundary_edges_) {
    require(e.component >= 0 && e.component < components, "boundary component id out of range");
    require(e.v[0] >= 0 && e.v[0] < nv && e.v[1] >= 0 && e.v[1] < nv, "boundary vertex out of range");
    require(directed.count(edge_key(e.v[0], e.v[1])) && !directed.count(edge_key(e.v[1], e.v[0])),
            "boundary edge is not an oriented hull edge");
    for (int v : e.v) {
      require(vertex_component_[v] < 0 || vertex_component_[v] == e.component,
              "boundary vertex shared by two components");
      vertex_component_[v] = e.component;
    }
    require(next[e.v[0]] < 0, "boundary loops are not simple");
    next[e.v[0]] = e.v[1];
    ++incoming[e.v[1]];
  }

  std::vector<int> loops(components, 0);
  std::vector<char> seen(vertices_.size(), 0);
  for (const BoundaryEdge& e : boundary_edges_) {
    if (seen[e.v[0]]) continue;
    int v = e.v[0];
    while (!seen[v]) {
      require(incoming[v] == 1 && next[v] >= 0, "boundary loops are not closed");
      seen[v] = 1;
      v = next[v];
    }
    require(v == e.v[0], "boundary loops are not closed");
    ++loops[e.component];
  }
  for (int c = 0; c < components; ++c)
    require(loops[c] == 1, "component " + std::to_string(c) + " must form exactly one loop");
  for (double a : hole_areas_) require(std::isfinite(a) && a > 0.0, "hole areas must be positive");
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

Point2 Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return {(vertices_[tri[0]][0] + vertices_[tri[1]][0] + vertices_[tri[2]][0]) / 3.0,
          (vertices_[tri[0]][1] + vertices_[tri[1]][1] + vertices_[tri[2]][1]) / 3.0};
}

std::vector<double> Mesh::polygonal_loop_areas() const {
  std::vector<double> out(component_count(), 0.0);
  for (const BoundaryEdge& e : boundary_edges_) {
    const Point2& a = vertices_[e.v[0]];
    const Point2& b = vertices_[e.v[1]];
    out[e.component] += 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  for (double& a : out) a = std::abs(a);
  return out;
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& tri : triangles_)
    for (int i = 0; i < 3; ++i) m = std::max(m, dist(vertices_[tri[i]], vertices_[tri[(i + 1) % 3]]));
  return m;
}

double Mesh::min_angle_degrees() const {
  double m = 180.0;
  for (const auto& tri : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const Point2& o = vertices_[tri[i]];
      const Point2& a = vertices_[tri[(i + 1) % 3]];
      const Point2& b = vertices_[tri[(i + 2) % 3]];
      const double ux = a[0] - o[0], uy = a[1] - o[1], vx = b[0] - o[0], vy = b[1] - o[1];
      const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      m = std::min(m, ang * 180.0 / std::numbers::pi);
    }
  }
  return m;
}

QuadratureRule quadrature_rule(int order) {
  QuadratureRule r;
  r.order = order;
  if (order <= 1) {
    r.order = 1;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {1.0};
  } else if (order == 2) {
    r.points = {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
    r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  } else if (order <= 4) {
    r.order = 4;
    const double a = 0.445948490915965, b = 1.0 - 2.0 * a, wa = 0.223381589678011;
    const double c = 0.091576213509771, d = 1.0 - 2.0 * c, wc = 0.109951743655322;
    r.points = {{b, a, a}, {a, b, a}, {a, a, b}, {d, c, c}, {c, d, c}, {c, c, d}};
    r.weights = {wa, wa, wa, wc, wc, wc};
  } else {
    throw std::invalid_argument("quadrature order must be 1, 2 or 4");
  }
  return r;
}

ScalarField::ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw std::invalid_argument("scalar field needs a mesh");
  if (values_.size() != mesh_->vertex_count())
    throw std::invalid_argument("field/mesh mismatch: " + std::to_string(values_.size()) + " values for " +
                                std::to_string(mesh_->vertex_count()) + " vertices");
}

Point2 ScalarField::gradient(std::size_t t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& g = mesh_->hat_gradients(t);
  Point2 out{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    out[0] += values_[tri[i]] * g[i][0];
    out[1] += values_[tri[i]] * g[i][1];
  }
  return out;
}

double ScalarField::value_at(std::size_t t, const std::array<double, 3>& bary) const {
  const auto& tri = mesh_->triangles()[t];
  return bary[0] * values_[tri[0]] + bary[1] * values_[tri[1]] + bary[2] * values_[tri[2]];
}

double integrate_field(const Mesh& mesh, Integrand integrand, const ScalarField& field, double p,
                       const QuadratureRule& rule) {
  if (&field.mesh() != &mesh) throw std::invalid_argument("field/mesh mismatch: field lives on another mesh");
  double total = 0.0;
  const auto& verts = mesh.vertices();
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.area(t);
    switch (integrand) {
      case Integrand::field:
        total += area * (field[tri[0]] + field[tri[1]] + field[tri[2]]) / 3.0;
        break;
      case Integrand::grad_norm_pow: {
        if (!(p >= 1.0)) throw std::invalid_argument("grad_norm_pow needs p >= 1");
        const Point2 g = field.gradient(t);
        total += area * std::pow(std::hypot(g[0], g[1]), p);
        break;
      }
      case Integrand::field_times_moment: {
        double s = 0.0;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
          const auto& b = rule.points[k];
          const double x = b[0] * verts[tri[0]][0] + b[1] * verts[tri[1]][0] + b[2] * verts[tri[2]][0];
          const double y = b[0] * verts[tri[0]][1] + b[1] * verts[tri[1]][1] + b[2] * verts[tri[2]][1];
          s += rule.weights[k] * field.value_at(t, b) * 0.5 * (x * x + y * y);
        }
        total += area * s;
        break;
      }
      case Integrand::x_dot_grad: {
        const Point2 g = field.gradient(t);
        double s = 0.0;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
          const auto& b = rule.points[k];
          const double x = b[0] * verts[tri[0]][0] + b[1] * verts[tri[1]][0] + b[2] * verts[tri[2]][0];
          const double y = b[0] * verts[tri[0]][1] + b[1] * verts[tri[1]][1] + b[2] * verts[tri[2]][1];
          s += rule.weights[k] * (x * g[0] + y * g[1]);
        }
        total += area * s;
        break;
      }
    }
  }
  return total;
}

ScalarField boundary_distance_field(const std::shared_ptr<const Mesh>& mesh) {
  if (!mesh->domain()) throw std::invalid_argument("boundary distance needs a mesh with a backing domain");
  const auto curves = boundary_curves(*mesh->domain());
  std::vector<double> values(mesh->vertex_count());
  for (std::size_t v = 0; v < values.size(); ++v)
    values[v] = mesh->is_boundary(static_cast<int>(v)) ? 0.0 : boundary_distance(curves, mesh->vertices()[v]);
  return ScalarField(mesh, std::move(values));
}

nlohmann::json to_json(const Mesh& mesh) {
  nlohmann::json doc;
  doc["vertices"] = mesh.vertices();
  doc["triangles"] = mesh.triangles();
  nlohmann::json edges = nlohmann::json::array();
  for (const BoundaryEdge& e : mesh.boundary_edges()) edges.push_back({e.v[0], e.v[1], e.component});
  doc["boundary_edges"] = std::move(edges);
  doc["hole_areas"] = mesh.hole_areas();
  doc["target_h"] = mesh.target_h();
  if (mesh.domain()) doc["domain"] = to_json(*mesh.domain());
  return doc;
}

Mesh mesh_from_json(const nlohmann::json& doc) {
  try {
    auto vertices = doc.at("vertices").get<std::vector<Point2>>();
    auto triangles = doc.at("triangles").get<std::vector<std::array<int, 3>>>();
    std::vector<BoundaryEdge> edges;
    for (const auto& e : doc.at("boundary_edges")) {
      const auto row = e.get<std::array<int, 3>>();
      edges.push_back({{row[0], row[1]}, row[2]});
    }
    auto holes = doc.at("hole_areas").get<std::vector<double>>();
    const double h = doc.at("target_h").get<double>();
    std::optional<DomainSpec> domain;
    if (doc.contains("domain")) domain = domain_from_json(doc.at("domain"));
    return Mesh(std::move(vertices), std::move(triangles), std::move(edges), std::move(holes), h,
                std::move(domain));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid mesh document: ") + e.what());
  }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path);
  out << to_json(mesh).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing mesh file " + path);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read mesh file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid mesh document " + path + ": " + e.what());
  }
  return mesh_from_json(doc);
}

}  // namespace bergman
