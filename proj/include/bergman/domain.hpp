#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace bergman {

using Point2 = std::array<double, 2>;
using Loop = std::vector<Point2>;

enum class DomainKind { disk, annulus, rectangle, polygon_with_holes };

struct Disk {
  std::vector<double> center;  // length == dimension
  double radius = 1.0;
};

struct Annulus {
  std::vector<double> center;
  double r_inner = 0.5;
  double r_outer = 1.0;
};

struct Rectangle {
  Point2 corner_min{0.0, 0.0};
  Point2 corner_max{1.0, 1.0};
};

/// Outer loop counterclockwise, hole loops clockwise. Loops are implicitly
/// closed (the last vertex connects back to the first).
struct PolygonWithHoles {
  Loop outer;
  std::vector<Loop> holes;
};

/// Declarative description of a bounded domain plus its ambient dimension.
///
/// Only disks and annuli are meaningful for dimension > 2 (radial oracles);
/// meshing requires dimension == 2.
class DomainSpec {
 public:
  using Shape = std::variant<Disk, Annulus, Rectangle, PolygonWithHoles>;

  DomainSpec(Shape shape, int dimension = 2);

  const Shape& shape() const { return shape_; }
  int dimension() const { return dimension_; }
  DomainKind kind() const;

  /// Number of bounded components of the complement.
  std::size_t hole_count() const;

  /// Exact Lebesgue measure of the domain.
  double volume() const;

  /// Short human-readable identifier, e.g. "disk(r=1)".
  std::string name() const;

  /// Same domain dilated about the origin by factor s > 0.
  DomainSpec scaled(double s) const;

 private:
  Shape shape_;
  int dimension_;
};

DomainSpec make_disk(double radius, Point2 center = {0.0, 0.0});
DomainSpec make_annulus(double r_inner, double r_outer, Point2 center = {0.0, 0.0});
DomainSpec make_rectangle(Point2 corner_min, Point2 corner_max);
DomainSpec make_unit_square();
DomainSpec make_polygon(Loop outer, std::vector<Loop> holes = {});

const char* to_string(DomainKind kind);

/// Signed shoelace area; positive for counterclockwise loops.
double signed_area(const Loop& loop);

/// Even-odd point in closed-polygon test (boundary points are unspecified).
bool point_in_loop(const Loop& loop, const Point2& p);

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// One closed boundary curve of a planar domain. Component 0 is the outer
/// boundary, 1..j the hole boundaries. Orientation keeps the domain on the
/// left: circles are traversed counterclockwise for the outer boundary and
/// clockwise around holes; polygon loops keep their stored orientation.
struct BoundaryCurve {
  int component = 0;
  bool is_circle = false;
  Point2 center{0.0, 0.0};
  double radius = 0.0;
  Loop polygon;
};

/// Boundary curves of a planar domain (dimension 2 only).
std::vector<BoundaryCurve> boundary_curves(const DomainSpec& spec);

/// Exact areas m(G_i) of the bounded complement components, in component order.
std::vector<double> hole_areas(const DomainSpec& spec);

/// True for points in the open planar domain.
bool contains(const DomainSpec& spec, const Point2& p);

/// Euclidean distance from p to the boundary curves.
double boundary_distance(const DomainSpec& spec, const Point2& p);

/// Gradient of the distance function at p: the unit vector from the nearest
/// boundary point to p (zero where the nearest point is not unique only in
/// the degenerate case p == nearest point or the centre of a circle).
Point2 boundary_distance_gradient(const DomainSpec& spec, const Point2& p);

// Same queries against precomputed curves (avoids rebuilding them per point).
double boundary_distance(const std::vector<BoundaryCurve>& curves, const Point2& p);
Point2 boundary_distance_gradient(const std::vector<BoundaryCurve>& curves, const Point2& p);

// JSON schema: {"kind": "...", "params": {...}, "dimension": N}
nlohmann::json to_json(const DomainSpec& spec);
DomainSpec domain_from_json(const nlohmann::json& doc);
DomainSpec load_domain(const std::string& path);

}  // namespace bergman
