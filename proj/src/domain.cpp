#include <bergman/domain.hpp>
#include <bergman/oracles.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bergman {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
         std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid domain: " + what);
}

bool loop_is_simple(const Loop& loop) {
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = loop[i];
    const Point2& b = loop[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share an endpoint by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, loop[j], loop[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool loops_cross(const Loop& u, const Loop& v) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (segments_intersect(u[i], u[(i + 1) % u.size()], v[j], v[(j + 1) % v.size()]))
        return true;
  return false;
}

void validate_center(const std::vector<double>& center, int dimension) {
  require(static_cast<int>(center.size()) == dimension,
          "center must have one coordinate per dimension");
  for (double c : center) require(std::isfinite(c), "center must be finite");
}

Loop rectangle_loop(const Rectangle& r) {
  return {r.corner_min, {r.corner_max[0], r.corner_min[1]}, r.corner_max,
          {r.corner_min[0], r.corner_max[1]}};
}

std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

double signed_area(const Loop& loop) {
  double twice = 0.0;
  for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
    const Point2& a = loop[i];
    const Point2& b = loop[(i + 1) % n];
    twice += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * twice;
}

bool point_in_loop(const Loop& loop, const Point2& p) {
  bool inside = false;
  for (std::size_t i = 0, n = loop.size(), j = n - 1; i < n; j = i++) {
    const Point2& a = loop[i];
    const Point2& b = loop[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

DomainSpec::DomainSpec(Shape shape, int dimension) : shape_(std::move(shape)), dimension_(dimension) {
  require(dimension_ >= 2, "dimension must be >= 2");
  std::visit(
      overloaded{
          [&](const Disk& d) {
            validate_center(d.center, dimension_);
            require(std::isfinite(d.radius) && d.radius > 0.0, "disk radius must be positive");
          },
          [&](const Annulus& a) {
            validate_center(a.center, dimension_);
            require(std::isfinite(a.r_inner) && a.r_inner > 0.0, "annulus r_inner must be positive");
            require(std::isfinite(a.r_outer) && a.r_inner < a.r_outer,
                    "annulus requires r_inner < r_outer");
          },
          [&](const Rectangle& r) {
            require(dimension_ == 2, "rectangles are planar");
            require(r.corner_min[0] < r.corner_max[0] && r.corner_min[1] < r.corner_max[1],
                    "rectangle corner_min must be below-left of corner_max");
          },
          [&](const PolygonWithHoles& poly) {
            require(dimension_ == 2, "polygons are planar");
            require(poly.outer.size() >= 3, "outer loop needs at least 3 vertices");
            require(loop_is_simple(poly.outer), "outer loop is not simple");
            require(signed_area(poly.outer) > 0.0, "outer loop must be counterclockwise");
            for (std::size_t i = 0; i < poly.holes.size(); ++i) {
              const Loop& hole = poly.holes[i];
              require(hole.size() >= 3, "hole loop needs at least 3 vertices");
              require(loop_is_simple(hole), "hole loop is not simple");
              require(signed_area(hole) < 0.0, "hole loops must be clockwise");
              require(!loops_cross(poly.outer, hole), "hole touches the outer loop");
              for (const Point2& v : hole)
                require(point_in_loop(poly.outer, v), "hole is not inside the outer loop");
              for (std::size_t j = 0; j < i; ++j) {
                const Loop& other = poly.holes[j];
                require(!loops_cross(hole, other), "holes intersect");
                require(!point_in_loop(other, hole[0]) && !point_in_loop(hole, other[0]),
                        "holes are nested");
              }
            }
          },
      },
      shape_);
}

DomainKind DomainSpec::kind() const {
  return static_cast<DomainKind>(shape_.index());
}

std::size_t DomainSpec::hole_count() const {
  return std::visit(overloaded{
                        [](const Annulus&) -> std::size_t { return 1; },
                        [](const PolygonWithHoles& p) -> std::size_t { return p.holes.size(); },
                        [](const auto&) -> std::size_t { return 0; },
                    },
                    shape_);
}

double DomainSpec::volume() const {
  const int n = dimension_;
  return std::visit(
      overloaded{
          [n](const Disk& d) { return unit_ball_volume(n) * std::pow(d.radius, n); },
          [n](const Annulus& a) {
            return unit_ball_volume(n) * (std::pow(a.r_outer, n) - std::pow(a.r_inner, n));
          },
          [](const Rectangle& r) {
            return (r.corner_max[0] - r.corner_min[0]) * (r.corner_max[1] - r.corner_min[1]);
          },
          [](const PolygonWithHoles& p) {
            double area = signed_area(p.outer);
            for (const Loop& h : p.holes) area += signed_area(h);  // holes are clockwise
            return area;
          },
      },
      shape_);
}

std::string DomainSpec::name() const {
  std::string base = std::visit(
      overloaded{
          [](const Disk& d) { return "disk(r=" + fmt_num(d.radius) + ")"; },
          [](const Annulus& a) {
            return "annulus(" + fmt_num(a.r_inner) + ".." + fmt_num(a.r_outer) + ")";
          },
          [](const Rectangle& r) {
            return "rectangle(" + fmt_num(r.corner_max[0] - r.corner_min[0]) + "x" +
                   fmt_num(r.corner_max[1] - r.corner_min[1]) + ")";
          },
          [](const PolygonWithHoles& p) {
            return "polygon(" + std::to_string(p.outer.size()) + " vertices, " +
                   std::to_string(p.holes.size()) + " holes)";
          },
      },
      shape_);
  if (dimension_ != 2) base += "[N=" + std::to_string(dimension_) + "]";
  return base;
}

DomainSpec DomainSpec::scaled(double s) const {
  require(std::isfinite(s) && s > 0.0, "scale factor must be positive");
  auto scale_vec = [s](std::vector<double> v) {
    for (double& x : v) x *= s;
    return v;
  };
  auto scale_pt = [s](Point2 p) { return Point2{s * p[0], s * p[1]}; };
  auto scale_loop = [&](Loop l) {
    for (Point2& p : l) p = scale_pt(p);
    return l;
  };
  Shape out = std::visit(
      overloaded{
          [&](const Disk& d) -> Shape { return Disk{scale_vec(d.center), s * d.radius}; },
          [&](const Annulus& a) -> Shape {
            return Annulus{scale_vec(a.center), s * a.r_inner, s * a.r_outer};
          },
          [&](const Rectangle& r) -> Shape {
            return Rectangle{scale_pt(r.corner_min), scale_pt(r.corner_max)};
          },
          [&](const PolygonWithHoles& p) -> Shape {
            PolygonWithHoles q{scale_loop(p.outer), {}};
            for (const Loop& h : p.holes) q.holes.push_back(scale_loop(h));
            return q;
          },
      },
      shape_);
  return DomainSpec(std::move(out), dimension_);
}

DomainSpec make_disk(double radius, Point2 center) {
  return DomainSpec(Disk{{center[0], center[1]}, radius});
}

DomainSpec make_annulus(double r_inner, double r_outer, Point2 center) {
  return DomainSpec(Annulus{{center[0], center[1]}, r_inner, r_outer});
}

DomainSpec make_rectangle(Point2 corner_min, Point2 corner_max) {
  return DomainSpec(Rectangle{corner_min, corner_max});
}

DomainSpec make_unit_square() { return make_rectangle({0.0, 0.0}, {1.0, 1.0}); }

DomainSpec make_polygon(Loop outer, std::vector<Loop> holes) {
  return DomainSpec(PolygonWithHoles{std::move(outer), std::move(holes)});
}

std::vector<BoundaryCurve> boundary_curves(const DomainSpec& spec) {
  require(spec.dimension() == 2, "boundary curves need a planar domain");
  std::vector<BoundaryCurve> out;
  auto circle = [&out](int component, const std::vector<double>& c, double r) {
    BoundaryCurve b;
    b.component = component;
    b.is_circle = true;
    b.center = {c[0], c[1]};
    b.radius = r;
    out.push_back(std::move(b));
  };
  auto polygon = [&out](int component, Loop loop) {
    BoundaryCurve b;
    b.component = component;
    b.polygon = std::move(loop);
    out.push_back(std::move(b));
  };
  std::visit(overloaded{
                 [&](const Disk& d) { circle(0, d.center, d.radius); },
                 [&](const Annulus& a) {
                   circle(0, a.center, a.r_outer);
                   circle(1, a.center, a.r_inner);
                 },
                 [&](const Rectangle& r) { polygon(0, rectangle_loop(r)); },
                 [&](const PolygonWithHoles& p) {
                   polygon(0, p.outer);
                   for (std::size_t i = 0; i < p.holes.size(); ++i)
                     polygon(static_cast<int>(i + 1), p.holes[i]);
                 },
             },
             spec.shape());
  return out;
}

std::vector<double> hole_areas(const DomainSpec& spec) {
  std::vector<double> out;
  for (const BoundaryCurve& b : boundary_curves(spec)) {
    if (b.component == 0) continue;
    out.push_back(b.is_circle ? std::numbers::pi * b.radius * b.radius : std::abs(signed_area(b.polygon)));
  }
  return out;
}

bool contains(const DomainSpec& spec, const Point2& p) {
  for (const BoundaryCurve& b : boundary_curves(spec)) {
    bool inside;
    if (b.is_circle)
      inside = std::hypot(p[0] - b.center[0], p[1] - b.center[1]) < b.radius;
    else
      inside = point_in_loop(b.polygon, p);
    if (inside != (b.component == 0)) return false;
  }
  return boundary_distance(spec, p) > 0.0;
}

namespace {

// nearest point of a boundary curve to p
Point2 nearest_on_curve(const BoundaryCurve& b, const Point2& p) {
  if (b.is_circle) {
    const double dx = p[0] - b.center[0], dy = p[1] - b.center[1];
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return {b.center[0] + b.radius, b.center[1]};
    return {b.center[0] + b.radius * dx / len, b.center[1] + b.radius * dy / len};
  }
  Point2 best = b.polygon.front();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = b.polygon.size(); i < n; ++i) {
    const Point2& a = b.polygon[i];
    const Point2& c = b.polygon[(i + 1) % n];
    const double ex = c[0] - a[0], ey = c[1] - a[1];
    double t = ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / (ex * ex + ey * ey);
    t = std::clamp(t, 0.0, 1.0);
    const Point2 q{a[0] + t * ex, a[1] + t * ey};
    const double d2 = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = q;
    }
  }
  return best;
}

Point2 nearest_boundary_point(const std::vector<BoundaryCurve>& curves, const Point2& p, double& dist) {
  dist = std::numeric_limits<double>::infinity();
  Point2 best{0.0, 0.0};
  for (const BoundaryCurve& b : curves) {
    const Point2 q = nearest_on_curve(b, p);
    const double d = b.is_circle
                         ? std::abs(std::hypot(p[0] - b.center[0], p[1] - b.center[1]) - b.radius)
                         : std::hypot(p[0] - q[0], p[1] - q[1]);
    if (d < dist) {
      dist = d;
      best = q;
    }
  }
  return best;
}

}  // namespace

double boundary_distance(const std::vector<BoundaryCurve>& curves, const Point2& p) {
  double d;
  nearest_boundary_point(curves, p, d);
  return d;
}

double boundary_distance(const DomainSpec& spec, const Point2& p) {
  return boundary_distance(boundary_curves(spec), p);
}

Point2 boundary_distance_gradient(const DomainSpec& spec, const Point2& p) {
  return boundary_distance_gradient(boundary_curves(spec), p);
}

Point2 boundary_distance_gradient(const std::vector<BoundaryCurve>& curves, const Point2& p) {
  double d;
  const Point2 q = nearest_boundary_point(curves, p, d);
  if (d == 0.0) return {0.0, 0.0};
  return {(p[0] - q[0]) / d, (p[1] - q[1]) / d};
}

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disk: return "disk";
    case DomainKind::annulus: return "annulus";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::polygon_with_holes: return "polygon_with_holes";
  }
  return "unknown";
}

nlohmann::json to_json(const DomainSpec& spec) {
  nlohmann::json params = std::visit(
      overloaded{
          [](const Disk& d) { return nlohmann::json{{"center", d.center}, {"radius", d.radius}}; },
          [](const Annulus& a) {
            return nlohmann::json{
                {"center", a.center}, {"r_inner", a.r_inner}, {"r_outer", a.r_outer}};
          },
          [](const Rectangle& r) {
            return nlohmann::json{{"corner_min", r.corner_min}, {"corner_max", r.corner_max}};
          },
          [](const PolygonWithHoles& p) {
            return nlohmann::json{{"outer", p.outer}, {"holes", p.holes}};
          },
      },
      spec.shape());
  return {{"kind", to_string(spec.kind())}, {"params", params}, {"dimension", spec.dimension()}};
}

DomainSpec domain_from_json(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const nlohmann::json& params = doc.at("params");
    const int dimension = doc.value("dimension", 2);
    auto center = [&]() {
      if (params.contains("center")) return params.at("center").get<std::vector<double>>();
      return std::vector<double>(static_cast<std::size_t>(dimension), 0.0);
    };
    if (kind == "disk") return DomainSpec(Disk{center(), params.at("radius").get<double>()}, dimension);
    if (kind == "annulus")
      return DomainSpec(Annulus{center(), params.at("r_inner").get<double>(),
                                params.at("r_outer").get<double>()},
                        dimension);
    if (kind == "rectangle")
      return DomainSpec(Rectangle{params.at("corner_min").get<Point2>(),
                                  params.at("corner_max").get<Point2>()},
                        dimension);
    if (kind == "polygon_with_holes") {
      PolygonWithHoles p;
      p.outer = params.at("outer").get<Loop>();
      if (params.contains("holes")) p.holes = params.at("holes").get<std::vector<Loop>>();
      return DomainSpec(std::move(p), dimension);
    }
    throw std::invalid_argument("invalid domain: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid domain document: ") + e.what());
  }
}

DomainSpec load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open domain file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
  return domain_from_json(doc);
}

}  // namespace bergman
