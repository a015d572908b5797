#include <bergman/delaunay.hpp>
#include <bergman/mesh.hpp>
#include <bergman/predicates.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace bergman {

namespace {

constexpr double kRefineAngleDeg = 21.5;
constexpr double kMinAngleDeg = 20.0;
constexpr std::size_t kMaxSteiner = 4'000'000;

std::uint64_t undirected_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::uint64_t directed_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double min_angle(const Point2& a, const Point2& b, const Point2& c) {
  const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
  // the smallest angle is opposite the shortest edge
  double s = std::min({la, lb, lc});
  double x, y;
  if (s == la) {
    x = lb;
    y = lc;
  } else if (s == lb) {
    x = la;
    y = lc;
  } else {
    x = la;
    y = lb;
  }
  const double cosv = std::clamp((x * x + y * y - s * s) / (2.0 * x * y), -1.0, 1.0);
  return std::acos(cosv) * 180.0 / std::numbers::pi;
}

struct Segment {
  int a, b;   // generator vertex ids, domain on the left of a -> b
  int curve;  // index into the boundary curves
  bool alive = true;
};

class Generator {
 public:
  Generator(const DomainSpec& spec, double h) : spec_(spec), h_(h), curves_(boundary_curves(spec)) {}

  Mesh run() {
    sample_boundary();
    fill_interior();
    build();
    refine();
    for (int sweep = 0; sweep < 2; ++sweep) smooth();
    build();
    refine();
    return assemble();
  }

 private:
  // ---- geometry of the input curves --------------------------------------

  int add_point(const Point2& p, int component) {
    pts_.push_back(p);
    component_.push_back(component);
    return static_cast<int>(pts_.size()) - 1;
  }

  void sample_boundary() {
    for (std::size_t ci = 0; ci < curves_.size(); ++ci) {
      const BoundaryCurve& c = curves_[ci];
      std::vector<int> loop;
      if (c.is_circle) {
        const int n = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * c.radius / h_)));
        const double dir = c.component == 0 ? 1.0 : -1.0;
        for (int k = 0; k < n; ++k) {
          const double th = dir * 2.0 * std::numbers::pi * k / n;
          loop.push_back(add_point({c.center[0] + c.radius * std::cos(th), c.center[1] + c.radius * std::sin(th)},
                                   c.component));
        }
      } else {
        const auto& poly = c.polygon;
        for (std::size_t i = 0; i < poly.size(); ++i) {
          const Point2& a = poly[i];
          const Point2& b = poly[(i + 1) % poly.size()];
          const int m = std::max(1, static_cast<int>(std::ceil(dist(a, b) / h_ - 1e-9)));
          for (int k = 0; k < m; ++k) {
            const double t = static_cast<double>(k) / m;
            loop.push_back(add_point({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}, c.component));
          }
        }
      }
      for (std::size_t i = 0; i < loop.size(); ++i)
        segs_.push_back({loop[i], loop[(i + 1) % loop.size()], static_cast<int>(ci)});
    }
  }

  void fill_interior() {
    Point2 lo = pts_[0], hi = pts_[0];
    for (const Point2& p : pts_) {
      lo = {std::min(lo[0], p[0]), std::min(lo[1], p[1])};
      hi = {std::max(hi[0], p[0]), std::max(hi[1], p[1])};
    }
    const double dy = h_ * std::sqrt(3.0) / 2.0;
    int row = 0;
    for (double y = lo[1] + 0.5 * dy; y < hi[1]; y += dy, ++row) {
      const double shift = (row % 2) ? 0.5 * h_ : 0.0;
      for (double x = lo[0] + 0.25 * h_ + shift; x < hi[0]; x += h_) {
        const Point2 p{x, y};
        if (contains(spec_, p) && boundary_distance(curves_, p) >= 0.55 * h_) add_point(p, -1);
      }
    }
  }

  Point2 split_point(const Segment& s) const {
    const Point2& a = pts_[s.a];
    const Point2& b = pts_[s.b];
    const BoundaryCurve& c = curves_[s.curve];
    if (!c.is_circle) return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    const double mx = 0.5 * (a[0] + b[0]) - c.center[0], my = 0.5 * (a[1] + b[1]) - c.center[1];
    const double len = std::hypot(mx, my);
    return {c.center[0] + c.radius * mx / len, c.center[1] + c.radius * my / len};
  }

  // ---- triangulation state ----------------------------------------------

  void build() {
    std::vector<int> keep;
    if (dt_) {
      // drop free vertices that ended up outside the domain
      std::vector<char> used(pts_.size(), 0);
      for (std::size_t t = 0; t < inside_.size(); ++t) {
        if (!inside_[t]) continue;
        for (int v : dt_->triangles()[t].v) used[ours_of_[v]] = 1;
      }
      for (std::size_t i = 0; i < pts_.size(); ++i)
        if (component_[i] >= 0 || used[i]) keep.push_back(static_cast<int>(i));
    }
    if (!keep.empty() && keep.size() != pts_.size()) {
      std::vector<int> remap(pts_.size(), -1);
      std::vector<Point2> pts;
      std::vector<int> comp;
      for (int i : keep) {
        remap[i] = static_cast<int>(pts.size());
        pts.push_back(pts_[i]);
        comp.push_back(component_[i]);
      }
      pts_ = std::move(pts);
      component_ = std::move(comp);
      for (Segment& s : segs_) {
        s.a = remap[s.a];
        s.b = remap[s.b];
      }
    }
    segs_.erase(std::remove_if(segs_.begin(), segs_.end(), [](const Segment& s) { return !s.alive; }),
                segs_.end());

    Point2 lo = pts_[0], hi = pts_[0];
    for (const Point2& p : pts_) {
      lo = {std::min(lo[0], p[0]), std::min(lo[1], p[1])};
      hi = {std::max(hi[0], p[0]), std::max(hi[1], p[1])};
    }
    dt_ = std::make_unique<Delaunay>(lo, hi);
    dt_of_.assign(pts_.size(), -1);
    ours_of_.assign(Delaunay::kSuperVertices, -1);
    for (std::size_t i : hilbert_order(pts_)) insert_existing(static_cast<int>(i));
    rebuild_grid();
  }

  void insert_existing(int i) {
    const int d = dt_->insert(pts_[i]);
    if (d < static_cast<int>(ours_of_.size())) throw MeshingError("mesh generator produced duplicate vertices");
    ours_of_.push_back(i);
    dt_of_[i] = d;
  }

  int insert_new(const Point2& p, int component) {
    const int i = add_point(p, component);
    dt_of_.push_back(-1);
    insert_existing(i);
    return i;
  }

  void rebuild_grid() {
    grid_.clear();
    for (std::size_t s = 0; s < segs_.size(); ++s)
      if (segs_[s].alive) grid_add(static_cast<int>(s));
  }

  std::uint64_t cell_of(const Point2& p) const {
    const auto ix = static_cast<std::int64_t>(std::floor(p[0] / h_));
    const auto iy = static_cast<std::int64_t>(std::floor(p[1] / h_));
    return (static_cast<std::uint64_t>(ix + (1 << 30)) << 32) | static_cast<std::uint32_t>(iy + (1 << 30));
  }

  void grid_add(int s) {
    const Point2& a = pts_[segs_[s].a];
    const Point2& b = pts_[segs_[s].b];
    grid_[cell_of({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])})].push_back(s);
  }

  // alive segments whose diametral circle strictly contains p
  std::vector<int> encroached_by(const Point2& p) const {
    std::vector<int> out;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const auto it = grid_.find(cell_of({p[0] + dx * h_, p[1] + dy * h_}));
        if (it == grid_.end()) continue;
        for (int s : it->second) {
          const Segment& seg = segs_[s];
          if (!seg.alive) continue;
          const Point2& a = pts_[seg.a];
          const Point2& b = pts_[seg.b];
          // angle apb obtuse  <=>  (a - p).(b - p) < 0
          if ((a[0] - p[0]) * (b[0] - p[0]) + (a[1] - p[1]) * (b[1] - p[1]) < 0.0) out.push_back(s);
        }
      }
    }
    return out;
  }

  void split_segment(int s) {
    const Segment seg = segs_[s];
    segs_[s].alive = false;
    const int comp = curves_[seg.curve].component;
    const int m = insert_new(split_point(seg), comp);
    segs_.push_back({seg.a, m, seg.curve});
    grid_add(static_cast<int>(segs_.size()) - 1);
    segs_.push_back({m, seg.b, seg.curve});
    grid_add(static_cast<int>(segs_.size()) - 1);
    if (++steiner_ > kMaxSteiner) throw MeshingError("mesh refinement did not terminate");
  }

  // split segments until each one is an edge of the triangulation
  void recover_segments() {
    for (int sweep = 0;; ++sweep) {
      if (sweep > 64) throw MeshingError("boundary segment recovery failed");
      std::unordered_set<std::uint64_t> edges;
      edges.reserve(3 * dt_->triangles().size());
      for (const auto& t : dt_->triangles()) {
        if (!t.alive) continue;
        for (int i = 0; i < 3; ++i) edges.insert(undirected_key(t.v[i], t.v[(i + 1) % 3]));
      }
      std::vector<int> missing;
      for (std::size_t s = 0; s < segs_.size(); ++s) {
        const Segment& seg = segs_[s];
        if (seg.alive && !edges.count(undirected_key(dt_of_[seg.a], dt_of_[seg.b])))
          missing.push_back(static_cast<int>(s));
      }
      if (missing.empty()) return;
      for (int s : missing) split_segment(s);
    }
  }

  // parity flood fill across constraint edges, starting outside
  void classify() {
    const auto& tris = dt_->triangles();
    std::unordered_set<std::uint64_t> constraint;
    for (const Segment& s : segs_)
      if (s.alive) constraint.insert(undirected_key(dt_of_[s.a], dt_of_[s.b]));
    inside_.assign(tris.size(), 0);
    std::vector<int> state(tris.size(), -1);
    std::deque<int> queue;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!tris[t].alive) continue;
      for (int v : tris[t].v) {
        if (dt_->is_super(v)) {
          state[t] = 0;
          queue.push_back(static_cast<int>(t));
          break;
        }
      }
    }
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      for (int i = 0; i < 3; ++i) {
        const int n = tris[t].nb[i];
        if (n < 0 || state[n] >= 0) continue;
        const bool crossing =
            constraint.count(undirected_key(tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3])) > 0;
        state[n] = crossing ? 1 - state[t] : state[t];
        queue.push_back(n);
      }
    }
    for (std::size_t t = 0; t < tris.size(); ++t) inside_[t] = tris[t].alive && state[t] == 1;
  }

  bool is_bad(const Delaunay::Triangle& t) const {
    const Point2& a = dt_->points()[t.v[0]];
    const Point2& b = dt_->points()[t.v[1]];
    const Point2& c = dt_->points()[t.v[2]];
    if (min_angle(a, b, c) < kRefineAngleDeg) return true;
    return std::max({dist(a, b), dist(b, c), dist(c, a)}) > 1.5 * h_;
  }

  bool split_encroached_segments() {
    const auto& tris = dt_->triangles();
    std::vector<int> to_split;
    std::unordered_map<std::uint64_t, int> owner;
    owner.reserve(3 * tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!inside_[t]) continue;
      for (int i = 0; i < 3; ++i) owner[directed_key(tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3])] = static_cast<int>(t);
    }
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      const Segment& seg = segs_[s];
      if (!seg.alive) continue;
      const int da = dt_of_[seg.a], db = dt_of_[seg.b];
      const auto it = owner.find(directed_key(da, db));
      if (it == owner.end()) continue;
      const auto& t = tris[it->second];
      int apex = -1;
      for (int v : t.v)
        if (v != da && v != db) apex = v;
      const Point2& p = dt_->points()[apex];
      const Point2& a = pts_[seg.a];
      const Point2& b = pts_[seg.b];
      if ((a[0] - p[0]) * (b[0] - p[0]) + (a[1] - p[1]) * (b[1] - p[1]) < 0.0)
        to_split.push_back(static_cast<int>(s));
    }
    for (int s : to_split) split_segment(s);
    return !to_split.empty();
  }

  void refine() {
    for (;;) {
      recover_segments();
      classify();
      if (split_encroached_segments()) continue;

      const auto& tris = dt_->triangles();
      std::vector<std::array<int, 3>> bad;
      for (std::size_t t = 0; t < tris.size(); ++t)
        if (inside_[t] && is_bad(tris[t])) bad.push_back(tris[t].v);
      if (bad.empty()) return;

      std::size_t progress = 0;
      for (const auto& v : bad) {
        // skip triangles destroyed by earlier insertions in this pass
        const Point2 c = circumcenter(dt_->points()[v[0]], dt_->points()[v[1]], dt_->points()[v[2]]);
        if (!still_present(v)) continue;
        const auto enc = encroached_by(c);
        if (!enc.empty()) {
          for (int s : enc)
            if (segs_[s].alive) split_segment(s);
          ++progress;
          continue;
        }
        if (!contains(spec_, c)) continue;
        insert_new(c, -1);
        ++progress;
        if (++steiner_ > kMaxSteiner) throw MeshingError("mesh refinement did not terminate");
      }
      if (progress == 0) throw MeshingError("mesh refinement stalled before reaching the angle bound");
    }
  }

  bool still_present(const std::array<int, 3>& v) const {
    const auto& pts = dt_->points();
    const Point2 c{(pts[v[0]][0] + pts[v[1]][0] + pts[v[2]][0]) / 3.0,
                   (pts[v[0]][1] + pts[v[1]][1] + pts[v[2]][1]) / 3.0};
    const auto& t = dt_->triangles()[dt_->locate(c)];
    return std::is_permutation(t.v.begin(), t.v.end(), v.begin());
  }

  void smooth() {
    const auto& tris = dt_->triangles();
    std::vector<Point2> sum(pts_.size(), {0.0, 0.0});
    std::vector<int> count(pts_.size(), 0);
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!inside_[t]) continue;
      for (int i = 0; i < 3; ++i) {
        const int a = tris[t].v[i], b = tris[t].v[(i + 1) % 3];
        if (!seen.insert(undirected_key(a, b)).second) continue;
        const int oa = ours_of_[a], ob = ours_of_[b];
        sum[oa][0] += pts_[ob][0];
        sum[oa][1] += pts_[ob][1];
        ++count[oa];
        sum[ob][0] += pts_[oa][0];
        sum[ob][1] += pts_[oa][1];
        ++count[ob];
      }
    }
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (component_[i] >= 0 || count[i] == 0) continue;
      const Point2 p{sum[i][0] / count[i], sum[i][1] / count[i]};
      if (contains(spec_, p) && boundary_distance(curves_, p) >= 0.25 * h_) pts_[i] = p;
    }
    build();
    recover_segments();
    classify();
  }

  Mesh assemble() {
    const auto& tris = dt_->triangles();
    std::vector<int> index(pts_.size(), -1);
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!inside_[t]) continue;
      std::array<int, 3> tri;
      for (int i = 0; i < 3; ++i) {
        const int o = ours_of_[tris[t].v[i]];
        if (index[o] < 0) {
          index[o] = static_cast<int>(vertices.size());
          vertices.push_back(pts_[o]);
        }
        tri[i] = index[o];
      }
      triangles.push_back(tri);
    }
    std::vector<BoundaryEdge> edges;
    for (const Segment& s : segs_) {
      if (!s.alive) continue;
      if (index[s.a] < 0 || index[s.b] < 0) throw MeshingError("boundary vertex missing from the mesh");
      edges.push_back({{index[s.a], index[s.b]}, curves_[s.curve].component});
    }
    Mesh mesh(std::move(vertices), std::move(triangles), std::move(edges), hole_areas(spec_), h_, spec_);
    if (mesh.min_angle_degrees() < kMinAngleDeg)
      throw MeshingError("mesh refinement failed to reach the minimum angle of 20 degrees");
    if (mesh.max_edge_length() > 2.0 * h_) throw MeshingError("mesh has edges longer than 2h");
    return mesh;
  }

  const DomainSpec& spec_;
  double h_;
  std::vector<BoundaryCurve> curves_;

  std::vector<Point2> pts_;
  std::vector<int> component_;  // boundary component or -1 for free vertices
  std::vector<Segment> segs_;

  std::unique_ptr<Delaunay> dt_;
  std::vector<int> dt_of_;
  std::vector<int> ours_of_;
  std::vector<char> inside_;
  std::unordered_map<std::uint64_t, std::vector<int>> grid_;
  std::size_t steiner_ = 0;
};

double narrowest_feature(const DomainSpec& spec) {
  double f = std::numeric_limits<double>::infinity();
  const auto curves = boundary_curves(spec);
  for (const BoundaryCurve& c : curves) {
    if (c.is_circle) {
      f = std::min(f, c.radius);
      continue;
    }
    Point2 lo = c.polygon[0], hi = c.polygon[0];
    for (const Point2& p : c.polygon) {
      lo = {std::min(lo[0], p[0]), std::min(lo[1], p[1])};
      hi = {std::max(hi[0], p[0]), std::max(hi[1], p[1])};
    }
    f = std::min({f, hi[0] - lo[0], hi[1] - lo[1]});
  }
  if (const auto* a = std::get_if<Annulus>(&spec.shape())) f = std::min(f, a->r_outer - a->r_inner);
  return f;
}

}  // namespace

Mesh generate_mesh(const DomainSpec& spec, double h) {
  if (spec.dimension() != 2) throw std::invalid_argument("generate_mesh: only planar domains can be meshed");
  if (!(std::isfinite(h) && h > 0.0)) throw std::invalid_argument("generate_mesh: h must be positive");
  if (h > 0.5 * narrowest_feature(spec))
    throw std::invalid_argument("generate_mesh: h must be below half the narrowest feature of the domain");
  return Generator(spec, h).run();
}

}  // namespace bergman
