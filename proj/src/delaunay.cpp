#include <bergman/delaunay.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <bergman/predicates.hpp>

namespace bergman {

Delaunay::Delaunay(const Point2& lo, const Point2& hi) {
  const double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12});
  const double big = 64.0 * span;
  points_ = {{cx - 2.0 * big, cy - big}, {cx + 2.0 * big, cy - big}, {cx, cy + 2.0 * big}};
  tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
}

int Delaunay::locate(const Point2& p) const {
  int t = last_;
  if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
    t = 0;
    while (!tris_[t].alive) ++t;
  }
  unsigned state = 2463534242u;
  for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
    const Triangle& tri = tris_[t];
    // start from a pseudo-random edge so the walk cannot cycle
    state ^= state << 13;
    state ^= state >> 17;
    state ^= state << 5;
    const int start = static_cast<int>(state % 3u);
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = (start + k) % 3;
      const Point2& a = points_[tri.v[(i + 1) % 3]];
      const Point2& b = points_[tri.v[(i + 2) % 3]];
      if (orient2d(a, b, p) < 0) {
        next = tri.nb[i];
        break;
      }
    }
    if (next < 0) {
      last_ = t;
      return t;
    }
    t = next;
  }
  throw std::runtime_error("delaunay: point location failed");
}

int Delaunay::insert(const Point2& p) {
  const int start = locate(p);
  for (int v : tris_[start].v)
    if (points_[v] == p) return v;

  const int pv = static_cast<int>(points_.size());
  points_.push_back(p);

  // grow the cavity of triangles whose circumcircle contains p
  in_cavity_.resize(tris_.size(), 0);
  cavity_.clear();
  stack_.assign(1, start);
  in_cavity_[start] = 1;
  while (!stack_.empty()) {
    const int t = stack_.back();
    stack_.pop_back();
    cavity_.push_back(t);
    for (int n : tris_[t].nb) {
      if (n < 0 || in_cavity_[n]) continue;
      const auto& v = tris_[n].v;
      if (incircle(points_[v[0]], points_[v[1]], points_[v[2]], p) > 0) {
        in_cavity_[n] = 1;
        stack_.push_back(n);
      }
    }
  }

  // boundary edges of the cavity become fans to p
  struct Edge {
    int a, b, outside;
  };
  std::vector<Edge> rim;
  for (int t : cavity_) {
    const Triangle& tri = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const int n = tri.nb[i];
      if (n >= 0 && in_cavity_[n]) continue;
      rim.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], n});
    }
  }
  for (int t : cavity_) {
    in_cavity_[t] = 0;
    tris_[t].alive = false;
    free_.push_back(t);
  }

  std::unordered_map<int, int> by_first, by_second;
  by_first.reserve(rim.size() * 2);
  by_second.reserve(rim.size() * 2);
  std::vector<int> created;
  created.reserve(rim.size());
  for (const Edge& e : rim) {
    int t;
    if (!free_.empty()) {
      t = free_.back();
      free_.pop_back();
    } else {
      t = static_cast<int>(tris_.size());
      tris_.push_back({});
      in_cavity_.push_back(0);
    }
    tris_[t] = {{e.a, e.b, pv}, {-1, -1, e.outside}, true};
    if (e.outside >= 0) {
      Triangle& o = tris_[e.outside];
      for (int i = 0; i < 3; ++i) {
        const int oa = o.v[(i + 1) % 3], ob = o.v[(i + 2) % 3];
        if (oa == e.b && ob == e.a) o.nb[i] = t;
      }
    }
    by_first[e.a] = t;
    by_second[e.b] = t;
    created.push_back(t);
  }
  for (int t : created) {
    Triangle& tri = tris_[t];
    // edge (b, p) is opposite a; its twin is (p, b) in the triangle starting at b
    tri.nb[0] = by_first.at(tri.v[1]);
    // edge (p, a) is opposite b; its twin is (a, p) in the triangle ending at a
    tri.nb[1] = by_second.at(tri.v[0]);
  }
  last_ = created.front();
  return pv;
}

namespace {

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int bits) {
  std::uint64_t d = 0;
  for (std::uint32_t s = 1u << (bits - 1); s > 0; s >>= 1) {
    const std::uint32_t rx = (x & s) ? 1u : 0u;
    const std::uint32_t ry = (y & s) ? 1u : 0u;
    d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

}  // namespace

std::vector<std::size_t> hilbert_order(const std::vector<Point2>& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  if (pts.empty()) return order;
  Point2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = {std::min(lo[0], p[0]), std::min(lo[1], p[1])};
    hi = {std::max(hi[0], p[0]), std::max(hi[1], p[1])};
  }
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-300});
  constexpr int bits = 16;
  const double cells = static_cast<double>((1u << bits) - 1);
  std::vector<std::uint64_t> key(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto x = static_cast<std::uint32_t>((pts[i][0] - lo[0]) / span * cells);
    const auto y = static_cast<std::uint32_t>((pts[i][1] - lo[1]) / span * cells);
    key[i] = hilbert_index(x, y, bits);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return order;
}

}  // namespace bergman
