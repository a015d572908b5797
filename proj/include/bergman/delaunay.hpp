#pragma once

#include <array>
#include <vector>

#include <bergman/domain.hpp>

namespace bergman {

/// Incremental Bowyer-Watson Delaunay triangulation with exact predicates.
///
/// Vertices 0..2 belong to an enclosing super-triangle; user vertices start
/// at index 3. Triangles are counterclockwise; nb[i] is the neighbour across
/// the edge opposite v[i] (-1 on the super-triangle hull).
class Delaunay {
 public:
  struct Triangle {
    std::array<int, 3> v;
    std::array<int, 3> nb;
    bool alive = true;
  };

  static constexpr int kSuperVertices = 3;

  Delaunay(const Point2& lo, const Point2& hi);

  /// Inserts p and returns its vertex index; returns the existing index when
  /// p coincides with a vertex already present.
  int insert(const Point2& p);

  /// Index of an alive triangle containing p (closed), by visibility walk.
  int locate(const Point2& p) const;

  const std::vector<Point2>& points() const { return points_; }
  const std::vector<Triangle>& triangles() const { return tris_; }
  bool is_super(int v) const { return v < kSuperVertices; }

 private:
  std::vector<Point2> points_;
  std::vector<Triangle> tris_;
  std::vector<int> free_;
  mutable int last_ = 0;

  // scratch buffers reused across insertions
  std::vector<int> cavity_;
  std::vector<int> stack_;
  std::vector<char> in_cavity_;
};

/// Orders points along a Hilbert curve for cache-friendly incremental insertion.
std::vector<std::size_t> hilbert_order(const std::vector<Point2>& pts);

}  // namespace bergman
