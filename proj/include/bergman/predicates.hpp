#pragma once

#include <bergman/domain.hpp>

namespace bergman {

/// Sign of the orientation determinant of (a, b, c): +1 counterclockwise,
/// -1 clockwise, 0 collinear. Exact: a floating-point filter falls back to
/// rational arithmetic when the result is uncertain.
int orient2d(const Point2& a, const Point2& b, const Point2& c);

/// +1 if d lies strictly inside the circle through the counterclockwise
/// triangle (a, b, c), -1 outside, 0 on the circle. Exact.
int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// Circumcenter of a non-degenerate triangle.
Point2 circumcenter(const Point2& a, const Point2& b, const Point2& c);

}  // namespace bergman
