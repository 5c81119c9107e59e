#pragma once

#include "mahler/types.hpp"

#include <optional>
#include <vector>

namespace mahler {

/// Counterclockwise rotation by pi/2.
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Convex polygon, vertices in counterclockwise order, no repeated or
/// collinear vertices.
struct Polygon2 {
  std::vector<Vec2> pts;

  double area() const;
  Vec2 centroid() const;
  bool contains(const Vec2& q, double eps = tol::plane) const;
  /// Distance from the origin to the boundary along direction d (d != 0).
  /// Requires the origin in the interior.
  double radial(const Vec2& d) const;
};

/// Convex hull of a 2D point set (monotone chain); collinear points dropped.
/// Throws GeometryError on degenerate (flat) input when require_area is set.
Polygon2 hull2(std::vector<Vec2> pts, bool require_area = true);

/// Clip a convex polygon by the halfplane {x : n.x <= c}.
Polygon2 clip_halfplane(const Polygon2& poly, const Vec2& n, double c);

/// Polar polygon {y : y.x <= 1 for all x in P}; requires the origin interior.
Polygon2 polar2(const Polygon2& poly);

/// Boundary walk of a convex polygon from the boundary point in direction a
/// to the boundary point in direction b, moving counterclockwise. The swept
/// angle may exceed pi. Returns the polyline (first point on ray a, last on
/// ray b, corners in between).
std::vector<Vec2> boundary_arc_ccw(const Polygon2& poly, const Vec2& a, const Vec2& b);

/// Area of the region swept from the origin by a planar polyline:
/// (1/2) |sum of cross(p_i, p_{i+1})| with the two radial closing segments
/// contributing nothing.
double fan_area(const std::vector<Vec2>& arc);

/// Orthonormal frame (e1, e2, n) of an oriented plane through the origin.
struct PlaneFrame {
  Vec3 e1, e2, n;
  Vec2 to2(const Vec3& x) const { return {e1.dot(x), e2.dot(x)}; }
  Vec3 to3(const Vec2& u) const { return u.x() * e1 + u.y() * e2; }
};

/// Frame of span{a, b}, oriented so that (a, b, a x b) is right handed:
/// e1 = a/|a|, n = (a x b)/|a x b|. Throws on parallel input.
PlaneFrame plane_from_span(const Vec3& a, const Vec3& b);

/// Frame with the given normal; e1, e2 chosen deterministically.
PlaneFrame plane_from_normal(const Vec3& n);

} // namespace mahler
