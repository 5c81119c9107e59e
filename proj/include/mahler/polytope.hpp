#pragma once

#include "mahler/planar.hpp"
#include "mahler/types.hpp"

#include <vector>

namespace mahler {

struct Halfspace {
  Vec3 n;   // not necessarily unit
  double c; // {x : n.x <= c}
};

/// Polytope facet: unit outward normal, offset, and the counterclockwise
/// vertex ring seen from outside (indices into VPolytope::vertices).
struct Facet {
  Vec3 normal;
  double offset = 0;
  std::vector<int> ring;
};

/// Convex polytope in vertex + facet form. Vertices are exactly the extreme
/// points (hull corners); facet rings are maximal coplanar faces.
struct VPolytope {
  std::vector<Vec3> vertices;
  std::vector<Facet> facets;

  int nvertices() const { return static_cast<int>(vertices.size()); }
  int nfacets() const { return static_cast<int>(facets.size()); }
  double outer_radius() const;
  /// min facet offset; positive iff the origin is interior
  double inner_radius() const;
  bool contains(const Vec3& x, double eps = tol::plane) const;
  double support(const Vec3& u) const; // max u.v over vertices
  Vec3 vertex_centroid() const;
};

/// Convex hull of a 3D point set.
///
/// Incremental insertion with strict visibility, followed by a coplanar merge
/// pass (triangles within tol::plane of a common plane become one facet) and
/// a verification pass that re-runs the build with any boundary point that
/// landed outside its coplanar facet polygon pinned into the insertion front.
/// Throws GeometryError on degenerate (flat) input.
VPolytope convex_hull(const std::vector<Vec3>& points);

/// Bounded intersection of halfspaces, computed by dualizing about a strict
/// interior point (slack >= tol::feasibility required). Throws GeometryError
/// when the interior point is infeasible or the intersection is unbounded.
VPolytope halfspace_intersection(const std::vector<Halfspace>& hs, const Vec3& interior);

double volume(const VPolytope& p);
Vec3 centroid(const VPolytope& p);

/// Exact cross-section polygon of a polytope with a plane through the origin,
/// in the coordinates of the given frame. Empty polygon when the plane misses.
Polygon2 cross_section_polygon(const VPolytope& p, const PlaneFrame& f);

/// Shadow (orthogonal projection) onto the plane of the frame.
Polygon2 projection_polygon(const VPolytope& p, const PlaneFrame& f);

/// Facets as halfspaces (unit normals).
std::vector<Halfspace> facet_halfspaces(const VPolytope& p);

} // namespace mahler
