#pragma once

#include "mahler/body.hpp"

namespace mahler {

// Oriented polyline on (or near) a body boundary. Consecutive points are kept
// at least 1e-12 apart; a closed polyline implies the segment back to front().
enum class CurveSource { RadialCurve, LambdaImage, ProjectedBoundary, ExplicitSegments };

struct Polyline {
  std::vector<Vec3> points;
  bool closed = false;
  CurveSource source = CurveSource::ExplicitSegments;

  size_t size() const { return points.size(); }
  Polyline reversed() const;
};

Polyline make_polyline(std::vector<Vec3> pts, bool closed = false,
                       CurveSource source = CurveSource::ExplicitSegments);

// Boundary curve from ray(a) to ray(b): t -> rho((1-t)a + tb) ((1-t)a + tb).
// Polytopes get the exact facet-crossing parameters inserted, so the result is
// exact; smooth bodies are sampled at n+1 uniform parameters.
Polyline radial_curve(const ConvexBody& k, const Vec3& a, const Vec3& b, int n = 1024);

// (1/2) sum p_i x p_{i+1}. The traversal direction is canonicalized before
// summation so that cbar(reverse(C)) == -cbar(C) holds bitwise.
Vec3 cbar(const Polyline& c);
Vec3 cbar(const std::vector<Vec3>& pts, bool closed = false);

// Area of the planar region o * C_K(a,b) = ||cbar|| of the radial curve.
double sector_area(const ConvexBody& k, const Vec3& a, const Vec3& b, int n = 1024);

// Pointwise image of a boundary curve under the duality map into dK*.
// At polytope edges and vertices the active facet duals are averaged, which is
// the limit of the gradient map under equal-weight smoothing and keeps the
// image equivariant under the body's symmetries.
Polyline lambda_image(const ConvexBody& k, const Polyline& c);
Vec3 lambda_limit(const ConvexBody& k, const Vec3& x);

// Counterclockwise boundary arc of the shadow of K on the oriented plane of f,
// from the boundary ray through proj(apolar) to the one through proj(bpolar).
// The swept angle may exceed pi. Points are returned in world coordinates.
Polyline projected_arc(const ConvexBody& k, const PlaneFrame& f, const Vec3& apolar,
                       const Vec3& bpolar, int n = 2048);

// Signed volume of x * (o * C) = (1/3) x . cbar(C).
double signed_cone_volume(const Vec3& x, const Polyline& c);

// |K ∩ pos(d1,d2,d3)| for a simplicial solid cone. Polytopes clip exactly by
// the three edge-pair planes; smooth bodies integrate rho^3/3 over the
// spherical triangle.
double cone_region_volume(const ConvexBody& k, const std::vector<Vec3>& dirs);

} // namespace mahler
