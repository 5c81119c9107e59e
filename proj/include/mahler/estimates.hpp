#pragma once
#include <map>
#include <string>

#include "mahler/curves.hpp"

namespace mahler {

/// Both sides of one inequality instance, plus the slack lhs - rhs. Oracles
/// never assert; callers decide what slack is acceptable. `tolerance` is the
/// suggested acceptance threshold for this evaluation path (tighter when every
/// intermediate is an exact polytope computation).
struct EstimateReport {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  double slack = 0;  // lhs - rhs
  double tolerance = 0;
  std::map<std::string, double> inputs;
};

/// Planar volume-product pairing: for a planar convex L containing o with
/// boundary points a, b and polar boundary points a°, b°,
///   |L| |L°| >= (1/4) (a - b) . (a° - b°).
/// Areas are supplied by the caller; this oracle only evaluates the two sides.
EstimateReport pairing_2d(double l_area, double lpolar_area, const Vec2& a, const Vec2& b,
                          const Vec2& apolar, const Vec2& bpolar);

/// Curve pairing on a single body: for a, b on the boundary of K,
///   cbar(C(a,b)) . cbar(Lambda(C(a,b))) >= (1/4) (a - b) . (Lambda a - Lambda b).
EstimateReport pairing_curve(const ConvexBody& k, const Vec3& a, const Vec3& b, int n = 1024);

/// Fundamental-domain volume bound: with C the closed boundary curve of K
/// through the three generators and C° the closed curve of K° through the
/// polar generators,
///   |K ∩ pos(gens)| |K° ∩ pos(polar gens)| >= (1/9) cbar(C) . cbar(C°).
/// Generator triples are reoriented to positive determinant so both curves
/// run counterclockwise around their cones; three independent generators
/// always trace a simple spherical curve.
EstimateReport surface_estimate(const ConvexBody& k, const std::vector<Vec3>& generators,
                                const std::vector<Vec3>& polar_generators, int n = 1024);

/// Mixed cone/projection pairing: with L = o*C_K(a,b) in the plane H spanned
/// by a, b and L° = o*C_{K°}(H; a°, b°) the projected polar arc,
///   |L| |L°| >= (1/4) (2 - a.b° - a°.b),
/// given the dual pairings a.a° = b.b° = 1. The polar arc may sweep more
/// than pi.
EstimateReport cone_pair_2d(const ConvexBody& k, const Vec3& a, const Vec3& b,
                            const Vec3& apolar, const Vec3& bpolar, int n = 1024);

} // namespace mahler
