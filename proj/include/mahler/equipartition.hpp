#pragma once
#include <array>
#include <functional>
#include <optional>

#include "mahler/curves.hpp"
#include "mahler/group.hpp"

namespace mahler {

/// Result of the three-sector equipartition search for a D2-invariant body.
/// p = (a,b,c) is normalized to a + b + c = 3; s1, s2, s3 are the normalized
/// sector ratios at p and residual = max pairwise |si - sj| / max si.
struct D2Partition {
  Vec3 p = Vec3::Ones();
  double s1 = 0, s2 = 0, s3 = 0;
  double residual = 0;
  int zero_count = 1;   // candidate zeros that survived subdivision
  int tree_depth = 0;   // subdivision levels used
  int newton_iters = 0;
};

/// Result of the one-parameter balance search for an S4-invariant body:
/// beta(u) = 2 u c(u) at the returned u, bracketed within [bracket_lo,
/// bracket_hi]; residual = |beta - 2uc| / beta.
struct S4Balance {
  double u = 1;
  double c_val = 0, beta_val = 0;
  double residual = 0;
  double bracket_lo = 0, bracket_hi = 0;
  int iterations = 0;
};

/// The three normalized sector ratios of the fundamental-domain boundary at
/// p = (a,b,c) > 0:
///   S1 = |o*C(v+-+, v++-)| / sqrt(c^2 a^2 + a^2 b^2),
///   S2 = |o*C(v++-, v-++)| / sqrt(b^2 c^2 + a^2 b^2),
///   S3 = |o*C(v-++, v+-+)| / sqrt(b^2 c^2 + c^2 a^2),
/// with v-vectors the sign patterns of p. Homogeneous of degree -2 in p up to
/// the common body scale, so only the ray of p matters for equality.
std::array<double, 3> d2_ratios(const ConvexBody& k, const Vec3& p, int n = 1024);

/// F(p) = S1 (1,0) + S2 (-1/2, sqrt3/2) + S3 (-1/2, -sqrt3/2); zero exactly
/// when the three ratios agree.
Vec2 d2_F(const ConvexBody& k, const Vec3& p, int n = 1024);

/// Winding number of f around the origin along the closed polygon (vertices
/// in the positive octant), sampling each edge. Edges are resampled (doubling,
/// bounded) whenever consecutive values change direction too fast to trust
/// the angle sum; returns nullopt if refinement cannot separate the image
/// from the origin.
std::optional<int> winding_number(const std::function<Vec2(const Vec3&)>& f,
                                  const std::vector<Vec3>& polygon, int samples_per_edge = 8);

/// Equipartition solver: winding-number-guided subdivision of a start
/// triangle in the plane a+b+c = 3, finished by damped Newton on
/// (S1 - S2, S2 - S3). Throws SolverError when the winding certificate is
/// lost everywhere or the residual target cannot be met.
D2Partition solve_d2(const ConvexBody& k, double tol = 1e-10, int n = 1024);

/// c(u) = |o*C(v0,v1)| / sqrt(1 + 2u^2) and beta(u) = |o*C(v2,v0)| with
/// v0 = (1,0,u), vk = g^k v0 for the standard S4 generator g.
std::pair<double, double> s4_c_beta(const ConvexBody& k, double u, int n = 1024);

/// Balance solver: brackets u c(u)/beta(u) between 1/4 and 1 by geometric
/// expansion from u = 1, then bisects g(u) = 2 u c(u) - beta(u) until
/// |g|/beta <= tol. Throws SolverError if no bracket is found within 2^40.
S4Balance solve_s4(const ConvexBody& k, double tol = 1e-12, int n = 1024);

} // namespace mahler
