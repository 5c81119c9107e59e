#pragma once

#include "mahler/group.hpp"
#include "mahler/planar.hpp"
#include "mahler/polytope.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace mahler {

/// Smooth convex body with gauge mu(x) = (sum_i max(n_i.x, 0)^p)^(1/p).
/// The halfspace family {n_i . x <= 1} must positively span R^3 (bounded
/// body). For p = 2 and the family {±e_i/r_i} this is exactly the ellipsoid
/// with semi-axes r_i; in particular the unit ball is representable exactly.
struct SmoothBody {
  std::vector<Vec3> normals;
  double p = 8;
};

/// Halfspace form with the vertex form cached at construction.
struct HPolytope {
  std::vector<Halfspace> halfspaces;
  VPolytope vform;
};

/// Ball sandwich r*B ⊆ K ⊆ (1/r)*B recorded at construction (r may be
/// conservative for smooth bodies, but is always valid).
struct BodyFrame {
  double r = 0;
};

struct ConvexBody {
  std::variant<VPolytope, HPolytope, SmoothBody> shape;
  BodyFrame frame;
  /// set on bodies produced by sampled constructions (e.g. the polar of a
  /// smooth body); consumers widen their tolerances by 10x
  bool approximate = false;

  bool is_polytope() const { return !std::holds_alternative<SmoothBody>(shape); }
  const VPolytope& vform() const; // polytope forms only
  static ConvexBody polytope(VPolytope p);
  static ConvexBody from_halfspaces(std::vector<Halfspace> hs, const Vec3& interior = Vec3::Zero());
  static ConvexBody smooth(std::vector<Vec3> normals, double p);
};

// --- fixtures -------------------------------------------------------------

ConvexBody make_cube(double half_width = 1.0);
ConvexBody make_ball(double radius = 1.0);
ConvexBody make_ellipsoid(double rx, double ry, double rz);
/// Simplex with vertices (-a,-b,-c), (-a,b,c), (a,-b,c), (a,b,-c); invariant
/// under the coordinate half-turn group D2. Its volume product is 64/9.
ConvexBody make_simplex_d2(double a, double b, double c);
ConvexBody make_simplex_d2_polar(double a, double b, double c);
/// Simplex with vertices g^k (1,0,u), k = 0..3, g the S4 generator; invariant
/// under S4, volume product 64/9.
ConvexBody make_simplex_s4(double u);
ConvexBody make_simplex_s4_polar(double u);

// --- scalar ops ------------------------------------------------------------

/// Minkowski gauge; 0 at the origin, 1 on the boundary.
double gauge(const ConvexBody& k, const Vec3& x);
/// Radial function 1/gauge; throws PreconditionError at x = 0.
double radial(const ConvexBody& k, const Vec3& x);
/// Boundary point in direction d.
Vec3 boundary_point(const ConvexBody& k, const Vec3& d);

struct SupportResult {
  double h;     // support value max{u.x : x in K}
  Vec3 argmax;  // attaining boundary point
};
/// Support function. For smooth bodies this runs a chart Newton ascent of
/// (v.u)/mu(v) over the sphere (the superlevel sets are spherically convex,
/// so local ascent is global); `seed` warm-starts it.
SupportResult support(const ConvexBody& k, const Vec3& u,
                      std::optional<Vec3> seed = std::nullopt);

// --- polar -----------------------------------------------------------------

/// Polar body about z: K^z = z + {y : y.(x - z) <= 1 for all x in K}.
/// Polytope forms are exact. Smooth bodies yield an HPolytope built from
/// boundary-point constraints in `ndirs` Fibonacci directions, marked
/// approximate. Throws GeometryError when z is not interior.
ConvexBody polar(const ConvexBody& k, const Vec3& z = Vec3::Zero(), int ndirs = 4096);

/// Volume. Polytopes are exact; smooth bodies use adaptive spherical
/// quadrature of radial^3/3 to relative tolerance rel_tol.
double volume(const ConvexBody& k, double rel_tol = tol::quadrature);

/// Volume of the polar about the origin without materializing it. Polytopes
/// are exact; smooth bodies integrate the analytic cone-volume density
/// (adj(hess mu) grad mu).u/3 of the gradient parametrization of the polar
/// boundary, so no per-sample support maximization is needed.
double polar_volume(const ConvexBody& k, double rel_tol = tol::quadrature);

/// |(K - z)°| for an interior base point z. Smooth bodies reuse the analytic
/// density with the recentering factor (1 - z.grad mu)^-3.
double polar_volume(const ConvexBody& k, const Vec3& z,
                    double rel_tol = tol::quadrature);

/// Centroid of (K - z)°, the (scaled) gradient of z -> |(K - z)°|. Exact for
/// polytopes; smooth bodies use a fixed equal-area grid of the analytic
/// density, good to a few 1e-4 relative.
Vec3 polar_centroid(const ConvexBody& k, const Vec3& z = Vec3::Zero());

// --- boundary map ----------------------------------------------------------

/// The gauge-gradient map from the boundary of K to the boundary of the polar:
/// for smooth bodies the analytic gradient of mu; for polytopes the active
/// facet's n/c, ties broken by the lexicographically smallest facet index.
/// Requires |gauge(x) - 1| <= tol::boundary.
Vec3 lambda_map(const ConvexBody& k, const Vec3& x);

/// Analytic gradient and Hessian of the smooth gauge (any x != 0).
Vec3 smooth_gauge_gradient(const SmoothBody& s, const Vec3& x);
Mat3 smooth_gauge_hessian(const SmoothBody& s, const Vec3& x);

/// p-smoothing of the facet family of a polytope form. The family must be
/// G-closed (checked when a group is given). The result contains K from
/// inside with Hausdorff gap at most (m^(1/p) - 1) * outer_radius.
struct SmoothApprox {
  ConvexBody body;
  double hausdorff_bound;
};
SmoothApprox smooth_approx(const ConvexBody& k, double p,
                           const SymmetryGroup* g = nullptr);

/// Max relative error of the analytic gradient against central differences
/// over the given points (step 1e-5), for test harnesses and the CLI.
double gauge_gradient_check(const SmoothBody& s, const std::vector<Vec3>& xs);

// --- sections and shadows ---------------------------------------------------

/// Planar convex body: a cross-section or shadow of a 3D body, carried with
/// its frame. Polytope inputs give an exact polygon; smooth inputs keep a
/// gauge closure (sections) or a sampled support polygon (shadows).
struct Section2 {
  PlaneFrame frame;
  std::optional<Polygon2> poly;
  std::function<double(const Vec2&)> gauge2; // always callable
  double radial2(const Vec2& d) const;
  /// 2D boundary-to-polar-boundary map; polygons use the active edge,
  /// gauge closures use central differences (independent of the 3D gradient).
  Vec2 lambda2(const Vec2& x) const;
};

Section2 cross_section(const ConvexBody& k, const PlaneFrame& f);
/// Shadow of K on the plane of f. Smooth bodies are sampled with `nangles`
/// support directions (default 2048).
Section2 projection(const ConvexBody& k, const PlaneFrame& f, int nangles = 2048);

// --- invariance ------------------------------------------------------------

/// Hausdorff-style invariance check: vertex-set matching for polytopes,
/// radial agreement on a fixed direction sample for smooth bodies.
bool is_invariant(const SymmetryGroup& g, const ConvexBody& k, double eps = 1e-9);

/// Apply a linear map (polytope forms only; used by affine-invariance tests).
ConvexBody linear_image(const ConvexBody& k, const Mat3& m);

// --- spherical quadrature ----------------------------------------------------

/// Adaptive integral of f over the spherical triangle (a, b, c) (solid-angle
/// measure), by recursive 4-way bisection with Richardson extrapolation.
double sphere_triangle_integral(const std::function<double(const Vec3&)>& f,
                                const Vec3& a, const Vec3& b, const Vec3& c,
                                double abs_tol, int max_depth = 24);

/// Integral of f over the whole sphere (eight octants).
double sphere_integral(const std::function<double(const Vec3&)>& f, double rel_tol);

/// Solid angle of the spherical triangle with the orientation sign.
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

std::vector<Vec3> fibonacci_directions(int n);

} // namespace mahler
