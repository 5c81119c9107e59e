#include "mahler/estimates.hpp"

#include <cmath>

namespace mahler {

namespace {

void echo_vec(std::map<std::string, double>& m, const std::string& key, const Vec3& v) {
  m[key + ".x"] = v.x();
  m[key + ".y"] = v.y();
  m[key + ".z"] = v.z();
}

void echo_vec(std::map<std::string, double>& m, const std::string& key, const Vec2& v) {
  m[key + ".x"] = v.x();
  m[key + ".y"] = v.y();
}

EstimateReport finish(EstimateReport r) {
  r.slack = r.lhs - r.rhs;
  return r;
}

void require_boundary(const ConvexBody& k, const Vec3& x, const char* what) {
  if (std::abs(gauge(k, x) - 1.0) > tol::boundary)
    throw PreconditionError(std::string(what) + " is not on the boundary");
}

// Reorder (in place) to a positively oriented triple; the cone is unchanged
// and the closed curve through the generators becomes counterclockwise.
void orient_triple(std::vector<Vec3>& g) {
  const double det = g[0].dot(g[1].cross(g[2]));
  if (std::abs(det) <= 1e-12 * g[0].norm() * g[1].norm() * g[2].norm())
    throw PreconditionError("generators do not span a solid cone");
  if (det < 0) std::swap(g[1], g[2]);
}

Polyline closed_curve_through(const ConvexBody& k, const std::vector<Vec3>& gens, int n) {
  std::vector<Vec3> pts;
  for (size_t i = 0; i < gens.size(); ++i) {
    const Polyline arc = radial_curve(k, gens[i], gens[(i + 1) % gens.size()], n);
    pts.insert(pts.end(), arc.points.begin(), arc.points.end());
  }
  return make_polyline(std::move(pts), true, CurveSource::RadialCurve);
}

} // namespace

EstimateReport pairing_2d(double l_area, double lpolar_area, const Vec2& a, const Vec2& b,
                          const Vec2& apolar, const Vec2& bpolar) {
  if ((a - b).norm() < 1e-15 || (apolar - bpolar).norm() < 1e-15)
    throw PreconditionError("pairing_2d needs distinct endpoints");
  EstimateReport r;
  r.name = "pairing_2d";
  r.lhs = l_area * lpolar_area;
  r.rhs = 0.25 * (a - b).dot(apolar - bpolar);
  r.tolerance = 1e-8;
  r.inputs["l_area"] = l_area;
  r.inputs["lpolar_area"] = lpolar_area;
  echo_vec(r.inputs, "a", a);
  echo_vec(r.inputs, "b", b);
  echo_vec(r.inputs, "apolar", apolar);
  echo_vec(r.inputs, "bpolar", bpolar);
  return finish(r);
}

EstimateReport pairing_curve(const ConvexBody& k, const Vec3& a, const Vec3& b, int n) {
  require_boundary(k, a, "a");
  require_boundary(k, b, "b");
  const Polyline c = radial_curve(k, a, b, n);
  const Polyline ci = lambda_image(k, c);
  EstimateReport r;
  r.name = "pairing_curve";
  r.lhs = cbar(c).dot(cbar(ci));
  r.rhs = 0.25 * (a - b).dot(lambda_limit(k, a) - lambda_limit(k, b));
  r.tolerance = k.is_polytope() ? 1e-8 : 1e-6;
  echo_vec(r.inputs, "a", a);
  echo_vec(r.inputs, "b", b);
  r.inputs["n"] = n;
  return finish(r);
}

EstimateReport surface_estimate(const ConvexBody& k, const std::vector<Vec3>& generators,
                                const std::vector<Vec3>& polar_generators, int n) {
  if (generators.size() != 3 || polar_generators.size() != 3)
    throw PreconditionError("surface_estimate expects generator triples");
  std::vector<Vec3> g = generators, gp = polar_generators;
  orient_triple(g);
  orient_triple(gp);
  const ConvexBody kp = polar(k);
  const Polyline c = closed_curve_through(k, g, n);
  const Polyline cp = closed_curve_through(kp, gp, n);
  EstimateReport r;
  r.name = "surface_estimate";
  r.lhs = cone_region_volume(k, g) * cone_region_volume(kp, gp);
  r.rhs = cbar(c).dot(cbar(cp)) / 9.0;
  r.tolerance = k.is_polytope() ? 1e-8 : 1e-6;
  for (int i = 0; i < 3; ++i) {
    echo_vec(r.inputs, "g" + std::to_string(i), g[i]);
    echo_vec(r.inputs, "gp" + std::to_string(i), gp[i]);
  }
  r.inputs["n"] = n;
  return finish(r);
}

EstimateReport cone_pair_2d(const ConvexBody& k, const Vec3& a, const Vec3& b,
                            const Vec3& apolar, const Vec3& bpolar, int n) {
  require_boundary(k, a, "a");
  require_boundary(k, b, "b");
  if (std::abs(a.dot(apolar) - 1.0) > tol::boundary ||
      std::abs(b.dot(bpolar) - 1.0) > tol::boundary)
    throw PreconditionError("dual pairings a.a° = b.b° = 1 fail");
  if (std::abs(support(k, apolar).h - 1.0) > tol::boundary ||
      std::abs(support(k, bpolar).h - 1.0) > tol::boundary)
    throw PreconditionError("a° or b° is not on the boundary of the polar body");
  if (a.dot(bpolar) >= 1.0 || b.dot(apolar) >= 1.0)
    throw PreconditionError("cross pairings must satisfy a.b° < 1 and b.a° < 1");
  const PlaneFrame h = plane_from_span(a, b);
  const ConvexBody kp = polar(k);
  const Polyline arc = projected_arc(kp, h, apolar, bpolar, 2 * n);
  EstimateReport r;
  r.name = "cone_pair_2d";
  r.lhs = sector_area(k, a, b, n) * cbar(arc).norm();
  r.rhs = 0.25 * (2.0 - a.dot(bpolar) - apolar.dot(b));
  r.tolerance = k.is_polytope() ? 1e-8 : 1e-6;
  echo_vec(r.inputs, "a", a);
  echo_vec(r.inputs, "b", b);
  echo_vec(r.inputs, "apolar", apolar);
  echo_vec(r.inputs, "bpolar", bpolar);
  r.inputs["n"] = n;
  return finish(r);
}

} // namespace mahler
