#include "mahler/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mahler {

Polyline Polyline::reversed() const {
  Polyline r = *this;
  std::reverse(r.points.begin(), r.points.end());
  return r;
}

Polyline make_polyline(std::vector<Vec3> pts, bool closed, CurveSource source) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts)
    if (out.empty() || (p - out.back()).norm() >= 1e-12) out.push_back(p);
  if (closed)
    while (out.size() > 1 && (out.front() - out.back()).norm() < 1e-12) out.pop_back();
  if (out.size() < 2) throw PreconditionError("polyline needs at least two distinct points");
  return {std::move(out), closed, source};
}

namespace {

// -1: reversed traversal is lexicographically smaller, 0: palindrome, 1: as-is
int compare_with_reversed(const std::vector<Vec3>& p) {
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec3& f = p[i];
    const Vec3& r = p[n - 1 - i];
    for (int j = 0; j < 3; ++j) {
      if (r[j] < f[j]) return -1;
      if (r[j] > f[j]) return 1;
    }
  }
  return 0;
}

// Neumaier-compensated sum of the segment cross products, in the given order.
Vec3 cbar_fixed_order(const std::vector<Vec3>& p, bool closed) {
  double s[3] = {0, 0, 0}, comp[3] = {0, 0, 0};
  auto add = [&](const Vec3& v) {
    for (int j = 0; j < 3; ++j) {
      const double t = s[j] + v[j];
      if (std::abs(s[j]) >= std::abs(v[j]))
        comp[j] += (s[j] - t) + v[j];
      else
        comp[j] += (v[j] - t) + s[j];
      s[j] = t;
    }
  };
  for (size_t i = 0; i + 1 < p.size(); ++i) add(p[i].cross(p[i + 1]));
  if (closed) add(p.back().cross(p.front()));
  return 0.5 * Vec3(s[0] + comp[0], s[1] + comp[1], s[2] + comp[2]);
}

} // namespace

Vec3 cbar(const std::vector<Vec3>& pts, bool closed) {
  if (pts.size() < 2) throw PreconditionError("cbar needs at least two points");
  const int cmp = compare_with_reversed(pts);
  if (cmp == 0) return Vec3::Zero(); // palindrome: the exact value is zero
  if (cmp < 0) {
    std::vector<Vec3> rev(pts.rbegin(), pts.rend());
    return -cbar_fixed_order(rev, closed);
  }
  return cbar_fixed_order(pts, closed);
}

Vec3 cbar(const Polyline& c) { return cbar(c.points, c.closed); }

namespace {

void check_not_parallel(const Vec3& a, const Vec3& b) {
  if (a.norm() == 0 || b.norm() == 0) throw PreconditionError("zero direction");
  if (a.cross(b).norm() <= 1e-12 * a.norm() * b.norm())
    throw PreconditionError("directions are parallel");
}

// t with x ~ (1-t) a2 + t b2 up to positive scaling (a2, b2 independent)
double ray_parameter(const Vec2& a2, const Vec2& b2, const Vec2& x) {
  Eigen::Matrix2d m;
  m << a2.x(), b2.x(), a2.y(), b2.y();
  const Vec2 ab = m.inverse() * x; // x = ab0*a2 + ab1*b2
  const double den = ab.x() + ab.y();
  if (den <= 0) throw GeometryError("radial curve point left the direction cone");
  return std::clamp(ab.y() / den, 0.0, 1.0);
}

} // namespace

Polyline radial_curve(const ConvexBody& k, const Vec3& a, const Vec3& b, int n) {
  check_not_parallel(a, b);
  if (n < 1) throw PreconditionError("sample count must be positive");
  if (!k.is_polytope()) {
    std::vector<Vec3> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const Vec3 d = (1 - t) * a + t * b;
      pts.push_back(radial(k, d) * d);
    }
    return make_polyline(std::move(pts), false, CurveSource::RadialCurve);
  }
  const PlaneFrame f = plane_from_span(a, b);
  const Polygon2 poly = cross_section_polygon(k.vform(), f);
  if (poly.pts.size() < 3) throw GeometryError("degenerate cross-section");
  const Vec2 a2 = f.to2(boundary_point(k, a));
  const Vec2 b2 = f.to2(boundary_point(k, b));
  const std::vector<Vec2> arc = boundary_arc_ccw(poly, a2, b2);
  struct Node {
    double t;
    Vec3 p;
    bool exact;
  };
  std::vector<Node> nodes;
  for (const auto& q : arc) nodes.push_back({ray_parameter(a2, b2, q), f.to3(q), true});
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Vec3 d = (1 - t) * a + t * b;
    nodes.push_back({t, radial(k, d) * d, false});
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const Node& x, const Node& y) { return x.t < y.t; });
  std::vector<Vec3> pts;
  pts.reserve(nodes.size());
  double last_t = -1;
  bool last_exact = false;
  for (const auto& nd : nodes) {
    if (!pts.empty() && nd.t - last_t < 1e-12) {
      if (nd.exact && !last_exact) pts.back() = nd.p; // prefer the crossing point
      last_exact = last_exact || nd.exact;
      continue;
    }
    pts.push_back(nd.p);
    last_t = nd.t;
    last_exact = nd.exact;
  }
  return make_polyline(std::move(pts), false, CurveSource::RadialCurve);
}

double sector_area(const ConvexBody& k, const Vec3& a, const Vec3& b, int n) {
  return cbar(radial_curve(k, a, b, n)).norm();
}

Vec3 lambda_limit(const ConvexBody& k, const Vec3& x) {
  const double g = gauge(k, x);
  if (std::abs(g - 1.0) > tol::boundary)
    throw PreconditionError("lambda requires a boundary point");
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) return smooth_gauge_gradient(*s, x);
  const VPolytope& p = k.vform();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : p.facets) best = std::max(best, f.normal.dot(x) / f.offset);
  Vec3 sum = Vec3::Zero();
  int cnt = 0;
  for (const auto& f : p.facets)
    if (f.normal.dot(x) / f.offset >= best - tol::boundary) {
      sum += f.normal / f.offset;
      ++cnt;
    }
  return sum / cnt;
}

Polyline lambda_image(const ConvexBody& k, const Polyline& c) {
  std::vector<Vec3> pts;
  pts.reserve(c.points.size());
  for (const auto& p : c.points) pts.push_back(lambda_limit(k, p));
  return make_polyline(std::move(pts), c.closed, CurveSource::LambdaImage);
}

Polyline projected_arc(const ConvexBody& k, const PlaneFrame& f, const Vec3& apolar,
                       const Vec3& bpolar, int n) {
  const Vec2 pa(apolar.dot(f.e1), apolar.dot(f.e2));
  const Vec2 pb(bpolar.dot(f.e1), bpolar.dot(f.e2));
  if (pa.norm() <= 1e-12 * std::max(1.0, apolar.norm()) ||
      pb.norm() <= 1e-12 * std::max(1.0, bpolar.norm()))
    throw PreconditionError("projection of an endpoint direction is degenerate");
  if (cross2(pa, pb) == 0 && pa.dot(pb) > 0)
    throw PreconditionError("projected directions are positively proportional");
  const Section2 shadow = projection(k, f, n);
  const std::vector<Vec2> arc = boundary_arc_ccw(*shadow.poly, pa, pb);
  std::vector<Vec3> pts;
  pts.reserve(arc.size());
  for (const auto& q : arc) pts.push_back(f.to3(q));
  return make_polyline(std::move(pts), false, CurveSource::ProjectedBoundary);
}

double signed_cone_volume(const Vec3& x, const Polyline& c) { return x.dot(cbar(c)) / 3.0; }

double cone_region_volume(const ConvexBody& k, const std::vector<Vec3>& dirs) {
  if (dirs.size() != 3) throw PreconditionError("cone_region_volume expects three generators");
  Vec3 d1 = dirs[0], d2 = dirs[1], d3 = dirs[2];
  const double det = d1.dot(d2.cross(d3));
  if (std::abs(det) <= 1e-12 * d1.norm() * d2.norm() * d3.norm())
    throw PreconditionError("generators do not span a pointed solid cone");
  if (det < 0) std::swap(d2, d3);
  if (!k.is_polytope()) {
    auto rho3 = [&](const Vec3& u) {
      const double r = radial(k, u);
      return r * r * r / 3.0;
    };
    const double rough =
        sphere_triangle_integral(rho3, d1, d2, d3, std::numeric_limits<double>::infinity(), 0);
    return sphere_triangle_integral(rho3, d1, d2, d3,
                                    tol::quadrature * std::max(std::abs(rough), 1e-12), 24);
  }
  std::vector<Halfspace> hs = facet_halfspaces(k.vform());
  const Vec3 planes[3] = {d1.cross(d2), d2.cross(d3), d3.cross(d1)};
  for (const auto& m : planes) hs.push_back({-m.normalized(), 0.0});
  const Vec3 s = d1.normalized() + d2.normalized() + d3.normalized();
  const Vec3 x0 = 0.5 * radial(k, s) * s;
  return volume(halfspace_intersection(hs, x0));
}

} // namespace mahler
