#include "mahler/planar.hpp"

#include <algorithm>
#include <cmath>

namespace mahler {

double Polygon2::area() const {
  double s = 0;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) s += cross2(pts[i], pts[(i + 1) % n]);
  return 0.5 * s;
}

Vec2 Polygon2::centroid() const {
  // area-weighted fan centroid
  const size_t n = pts.size();
  double a = 0;
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < n; ++i) {
    const double w = cross2(pts[i], pts[(i + 1) % n]);
    a += w;
    c += w * (pts[i] + pts[(i + 1) % n]);
  }
  if (std::abs(a) < 1e-300) throw GeometryError("degenerate polygon centroid");
  return c / (3.0 * a);
}

bool Polygon2::contains(const Vec2& q, double eps) const {
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 e = pts[(i + 1) % n] - pts[i];
    if (cross2(e, q - pts[i]) < -eps * std::max(1.0, e.norm())) return false;
  }
  return true;
}

double Polygon2::radial(const Vec2& d) const {
  const size_t n = pts.size();
  double best = -1;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = pts[i], q = pts[(i + 1) % n];
    // solve t*d = p + s*(q-p), 0 <= s <= 1, t > 0
    const Vec2 e = q - p;
    const double den = cross2(d, e);
    if (std::abs(den) < 1e-300) continue;
    const double t = cross2(p, e) / den;
    const double s = cross2(p, d) / den;
    if (t > 0 && s >= -1e-12 && s <= 1 + 1e-12) best = std::max(best, t);
  }
  if (best <= 0) throw GeometryError("radial ray misses polygon (origin not interior?)");
  return best;
}

Polygon2 hull2(std::vector<Vec2> pts, bool require_area) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return (a - b).norm() <= tol::vertex_merge;
                        }),
            pts.end());
  const size_t n = pts.size();
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = tol::plane * scale;
  if (n < 3) {
    if (require_area) throw GeometryError("degenerate 2D hull: fewer than 3 distinct points");
    return Polygon2{pts};
  }
  std::vector<Vec2> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) { // lower
    while (k >= 2 && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= eps) --k;
    h[k++] = pts[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) { // upper
    while (k >= lower && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= eps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  Polygon2 poly{h};
  if (require_area && (h.size() < 3 || poly.area() <= eps * scale))
    throw GeometryError("degenerate 2D hull: zero area");
  return poly;
}

Polygon2 clip_halfplane(const Polygon2& poly, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const size_t m = poly.pts.size();
  for (size_t i = 0; i < m; ++i) {
    const Vec2 p = poly.pts[i], q = poly.pts[(i + 1) % m];
    const double dp = n.dot(p) - c, dq = n.dot(q) - c;
    if (dp <= 0) out.push_back(p);
    if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  // drop duplicates created when a vertex lies on the cut line
  std::vector<Vec2> ded;
  for (const auto& p : out) {
    if (ded.empty() || (p - ded.back()).norm() > tol::vertex_merge) ded.push_back(p);
  }
  while (ded.size() > 1 && (ded.front() - ded.back()).norm() <= tol::vertex_merge) ded.pop_back();
  return Polygon2{ded};
}

Polygon2 polar2(const Polygon2& poly) {
  const size_t n = poly.pts.size();
  std::vector<Vec2> duals;
  duals.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = poly.pts[i], q = poly.pts[(i + 1) % n];
    // edge {x : m.x = c}; polar vertex m/c
    const Vec2 e = q - p;
    const Vec2 m(e.y(), -e.x()); // outward for CCW polygons
    const double c = m.dot(p);
    if (c <= 1e-14 * m.norm()) throw GeometryError("polar2 requires origin interior");
    duals.push_back(m / c);
  }
  return hull2(duals);
}

namespace {

// Index of the boundary edge hit by the ray through d and the hit point.
std::pair<size_t, Vec2> ray_exit(const Polygon2& poly, const Vec2& d) {
  const size_t n = poly.pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = poly.pts[i], q = poly.pts[(i + 1) % n];
    const Vec2 e = q - p;
    const double den = cross2(d, e);
    if (std::abs(den) < 1e-300) continue;
    const double t = cross2(p, e) / den;
    const double s = cross2(p, d) / den;
    if (t > 0 && s >= -1e-9 && s <= 1 + 1e-9) return {i, p + std::clamp(s, 0.0, 1.0) * e};
  }
  throw GeometryError("ray misses polygon boundary (origin not interior?)");
}

} // namespace

std::vector<Vec2> boundary_arc_ccw(const Polygon2& poly, const Vec2& a, const Vec2& b) {
  if (a.norm() == 0 || b.norm() == 0) throw PreconditionError("zero direction for boundary arc");
  auto [ia, pa] = ray_exit(poly, a);
  auto [ib, pb] = ray_exit(poly, b);
  std::vector<Vec2> arc;
  arc.push_back(pa);
  const size_t n = poly.pts.size();
  if (ia == ib) {
    // same edge: either the direct piece (b ahead of a on the edge) or a full loop
    const Vec2 e = poly.pts[(ia + 1) % n] - poly.pts[ia];
    if (e.dot(pb - pa) >= 0) {
      if ((pb - pa).norm() > tol::vertex_merge) arc.push_back(pb);
      return arc;
    }
  }
  size_t i = ia;
  do {
    i = (i + 1) % n;
    if ((poly.pts[i] - arc.back()).norm() > tol::vertex_merge) arc.push_back(poly.pts[i]);
    if (i == ib) break;
  } while (i != ia);
  if ((pb - arc.back()).norm() > tol::vertex_merge) arc.push_back(pb);
  return arc;
}

double fan_area(const std::vector<Vec2>& arc) {
  double s = 0;
  for (size_t i = 0; i + 1 < arc.size(); ++i) s += cross2(arc[i], arc[i + 1]);
  return 0.5 * std::abs(s);
}

PlaneFrame plane_from_span(const Vec3& a, const Vec3& b) {
  const Vec3 n = a.cross(b);
  const double an = a.norm(), nn = n.norm();
  if (an == 0 || nn <= 1e-14 * an * b.norm())
    throw PreconditionError("plane_from_span: directions are parallel or zero");
  PlaneFrame f;
  f.n = n / nn;
  f.e1 = a / an;
  f.e2 = f.n.cross(f.e1);
  return f;
}

PlaneFrame plane_from_normal(const Vec3& n) {
  const double nn = n.norm();
  if (nn == 0) throw PreconditionError("plane_from_normal: zero normal");
  PlaneFrame f;
  f.n = n / nn;
  Vec3 seed = std::abs(f.n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  f.e1 = f.n.cross(seed).normalized();
  f.e2 = f.n.cross(f.e1);
  return f;
}

} // namespace mahler
