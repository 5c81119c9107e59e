#include "mahler/body.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace mahler {

namespace {

constexpr double kPi = EIGEN_PI;

double poly_gauge(const VPolytope& p, const Vec3& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& f : p.facets) {
    if (f.offset <= 0) throw PreconditionError("gauge requires the origin interior");
    m = std::max(m, f.normal.dot(x) / f.offset);
  }
  return std::max(m, 0.0);
}

// Scaled partial sums of the p-gauge; factor out the largest positive dot to
// keep powers in [0,1].
struct SmoothEval {
  double mu = 0;         // gauge value
  double mmax = 0;       // largest positive dot
  double s1 = 0;         // sum (d/mmax)^p
  std::vector<double> t; // (d_i / mmax)+, clamped at 0
};

SmoothEval smooth_eval(const SmoothBody& s, const Vec3& x) {
  SmoothEval e;
  e.t.resize(s.normals.size());
  for (size_t i = 0; i < s.normals.size(); ++i) e.t[i] = std::max(0.0, s.normals[i].dot(x));
  e.mmax = *std::max_element(e.t.begin(), e.t.end());
  if (e.mmax <= 0) {
    if (x.norm() == 0) return e; // gauge(0) = 0
    throw GeometryError("smooth gauge vanished on a ray: halfspace family does not bound");
  }
  for (auto& v : e.t) v /= e.mmax;
  for (double v : e.t) e.s1 += std::pow(v, s.p);
  e.mu = e.mmax * std::pow(e.s1, 1.0 / s.p);
  return e;
}

// Adaptive whole-sphere quadrature with initial panels aligned to the facial
// structure of the gauge (defined with the quadrature machinery below).
double smooth_sphere_integral(const std::function<double(const Vec3&)>& f, const SmoothBody& s,
                              double rel_tol);

} // namespace

const VPolytope& ConvexBody::vform() const {
  if (const auto* v = std::get_if<VPolytope>(&shape)) return *v;
  if (const auto* h = std::get_if<HPolytope>(&shape)) return h->vform;
  throw PreconditionError("operation requires a polytope form");
}

namespace {

BodyFrame frame_of(const VPolytope& p) {
  BodyFrame f;
  const double inner = p.inner_radius();
  const double outer = p.outer_radius();
  if (inner > 0 && outer > 0) f.r = std::min(inner, 1.0 / outer);
  return f;
}

BodyFrame frame_of(const SmoothBody& s) {
  double lmax = 0;
  for (const auto& n : s.normals) lmax = std::max(lmax, n.norm());
  if (lmax <= 0) throw GeometryError("smooth body with empty normal family");
  const double m = static_cast<double>(s.normals.size());
  const double r_in = std::pow(m, -1.0 / s.p) / lmax;
  // lower bound on min_u max_i n_i.u via a sampled minimum and the Lipschitz
  // constant of the max (covering radius of 2048 Fibonacci points ~ 0.084)
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto& u : fibonacci_directions(2048)) {
    double d = -std::numeric_limits<double>::infinity();
    for (const auto& n : s.normals) d = std::max(d, n.dot(u));
    alpha = std::min(alpha, d);
  }
  alpha -= 0.09 * lmax;
  if (alpha <= 0) throw GeometryError("smooth halfspace family does not bound a body");
  BodyFrame f;
  f.r = std::min(r_in, alpha);
  return f;
}

} // namespace

ConvexBody ConvexBody::polytope(VPolytope p) {
  ConvexBody b;
  b.frame = frame_of(p);
  b.shape = std::move(p);
  return b;
}

ConvexBody ConvexBody::from_halfspaces(std::vector<Halfspace> hs, const Vec3& interior) {
  HPolytope h;
  h.vform = halfspace_intersection(hs, interior);
  h.halfspaces = std::move(hs);
  ConvexBody b;
  b.frame = frame_of(h.vform);
  b.shape = std::move(h);
  return b;
}

ConvexBody ConvexBody::smooth(std::vector<Vec3> normals, double p) {
  if (p < 2) throw PreconditionError("smoothing exponent must be >= 2");
  SmoothBody s{std::move(normals), p};
  ConvexBody b;
  b.frame = frame_of(s);
  b.shape = std::move(s);
  return b;
}

// --- fixtures ---------------------------------------------------------------

ConvexBody make_cube(double h) {
  std::vector<Vec3> v;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) v.push_back(Vec3(sx * h, sy * h, sz * h));
  return ConvexBody::polytope(convex_hull(v));
}

ConvexBody make_ball(double r) { return make_ellipsoid(r, r, r); }

ConvexBody make_ellipsoid(double rx, double ry, double rz) {
  std::vector<Vec3> n = {Vec3(1 / rx, 0, 0), Vec3(-1 / rx, 0, 0), Vec3(0, 1 / ry, 0),
                         Vec3(0, -1 / ry, 0), Vec3(0, 0, 1 / rz), Vec3(0, 0, -1 / rz)};
  return ConvexBody::smooth(std::move(n), 2.0);
}

ConvexBody make_simplex_d2(double a, double b, double c) {
  return ConvexBody::polytope(convex_hull(
      {Vec3(-a, -b, -c), Vec3(-a, b, c), Vec3(a, -b, c), Vec3(a, b, -c)}));
}

ConvexBody make_simplex_d2_polar(double a, double b, double c) {
  return ConvexBody::polytope(convex_hull({Vec3(1 / a, 1 / b, 1 / c), Vec3(1 / a, -1 / b, -1 / c),
                                           Vec3(-1 / a, 1 / b, -1 / c),
                                           Vec3(-1 / a, -1 / b, 1 / c)}));
}

ConvexBody make_simplex_s4(double u) {
  const Mat3 g = SymmetryGroup::s4_generator();
  Vec3 v(1, 0, u);
  std::vector<Vec3> vs;
  for (int k = 0; k < 4; ++k) {
    vs.push_back(v);
    v = g * v;
  }
  return ConvexBody::polytope(convex_hull(vs));
}

ConvexBody make_simplex_s4_polar(double u) {
  const Mat3 g = SymmetryGroup::s4_generator();
  Vec3 v(0, 2, 1 / u);
  std::vector<Vec3> vs;
  for (int k = 0; k < 4; ++k) {
    vs.push_back(v);
    v = g * v;
  }
  return ConvexBody::polytope(convex_hull(vs));
}

// --- scalar ops --------------------------------------------------------------

double gauge(const ConvexBody& k, const Vec3& x) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) return smooth_eval(*s, x).mu;
  return poly_gauge(k.vform(), x);
}

double radial(const ConvexBody& k, const Vec3& x) {
  if (x.norm() == 0) throw PreconditionError("radial function is undefined at the origin");
  const double g = gauge(k, x);
  if (g <= 0) throw GeometryError("radial: gauge vanished away from the origin");
  return 1.0 / g;
}

Vec3 boundary_point(const ConvexBody& k, const Vec3& d) { return radial(k, d) * d; }

// --- support -----------------------------------------------------------------

namespace {

SupportResult smooth_support(const SmoothBody& s, double frame_r, const Vec3& u,
                             std::optional<Vec3> seed) {
  // maximize f(v) = (v.u)/mu(v); superlevel sets are spherically convex, so
  // damped Newton ascent from a positive seed converges to the global max
  auto f = [&](const Vec3& v) { return v.dot(u) / smooth_eval(s, v).mu; };
  Vec3 v = u.normalized();
  double fv = f(v);
  if (seed && seed->norm() > 0) {
    const Vec3 w = seed->normalized();
    const double fw = w.dot(u) > 0 ? f(w) : -1;
    if (fw > fv) { v = w; fv = fw; }
  }
  const double gtol = 1e-13 * u.norm() / std::max(frame_r, 1e-6);
  for (int it = 0; it < 80; ++it) {
    const SmoothEval e = smooth_eval(s, v);
    const double mu = e.mu;
    const Vec3 grad_mu = smooth_gauge_gradient(s, v);
    const Vec3 g3 = u / mu - (v.dot(u) / (mu * mu)) * grad_mu; // grad of f at v
    // tangent chart
    const PlaneFrame t = plane_from_normal(v);
    const Vec2 g2(t.e1.dot(g3), t.e2.dot(g3));
    if (g2.norm() <= gtol) break;
    // chart Hessian
    const Mat3 hmu = smooth_gauge_hessian(s, v);
    Mat3 h3 = -(u * grad_mu.transpose() + grad_mu * u.transpose()) / (mu * mu) -
              (v.dot(u) / (mu * mu)) * hmu +
              (2.0 * v.dot(u) / (mu * mu * mu)) * (grad_mu * grad_mu.transpose());
    Eigen::Matrix2d h2;
    h2(0, 0) = t.e1.dot(h3 * t.e1);
    h2(0, 1) = t.e1.dot(h3 * t.e2);
    h2(1, 0) = t.e2.dot(h3 * t.e1);
    h2(1, 1) = t.e2.dot(h3 * t.e2);
    Vec2 step;
    const double det = h2.determinant();
    const double tr = h2.trace();
    if (det > 0 && tr < 0) { // negative definite: Newton
      step = -h2.inverse() * g2;
    } else {
      step = g2; // plain ascent
    }
    if (step.norm() > 0.5) step *= 0.5 / step.norm();
    double lam = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Vec3 w = (v + lam * (step.x() * t.e1 + step.y() * t.e2)).normalized();
      const double fw = f(w);
      if (fw > fv) {
        v = w;
        fv = fw;
        moved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!moved) break;
  }
  return {fv, v / smooth_eval(s, v).mu};
}

} // namespace

SupportResult support(const ConvexBody& k, const Vec3& u, std::optional<Vec3> seed) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape))
    return smooth_support(*s, k.frame.r, u, seed);
  const VPolytope& p = k.vform();
  double best = -std::numeric_limits<double>::infinity();
  Vec3 arg = Vec3::Zero();
  for (const auto& v : p.vertices) {
    const double d = u.dot(v);
    if (d > best) { best = d; arg = v; }
  }
  return {best, arg};
}

// --- polar -------------------------------------------------------------------

ConvexBody polar(const ConvexBody& k, const Vec3& z, int ndirs) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) {
    if (smooth_eval(*s, z).mu >= 1.0 - tol::boundary && z.norm() > 0)
      throw GeometryError("polar center is not interior");
    std::vector<Halfspace> hs;
    hs.reserve(ndirs);
    for (const auto& d : fibonacci_directions(ndirs)) {
      const Vec3 x = d / smooth_eval(*s, d).mu; // boundary point
      hs.push_back({x - z, 1.0});
    }
    ConvexBody out = ConvexBody::from_halfspaces(std::move(hs), Vec3::Zero());
    if (z.norm() > 0) { // K^z = z + (K - z)^polar
      VPolytope v = out.vform();
      for (auto& p : v.vertices) p += z;
      out = ConvexBody::polytope(convex_hull(v.vertices));
    }
    out.approximate = true;
    return out;
  }
  const VPolytope& p = k.vform();
  std::vector<Halfspace> hs;
  hs.reserve(p.vertices.size());
  for (const auto& v : p.vertices) hs.push_back({v - z, 1.0});
  VPolytope dual = halfspace_intersection(hs, Vec3::Zero());
  if (z.norm() > 0)
    for (auto& v : dual.vertices) v += z;
  ConvexBody out = ConvexBody::polytope(std::move(dual));
  out.approximate = k.approximate;
  return out;
}

double volume(const ConvexBody& k, double rel_tol) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) {
    auto rho3 = [&](const Vec3& u) {
      const double r = 1.0 / smooth_eval(*s, u).mu;
      return r * r * r / 3.0;
    };
    return smooth_sphere_integral(rho3, *s, rel_tol);
  }
  return volume(k.vform());
}

namespace {

Mat3 adjugate(const Mat3& m) {
  Mat3 a;
  a.row(0) = m.col(1).cross(m.col(2));
  a.row(1) = m.col(2).cross(m.col(0));
  a.row(2) = m.col(0).cross(m.col(1));
  return a;
}

// Cone-volume density of (K - z)° pulled back to the unit sphere through the
// gradient parametrization y(u) = grad mu(u) of the polar boundary (grad mu is
// 0-homogeneous, so u may stay on the sphere). With H = hess mu(u) symmetric,
//   y . (H a x H b) = (adj(H) y) . (a x b),
// so the cone volume element over a sphere chart is (adj(H) y . u)/3 dA, and
// recentering at z sends y to y/(1 - z.y), which cubes through the triple
// product. No support maximization is involved; every sample is one gradient
// and one Hessian of the gauge.
double polar_cone_density(const SmoothBody& s, const Vec3& u, const Vec3& z,
                          Vec3* y_z = nullptr) {
  const Vec3 y = smooth_gauge_gradient(s, u);
  const Mat3 h = smooth_gauge_hessian(s, u);
  const double dens = (adjugate(h) * y).dot(u) / 3.0;
  double phi = 1.0;
  if (z.norm() > 0) {
    phi = 1.0 - z.dot(y);
    if (phi <= tol::feasibility)
      throw GeometryError("polar base point is not interior");
  }
  if (y_z) *y_z = y / phi;
  return dens / (phi * phi * phi);
}

} // namespace

double polar_volume(const ConvexBody& k, double rel_tol) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) {
    auto dens = [&](const Vec3& u) { return polar_cone_density(*s, u, Vec3::Zero()); };
    return smooth_sphere_integral(dens, *s, rel_tol);
  }
  const VPolytope& p = k.vform();
  std::vector<Vec3> duals;
  duals.reserve(p.facets.size());
  for (const auto& f : p.facets) {
    if (f.offset <= tol::feasibility) throw GeometryError("polar volume requires the origin interior");
    duals.push_back(f.normal / f.offset);
  }
  return volume(convex_hull(duals));
}

double polar_volume(const ConvexBody& k, const Vec3& z, double rel_tol) {
  if (z.norm() == 0) return polar_volume(k, rel_tol);
  if (k.is_polytope()) return volume(polar(k, z), rel_tol); // translation drops out
  const auto& s = std::get<SmoothBody>(k.shape);
  auto dens = [&](const Vec3& u) { return polar_cone_density(s, u, z); };
  return smooth_sphere_integral(dens, s, rel_tol);
}

Vec3 polar_centroid(const ConvexBody& k, const Vec3& z) {
  if (k.is_polytope()) return centroid(polar(k, z).vform()) - z;
  const auto& s = std::get<SmoothBody>(k.shape);
  // centroid = (1/4) moment of the boundary over cone measure / volume; the
  // equal-area grid weights cancel in the ratio.
  Vec3 m1 = Vec3::Zero();
  double m0 = 0;
  for (const auto& u : fibonacci_directions(8192)) {
    Vec3 y_z;
    const double d = polar_cone_density(s, u, z, &y_z);
    m1 += d * y_z;
    m0 += d;
  }
  if (m0 <= 0) throw GeometryError("polar centroid: degenerate cone measure");
  return 0.75 * m1 / m0;
}

// --- boundary map -------------------------------------------------------------

Vec3 smooth_gauge_gradient(const SmoothBody& s, const Vec3& x) {
  const SmoothEval e = smooth_eval(s, x);
  if (e.mmax <= 0) throw PreconditionError("gauge gradient undefined at the origin");
  Vec3 g = Vec3::Zero();
  for (size_t i = 0; i < s.normals.size(); ++i)
    if (e.t[i] > 0) g += std::pow(e.t[i], s.p - 1) * s.normals[i];
  return std::pow(e.s1, 1.0 / s.p - 1.0) * g;
}

Mat3 smooth_gauge_hessian(const SmoothBody& s, const Vec3& x) {
  const SmoothEval e = smooth_eval(s, x);
  if (e.mmax <= 0) throw PreconditionError("gauge Hessian undefined at the origin");
  Vec3 g = Vec3::Zero();
  Mat3 h = Mat3::Zero();
  for (size_t i = 0; i < s.normals.size(); ++i) {
    if (e.t[i] <= 0) continue;
    g += std::pow(e.t[i], s.p - 1) * s.normals[i];
    h += std::pow(e.t[i], s.p - 2) * (s.normals[i] * s.normals[i].transpose());
  }
  const double c1 = std::pow(e.s1, 1.0 / s.p - 1.0);
  const double c2 = std::pow(e.s1, 1.0 / s.p - 2.0);
  return ((s.p - 1.0) / e.mmax) * (c1 * h - c2 * (g * g.transpose()));
}

Vec3 lambda_map(const ConvexBody& k, const Vec3& x) {
  const double g = gauge(k, x);
  if (std::abs(g - 1.0) > tol::boundary)
    throw PreconditionError("lambda_map requires a boundary point (|gauge - 1| <= 1e-7)");
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) return smooth_gauge_gradient(*s, x);
  const VPolytope& p = k.vform();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : p.facets) best = std::max(best, f.normal.dot(x) / f.offset);
  for (size_t i = 0; i < p.facets.size(); ++i) {
    const auto& f = p.facets[i];
    if (f.normal.dot(x) / f.offset >= best - tol::boundary) return f.normal / f.offset;
  }
  throw GeometryError("lambda_map: no active facet"); // unreachable
}

SmoothApprox smooth_approx(const ConvexBody& k, double p, const SymmetryGroup* g) {
  if (std::holds_alternative<SmoothBody>(k.shape))
    throw PreconditionError("smooth_approx expects a polytope form");
  const VPolytope& v = k.vform();
  std::vector<Vec3> normals;
  normals.reserve(v.facets.size());
  for (const auto& f : v.facets) {
    if (f.offset <= tol::feasibility)
      throw PreconditionError("smooth_approx requires the origin interior");
    normals.push_back(f.normal / f.offset);
  }
  if (g) {
    for (const auto& m : g->elements)
      for (const auto& n : normals) {
        const Vec3 gn = m * n;
        const bool found = std::any_of(normals.begin(), normals.end(), [&](const Vec3& o) {
          return (o - gn).norm() <= tol::orbit_merge * std::max(1.0, gn.norm());
        });
        if (!found)
          throw InvarianceError("facet family is not closed under the group; cannot smooth equivariantly");
      }
  }
  SmoothApprox out{ConvexBody::smooth(std::move(normals), p), 0.0};
  const double m = static_cast<double>(v.facets.size());
  out.hausdorff_bound = (std::pow(m, 1.0 / p) - 1.0) * v.outer_radius();
  return out;
}

double gauge_gradient_check(const SmoothBody& s, const std::vector<Vec3>& xs) {
  double worst = 0;
  for (const auto& x : xs) {
    const Vec3 g = smooth_gauge_gradient(s, x);
    Vec3 fd;
    const double h = 1e-5 * std::max(1.0, x.norm());
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = h;
      fd[i] = (smooth_eval(s, x + e).mu - smooth_eval(s, x - e).mu) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

// --- sections and shadows ------------------------------------------------------

double Section2::radial2(const Vec2& d) const {
  if (d.norm() == 0) throw PreconditionError("radial2 at the origin");
  if (poly) return poly->radial(d);
  const double g = gauge2(d);
  if (g <= 0) throw GeometryError("section gauge vanished");
  return 1.0 / g;
}

Vec2 Section2::lambda2(const Vec2& x) const {
  if (poly) {
    const size_t n = poly->pts.size();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<Vec2, double>> edges; // (outward normal, offset)
    for (size_t i = 0; i < n; ++i) {
      const Vec2 p = poly->pts[i], q = poly->pts[(i + 1) % n];
      const Vec2 e = q - p;
      Vec2 m(e.y(), -e.x());
      m.normalize();
      const double c = m.dot(p);
      edges.push_back({m, c});
      best = std::max(best, m.dot(x) / c);
    }
    if (std::abs(best - 1.0) > tol::boundary)
      throw PreconditionError("lambda2 requires a boundary point");
    for (const auto& [m, c] : edges)
      if (m.dot(x) / c >= best - tol::boundary) return m / c;
  }
  const double g = gauge2(x);
  if (std::abs(g - 1.0) > tol::boundary)
    throw PreconditionError("lambda2 requires a boundary point");
  const double h = 1e-6 * std::max(1.0, x.norm());
  Vec2 fd;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e[i] = h;
    fd[i] = (gauge2(x + e) - gauge2(x - e)) / (2 * h);
  }
  return fd;
}

namespace {

Section2 section_from_polygon(const PlaneFrame& f, Polygon2 poly) {
  Section2 s;
  s.frame = f;
  // capture edge halfplanes for the gauge closure
  const size_t n = poly.pts.size();
  std::vector<std::pair<Vec2, double>> edges;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = poly.pts[i], q = poly.pts[(i + 1) % n];
    const Vec2 e = q - p;
    const Vec2 m(e.y(), -e.x());
    edges.push_back({m, m.dot(p)});
  }
  s.gauge2 = [edges](const Vec2& x) {
    double g = 0;
    for (const auto& [m, c] : edges) {
      if (c <= 0) throw PreconditionError("section gauge requires the origin interior");
      g = std::max(g, m.dot(x) / c);
    }
    return g;
  };
  s.poly = std::move(poly);
  return s;
}

} // namespace

Section2 cross_section(const ConvexBody& k, const PlaneFrame& f) {
  if (const auto* sb = std::get_if<SmoothBody>(&k.shape)) {
    Section2 s;
    s.frame = f;
    const SmoothBody body = *sb; // small copy keeps the closure self-contained
    s.gauge2 = [body, f](const Vec2& x) { return smooth_eval(body, f.to3(x)).mu; };
    return s;
  }
  Polygon2 poly = cross_section_polygon(k.vform(), f);
  if (poly.pts.size() < 3) throw GeometryError("cross-section is empty or degenerate");
  return section_from_polygon(f, std::move(poly));
}

Section2 projection(const ConvexBody& k, const PlaneFrame& f, int nangles) {
  if (std::holds_alternative<SmoothBody>(k.shape)) {
    std::vector<Vec2> pts;
    pts.reserve(nangles);
    std::optional<Vec3> seed;
    std::vector<double> h(nangles);
    std::vector<Vec2> dir(nangles);
    for (int i = 0; i < nangles; ++i) {
      const double th = 2 * kPi * i / nangles;
      dir[i] = Vec2(std::cos(th), std::sin(th));
      const SupportResult sr = support(k, f.to3(dir[i]), seed);
      seed = sr.argmax;
      h[i] = sr.h;
    }
    for (int i = 0; i < nangles; ++i) { // consecutive support-line intersections
      const int j = (i + 1) % nangles;
      Eigen::Matrix2d a;
      a << dir[i].x(), dir[i].y(), dir[j].x(), dir[j].y();
      pts.push_back(a.inverse() * Vec2(h[i], h[j]));
    }
    return section_from_polygon(f, hull2(pts));
  }
  return section_from_polygon(f, projection_polygon(k.vform(), f));
}

// --- invariance -----------------------------------------------------------------

bool is_invariant(const SymmetryGroup& g, const ConvexBody& k, double eps) {
  if (const auto* s = std::get_if<SmoothBody>(&k.shape)) {
    static const std::vector<Vec3> dirs = fibonacci_directions(128);
    for (const auto& m : g.elements)
      for (const auto& d : dirs) {
        const double r1 = 1.0 / smooth_eval(*s, d).mu;
        const double r2 = 1.0 / smooth_eval(*s, m.transpose() * d).mu;
        if (std::abs(r1 - r2) > eps * std::max(1.0, r1)) return false;
      }
    return true;
  }
  const auto& verts = k.vform().vertices;
  double scale = 1;
  for (const auto& v : verts) scale = std::max(scale, v.norm());
  for (const auto& m : g.elements)
    for (const auto& v : verts) {
      const Vec3 w = m * v;
      const bool found = std::any_of(verts.begin(), verts.end(),
                                     [&](const Vec3& q) { return (q - w).norm() <= eps * scale; });
      if (!found) return false;
    }
  return true;
}

ConvexBody linear_image(const ConvexBody& k, const Mat3& m) {
  if (std::abs(m.determinant()) < 1e-12)
    throw PreconditionError("linear_image requires a nonsingular map");
  if (std::holds_alternative<SmoothBody>(k.shape))
    throw PreconditionError("linear_image supports polytope forms only");
  std::vector<Vec3> verts = k.vform().vertices;
  for (auto& v : verts) v = m * v;
  return ConvexBody::polytope(convex_hull(verts));
}

// --- spherical quadrature ---------------------------------------------------------

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

namespace {

// One subdivision level: the four half-edge-midpoint children of a triangle
// with their centroid-rule panel values.
struct KidSet {
  Vec3 tri[4][3];
  double val[4];
  double sum = 0;
};

KidSet split4(const std::function<double(const Vec3&)>& f, const Vec3& a, const Vec3& b,
              const Vec3& c) {
  const Vec3 mab = (a + b).normalized();
  const Vec3 mbc = (b + c).normalized();
  const Vec3 mca = (c + a).normalized();
  KidSet ks;
  const Vec3 tri[4][3] = {{a, mab, mca}, {mab, b, mbc}, {mca, mbc, c}, {mab, mbc, mca}};
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 3; ++i) ks.tri[j][i] = tri[j][i];
    const double area = std::abs(spherical_triangle_area(tri[j][0], tri[j][1], tri[j][2]));
    ks.val[j] = area * f((tri[j][0] + tri[j][1] + tri[j][2]).normalized());
    ks.sum += ks.val[j];
  }
  return ks;
}

// A refinement candidate: a spherical triangle carrying the two-level
// Richardson estimate of its panel integral. R1 compares this panel against
// its kids, R2 the kids against the grandkids; |R2 - R1| tracks the delivered
// (extrapolated) accuracy rather than the raw midpoint difference, which is
// two orders more pessimistic.
struct QuadNode {
  Vec3 tri[3];
  double best; // R2 + (R2 - R1)/15
  double err;  // |R2 - R1|
  double area;
  int depth = 0;
};

QuadNode make_node(const std::function<double(const Vec3&)>& f, const Vec3& a, const Vec3& b,
                   const Vec3& c, double i1, int depth) {
  const KidSet ks = split4(f, a, b, c);
  const double r1 = ks.sum + (ks.sum - i1) / 3.0;
  double r2 = 0;
  for (int j = 0; j < 4; ++j) {
    const KidSet g = split4(f, ks.tri[j][0], ks.tri[j][1], ks.tri[j][2]);
    r2 += g.sum + (g.sum - ks.val[j]) / 3.0;
  }
  QuadNode n;
  n.tri[0] = a;
  n.tri[1] = b;
  n.tri[2] = c;
  n.best = r2 + (r2 - r1) / 15.0;
  n.err = std::abs(r2 - r1);
  n.area = std::abs(spherical_triangle_area(a, b, c));
  n.depth = depth;
  return n;
}

QuadNode make_root(const std::function<double(const Vec3&)>& f, const Vec3& a, const Vec3& b,
                   const Vec3& c) {
  const double area = std::abs(spherical_triangle_area(a, b, c));
  return make_node(f, a, b, c, area * f((a + b + c).normalized()), 0);
}

// Global greedy refinement: always split the panel with the largest error
// term until the error sum meets the target. Splitting per-level error
// tickets instead would starve integrands whose error concentrates along
// curves (the gauge ridges of high-exponent smooth bodies): a ridge crosses
// ~2^d of the 4^d depth-d panels, so a 4-way ticket split hands it an ever
// shrinking share of the budget and refinement runs to the depth cap.
//
// Panels whose samples are all exactly zero get scattered down to a minimum
// depth before they may settle: an integrand supported on narrow cones
// (the polar cone density of a body with few normals) can otherwise zero out
// a whole panel that in truth carries mass.
double quad_heap(const std::function<double(const Vec3&)>& f, std::vector<QuadNode> roots,
                 double abs_tol, double rel_tol, double area_floor) {
  constexpr int kZeroProbeDepth = 6;
  const auto by_err = [](const QuadNode& a, const QuadNode& b) { return a.err < b.err; };
  std::priority_queue<QuadNode, std::vector<QuadNode>, decltype(by_err)> heap(by_err);
  std::vector<QuadNode> probes;  // all-zero panels pending forced scatter
  std::vector<QuadNode> settled; // panels at the area floor or exactly resolved
  double total = 0, err_sum = 0;
  const auto place = [&](QuadNode&& n) {
    total += n.best;
    err_sum += n.err;
    if (n.err == 0 && n.best == 0 && n.depth < kZeroProbeDepth && n.area > area_floor)
      probes.push_back(std::move(n));
    else
      heap.push(std::move(n));
  };
  for (auto& n : roots) place(std::move(n));
  const long max_pops = 200000; // hard budget: ~17M evaluations
  for (long pops = 0; pops < max_pops; ++pops) {
    const double target = std::max(abs_tol, rel_tol * std::max(std::abs(total), 1e-300));
    if (probes.empty() && (heap.empty() || err_sum <= target)) break;
    QuadNode n;
    if (!probes.empty()) {
      n = std::move(probes.back());
      probes.pop_back();
    } else {
      n = heap.top();
      heap.pop();
      if (n.area <= area_floor || n.err == 0) {
        settled.push_back(n);
        err_sum -= n.err; // irreducible; keep it from driving the loop
        continue;
      }
    }
    total -= n.best;
    err_sum -= n.err;
    const KidSet ks = split4(f, n.tri[0], n.tri[1], n.tri[2]);
    for (int j = 0; j < 4; ++j)
      place(make_node(f, ks.tri[j][0], ks.tri[j][1], ks.tri[j][2], ks.val[j], n.depth + 1));
  }
  double s = 0, comp = 0; // compensated sum over all leaves
  const auto add = [&](double v) {
    const double t = s + v;
    comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  };
  while (!heap.empty()) {
    add(heap.top().best);
    heap.pop();
  }
  for (const auto& n : settled) add(n.best);
  for (const auto& n : probes) add(n.best);
  return s + comp;
}

// Initial panels aligned with the facial structure of a smooth gauge. The
// hull of the normal family is the polar of the underlying polytope; each of
// its facets projects radially to the cone ruled by one primal vertex, and
// the cone's entire polar mass concentrates in a ~1/p-radius spike around the
// primal vertex direction (where the ring dots tie, the gradient sweeps the
// whole polar facet). The vertex ruled by facet {u.y = c} is u/c (polarity),
// and u always lies inside the cone of its ring, so the cone is fanned around
// u and each fan triangle is pre-split toward that apex until the innermost
// panel is below the spike radius. Without the pre-split the spike is a
// needle: every centroid sample of the coarse panels lands in the flat zero
// zone, the panel reports zero error, and greedy refinement never looks
// inside. The fallback plain fan handles a u pushed outside its cone by
// rounding (degenerate inputs); it still tiles correctly.
std::vector<QuadNode> smooth_quad_roots(const std::function<double(const Vec3&)>& f,
                                        const SmoothBody& s) {
  const int levels =
      std::clamp(static_cast<int>(std::ceil(std::log2(s.p))) + 2, 2, 10);
  std::vector<QuadNode> roots;
  const auto corner_fan = [&](const Vec3& apex, Vec3 b, Vec3 c) {
    for (int k = 0; k < levels; ++k) {
      const Vec3 mb = (apex + b).normalized();
      const Vec3 mc = (apex + c).normalized();
      roots.push_back(make_root(f, mb, b, c));
      roots.push_back(make_root(f, mb, c, mc));
      b = mb;
      c = mc;
    }
    roots.push_back(make_root(f, apex, b, c));
  };
  const VPolytope hull = convex_hull(s.normals);
  for (const auto& fc : hull.facets) {
    const int m = static_cast<int>(fc.ring.size());
    std::vector<Vec3> ring(m);
    for (int i = 0; i < m; ++i) ring[i] = hull.vertices[fc.ring[i]].normalized();
    bool star = fc.offset > tol::feasibility;
    for (int i = 0; i < m && star; ++i)
      star = fc.normal.dot(ring[i].cross(ring[(i + 1) % m])) > 0;
    if (star)
      for (int i = 0; i < m; ++i)
        corner_fan(fc.normal, ring[i], ring[(i + 1) % m]);
    else
      for (int i = 1; i + 1 < m; ++i)
        roots.push_back(make_root(f, ring[0], ring[i], ring[i + 1]));
  }
  return roots;
}

constexpr double kAreaFloor = 4.0 * EIGEN_PI * 1.4e-15; // ~ depth 24 of an octant

double smooth_sphere_integral(const std::function<double(const Vec3&)>& f, const SmoothBody& s,
                              double rel_tol) {
  return quad_heap(f, smooth_quad_roots(f, s), 0.0, rel_tol, kAreaFloor);
}

} // namespace

double sphere_triangle_integral(const std::function<double(const Vec3&)>& f, const Vec3& a,
                                const Vec3& b, const Vec3& c, double abs_tol, int max_depth) {
  QuadNode root = make_root(f, a.normalized(), b.normalized(), c.normalized());
  const double floor = root.area * std::pow(0.25, std::max(0, max_depth));
  return quad_heap(f, {root}, abs_tol, 0.0, floor);
}

double sphere_integral(const std::function<double(const Vec3&)>& f, double rel_tol) {
  std::vector<QuadNode> roots;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        Vec3 a(sx, 0, 0), b(0, sy, 0), c(0, 0, sz);
        if (a.dot(b.cross(c)) < 0) std::swap(b, c);
        roots.push_back(make_root(f, a, b, c));
      }
  return quad_heap(f, std::move(roots), 0.0, rel_tol, kAreaFloor);
}

std::vector<Vec3> fibonacci_directions(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double ga = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = ga * i;
    out.push_back(Vec3(r * std::cos(phi), r * std::sin(phi), z));
  }
  return out;
}

} // namespace mahler
