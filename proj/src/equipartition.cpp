#include "mahler/equipartition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace mahler {

namespace {

struct D2Dirs {
  Vec3 vpmp, vppm, vmpp; // sign patterns (+-+), (++-), (-++) applied to p
};

D2Dirs d2_dirs(const Vec3& p) {
  return {{p.x(), -p.y(), p.z()}, {p.x(), p.y(), -p.z()}, {-p.x(), p.y(), p.z()}};
}

double pair_residual(double s1, double s2, double s3) {
  const double hi = std::max({s1, s2, s3});
  const double spread = hi - std::min({s1, s2, s3});
  return hi > 0 ? spread / hi : std::numeric_limits<double>::infinity();
}

} // namespace

std::array<double, 3> d2_ratios(const ConvexBody& k, const Vec3& p, int n) {
  if (p.minCoeff() <= 0) throw PreconditionError("d2_ratios needs positive (a,b,c)");
  const auto [vpmp, vppm, vmpp] = d2_dirs(p);
  const double a = p.x(), b = p.y(), c = p.z();
  const double s1 = sector_area(k, vpmp, vppm, n) / std::sqrt(c * c * a * a + a * a * b * b);
  const double s2 = sector_area(k, vppm, vmpp, n) / std::sqrt(b * b * c * c + a * a * b * b);
  const double s3 = sector_area(k, vmpp, vpmp, n) / std::sqrt(b * b * c * c + c * c * a * a);
  return {s1, s2, s3};
}

Vec2 d2_F(const ConvexBody& k, const Vec3& p, int n) {
  const auto [s1, s2, s3] = d2_ratios(k, p, n);
  static const double h = std::sqrt(3.0) / 2;
  return s1 * Vec2(1, 0) + s2 * Vec2(-0.5, h) + s3 * Vec2(-0.5, -h);
}

std::optional<int> winding_number(const std::function<Vec2(const Vec3&)>& f,
                                  const std::vector<Vec3>& polygon, int samples_per_edge) {
  if (polygon.size() < 3) throw PreconditionError("winding needs a polygon");
  const size_t m = polygon.size();
  for (int s = std::max(samples_per_edge, 2); s <= 1024; s *= 2) {
    std::vector<Vec2> vals;
    vals.reserve(m * s);
    for (size_t i = 0; i < m; ++i)
      for (int j = 0; j < s; ++j) {
        const double t = static_cast<double>(j) / s;
        vals.push_back(f((1 - t) * polygon[i] + t * polygon[(i + 1) % m]));
      }
    bool trusted = true;
    double theta = 0;
    for (size_t i = 0; i < vals.size() && trusted; ++i) {
      const Vec2& f1 = vals[i];
      const Vec2& f2 = vals[(i + 1) % vals.size()];
      const double dtheta = std::atan2(cross2(f1, f2), f1.dot(f2));
      // Only the direction matters for the winding count. Radial growth is
      // harmless (the map blows up like 1/b near the chart corners), and the
      // corner transitions pivot by exactly 60 degrees no matter how finely
      // the edge is sampled, so the step guard must sit above pi/3. A zero
      // crossing between samples shows up as a ~pi flip, which stays caught.
      if (std::min(f1.norm(), f2.norm()) == 0 || std::abs(dtheta) > 2.0) {
        trusted = false;
        break;
      }
      theta += dtheta;
    }
    if (!trusted) continue;
    const double w = theta / (2 * M_PI);
    const long r = std::lround(w);
    if (std::abs(w - r) > 0.25) return std::nullopt;
    return static_cast<int>(r);
  }
  return std::nullopt;
}

namespace {

// Orthonormal chart of the plane a+b+c = 3 centered at (1,1,1).
const Vec3 kChartCenter(1, 1, 1);
const Vec3 kChartT1 = Vec3(1, -1, 0).normalized();
const Vec3 kChartT2 = Vec3(1, 1, -2).normalized();

Vec3 from_chart(const Vec2& x) { return kChartCenter + x.x() * kChartT1 + x.y() * kChartT2; }
Vec2 to_chart(const Vec3& p) { return {(p - kChartCenter).dot(kChartT1), (p - kChartCenter).dot(kChartT2)}; }

struct Tri {
  Vec2 a, b, c;
  Vec2 centroid() const { return (a + b + c) / 3.0; }
  double diameter() const {
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }
};

double start_epsilon(double r) {
  // Smallest dyadic eps <= 1/8 making the start triangle's boundary image
  // provably avoid the origin: r^2 pi / (8 sqrt 2) > r^-2 max{pi sqrt(eps),
  // 2 arccos(1 - 20 eps)}, plus eps < 1/4.
  const double lhs = r * r * M_PI / (8 * std::sqrt(2.0));
  for (double eps = 0.125; eps >= 0x1p-40; eps /= 2) {
    const double worst =
        std::max(M_PI * std::sqrt(eps), 2 * std::acos(std::max(-1.0, 1 - 20 * eps)));
    if (lhs - worst / (r * r) > 0) return eps;
  }
  throw SolverError("equipartition start triangle: body too eccentric (r near zero)");
}

} // namespace

D2Partition solve_d2(const ConvexBody& k, double tol, int n) {
  if (tol <= 0) throw PreconditionError("tolerance must be positive");
  const auto ratios_at = [&](const Vec2& x) {
    Vec3 p = from_chart(x);
    // Newton trials may step outside the open octant; push back just inside.
    const double lo = 1e-9;
    if (p.minCoeff() < lo)
      for (int i = 0; i < 3; ++i) p[i] = std::max(p[i], lo);
    return d2_ratios(k, p, n);
  };
  const auto fmap = [&](const Vec3& p) {
    const auto [s1, s2, s3] = d2_ratios(k, p, n);
    static const double h = std::sqrt(3.0) / 2;
    return Vec2(s1 - 0.5 * (s2 + s3), h * (s2 - s3));
  };
  const auto resid_at = [&](const Vec2& x) {
    const auto [s1, s2, s3] = ratios_at(x);
    return pair_residual(s1, s2, s3);
  };

  const double eps = start_epsilon(k.frame.r);
  const double scale = 3.0 / (1 + 2 * eps);
  Tri start{to_chart(scale * Vec3(1, eps, eps)), to_chart(scale * Vec3(eps, 1, eps)),
            to_chart(scale * Vec3(eps, eps, 1))};

  D2Partition out;
  std::vector<Tri> active{start};
  {
    const auto w =
        winding_number(fmap, {from_chart(start.a), from_chart(start.b), from_chart(start.c)}, 8);
    if (!w || *w == 0)
      throw SolverError("equipartition: start triangle carries no winding certificate");
  }

  const auto newton = [&](Vec2 x, int& iters) -> std::optional<Vec2> {
    double res = resid_at(x);
    for (int it = 0; it < 60; ++it) {
      ++iters;
      if (res <= tol) return x;
      const Vec2 g = [&] {
        const auto [s1, s2, s3] = ratios_at(x);
        return Vec2(s1 - s2, s2 - s3);
      }();
      const double h = 1e-6;
      Eigen::Matrix2d jac;
      for (int j = 0; j < 2; ++j) {
        Vec2 xh = x;
        xh[j] += h;
        const auto [t1, t2, t3] = ratios_at(xh);
        jac(0, j) = ((t1 - t2) - g.x()) / h;
        jac(1, j) = ((t2 - t3) - g.y()) / h;
      }
      if (std::abs(jac.determinant()) < 1e-18) return std::nullopt;
      const Vec2 dx = jac.inverse() * (-g);
      double lambda = 1;
      bool improved = false;
      for (int half = 0; half < 25; ++half, lambda /= 2) {
        const double cand = resid_at(x + lambda * dx);
        if (cand < res) {
          x += lambda * dx;
          res = cand;
          improved = true;
          break;
        }
      }
      if (!improved) return res <= tol ? std::optional<Vec2>(x) : std::nullopt;
    }
    return res <= tol ? std::optional<Vec2>(x) : std::nullopt;
  };

  double target_diam = 0.05;
  for (int attempt = 0; attempt < 4; ++attempt) {
    while (!active.empty() && active.front().diameter() > target_diam && out.tree_depth < 26) {
      std::vector<Tri> next;
      for (const Tri& t : active) {
        const Vec2 ab = (t.a + t.b) / 2, bc = (t.b + t.c) / 2, ca = (t.c + t.a) / 2;
        const Tri kids[4] = {{t.a, ab, ca}, {ab, t.b, bc}, {ca, bc, t.c}, {ab, bc, ca}};
        for (const Tri& kid : kids) {
          if (next.size() >= 64) break;
          const auto w = winding_number(
              fmap, {from_chart(kid.a), from_chart(kid.b), from_chart(kid.c)}, 8);
          if (w && *w != 0) next.push_back(kid);
        }
      }
      if (next.empty()) break; // certificate lost below this depth; Newton from here
      active = std::move(next);
      ++out.tree_depth;
    }

    std::vector<Vec2> zeros;
    double best_res = std::numeric_limits<double>::infinity();
    std::optional<Vec2> best;
    for (const Tri& t : active) {
      const auto z = newton(t.centroid(), out.newton_iters);
      if (!z) continue;
      bool fresh = true;
      for (const Vec2& seen : zeros)
        if ((seen - *z).norm() < 1e-6) fresh = false;
      if (fresh) zeros.push_back(*z);
      const double res = resid_at(*z);
      if (res < best_res) {
        best_res = res;
        best = *z;
      }
    }
    if (best && best_res <= tol) {
      const Vec3 p = from_chart(*best);
      const auto [s1, s2, s3] = d2_ratios(k, p, n);
      out.p = p;
      out.s1 = s1;
      out.s2 = s2;
      out.s3 = s3;
      out.residual = pair_residual(s1, s2, s3);
      out.zero_count = std::max<int>(1, zeros.size());
      return out;
    }
    target_diam /= 16; // Newton had no basin yet: subdivide further and retry
  }
  std::ostringstream msg;
  msg << "equipartition did not reach residual " << tol << " (depth " << out.tree_depth
      << ", candidates " << active.size() << ")";
  throw SolverError(msg.str());
}

std::pair<double, double> s4_c_beta(const ConvexBody& k, double u, int n) {
  if (u <= 0) throw PreconditionError("u must be positive");
  const Mat3 g = SymmetryGroup::s4_generator();
  const Vec3 v0(1, 0, u);
  const Vec3 v1 = g * v0;
  const Vec3 v2 = g * v1;
  const double c = sector_area(k, v0, v1, n) / std::sqrt(1 + 2 * u * u);
  const double beta = sector_area(k, v2, v0, n);
  return {c, beta};
}

S4Balance solve_s4(const ConvexBody& k, double tol, int n) {
  if (tol <= 0) throw PreconditionError("tolerance must be positive");
  const auto eval = [&](double u) {
    const auto [c, beta] = s4_c_beta(k, u, n);
    return std::tuple<double, double, double>(c, beta, u * c / beta);
  };
  S4Balance out;
  const auto pack = [&](double u, double c, double beta) {
    out.u = u;
    out.c_val = c;
    out.beta_val = beta;
    out.residual = std::abs(2 * u * c - beta) / beta;
    return out;
  };

  double m = 1, M = 1;
  auto [c1, b1, t1] = eval(1);
  if (std::abs(2 * c1 - b1) / b1 <= tol) {
    out.bracket_lo = out.bracket_hi = 1;
    return pack(1, c1, b1);
  }
  double tm = t1, tM = t1;
  for (int i = 0; tm > 0.25; ++i) {
    if (i >= 40) throw SolverError("balance bracket: u c / beta stays above 1/4 down to 2^-40");
    m /= 2;
    tm = std::get<2>(eval(m));
  }
  for (int i = 0; tM < 1; ++i) {
    if (i >= 40) throw SolverError("balance bracket: u c / beta stays below 1 up to 2^40");
    M *= 2;
    tM = std::get<2>(eval(M));
  }
  out.bracket_lo = m;
  out.bracket_hi = M;

  // g(u) = 2 u c(u) - beta(u): g(m) <= -beta/2 < 0, g(M) >= beta > 0.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (m + M);
    const auto [c, beta, t] = eval(mid);
    const double g = 2 * mid * c - beta;
    out.iterations = it + 1;
    if (std::abs(g) / beta <= tol || (M - m) < 1e-15 * mid) return pack(mid, c, beta);
    (g < 0 ? m : M) = mid;
  }
  const double mid = 0.5 * (m + M);
  const auto [c, beta, t] = eval(mid);
  return pack(mid, c, beta);
}

} // namespace mahler
