#include "mahler/mahler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mahler {

double volume_product(const ConvexBody& k, VPMode mode) {
  const double vol = volume(k);
  if (mode == VPMode::AtOrigin) return vol * polar_volume(k);
  return vol * santalo_point(k).polar_volume_at_z;
}

SantaloResult santalo_point(const ConvexBody& k, double tol) {
  SantaloResult res;
  // Sampled polars put a floor on how well the polar centroid can be located;
  // exact polytope paths can push all the way down to `tol`.
  const bool exact = k.is_polytope() && !k.approximate;
  if (!exact) tol = std::max(tol, 1e-3);
  res.z = k.is_polytope() ? centroid(k.vform()) : Vec3::Zero();
  if (gauge(k, res.z) >= 1) res.z = Vec3::Zero(); // defensive; centroid is interior
  double vol = polar_volume(k, res.z, tol::quadrature);
  Vec3 grad = polar_centroid(k, res.z);
  res.displacement = grad.norm();

  for (int it = 0; it < 120 && res.displacement > tol; ++it) {
    res.iterations = it + 1;
    double step = 1.0;
    bool moved = false;
    for (int half = 0; half < 40; ++half, step /= 2) {
      const Vec3 cand = res.z - step * grad;
      if (gauge(k, cand) >= 0.95) continue; // stay well interior
      const double cvol = polar_volume(k, cand, tol::quadrature);
      if (cvol < vol) {
        const double rel_drop = (vol - cvol) / vol;
        res.z = cand;
        vol = cvol;
        moved = true;
        if (rel_drop < tol) it = 120; // converged in value
        break;
      }
    }
    if (!moved) break; // line search stalled; Nelder-Mead polish below
    grad = polar_centroid(k, res.z);
    res.displacement = grad.norm();
  }

  if (exact && res.displacement > tol) {
    // Derivative-free polish for the rare stalled case.
    const double h = 0.05 * std::max(k.frame.r, 1e-3);
    std::vector<std::pair<double, Vec3>> simplex;
    const Vec3 offs[4] = {Vec3::Zero(), Vec3(h, 0, 0), Vec3(0, h, 0), Vec3(0, 0, h)};
    const auto f = [&](const Vec3& z) {
      if (gauge(k, z) >= 0.98) return std::numeric_limits<double>::infinity();
      return polar_volume(k, z, tol::quadrature);
    };
    for (const Vec3& o : offs) simplex.push_back({f(res.z + o), res.z + o});
    for (int it = 0; it < 100; ++it) {
      std::sort(simplex.begin(), simplex.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (simplex.back().first - simplex.front().first <
          tol * std::max(1.0, simplex.front().first))
        break;
      const Vec3 c = (simplex[0].second + simplex[1].second + simplex[2].second) / 3.0;
      const Vec3 refl = c + (c - simplex[3].second);
      const double fr = f(refl);
      if (fr < simplex[0].first) {
        const Vec3 exp = c + 2.0 * (c - simplex[3].second);
        const double fe = f(exp);
        simplex[3] = fe < fr ? std::pair{fe, exp} : std::pair{fr, refl};
      } else if (fr < simplex[2].first) {
        simplex[3] = {fr, refl};
      } else {
        const Vec3 con = c + 0.5 * (simplex[3].second - c);
        const double fc = f(con);
        if (fc < simplex[3].first) {
          simplex[3] = {fc, con};
        } else {
          for (int i = 1; i < 4; ++i) {
            simplex[i].second = simplex[0].second + 0.5 * (simplex[i].second - simplex[0].second);
            simplex[i].first = f(simplex[i].second);
          }
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (simplex.front().first < vol) {
      res.z = simplex.front().second;
      vol = simplex.front().first;
      res.displacement = polar_centroid(k, res.z).norm();
    }
  }
  res.polar_volume_at_z = vol;
  return res;
}

namespace {

void put(ChainReport& r, const std::string& name, double lhs, double rhs, bool identity) {
  r.terms.push_back({name, lhs, rhs, identity});
}

void put_vec(ChainReport& r, const std::string& key, const Vec3& v) {
  r.details[key + ".x"] = v.x();
  r.details[key + ".y"] = v.y();
  r.details[key + ".z"] = v.z();
}

constexpr double kChainResidualGate = 1e-6;

} // namespace

ChainReport chain_d2(const ConvexBody& k, const D2Partition& part, int n) {
  ChainReport r;
  if (part.residual > kChainResidualGate) {
    r.skip_reason = "chain-skipped: equipartition residual above 1e-6";
    return r;
  }
  r.run = true;
  const double s = 1.0 / gauge(k, -part.p); // put v--- on the boundary
  const Vec3 p = s * part.p;
  const Vec3 vmmm = -p;
  const Vec3 vpmp(p.x(), -p.y(), p.z());
  const Vec3 vppm(p.x(), p.y(), -p.z());
  const Vec3 vmpp(-p.x(), p.y(), p.z());

  const Polyline c1 = radial_curve(k, vpmp, vppm, n);
  const Polyline c2 = radial_curve(k, vppm, vmpp, n);
  const Polyline c3 = radial_curve(k, vmpp, vpmp, n);
  const Vec3 cb[3] = {cbar(c1), cbar(c2), cbar(c3)};
  const Vec3 lb[3] = {cbar(lambda_image(k, c1)), cbar(lambda_image(k, c2)),
                      cbar(lambda_image(k, c3))};
  const Vec3 apolar = -lambda_limit(k, vmmm); // (a°, b°, c°)

  const double volK = volume(k);
  const double volKp = polar_volume(k);
  const double k0 = cone_region_volume(k, {vmpp, vpmp, vppm});
  const double lk0 = volKp / 4; // |Lambda(K0)|: the images tile K°
  const Vec3 sc = cb[0] + cb[1] + cb[2];
  const Vec3 sl = lb[0] + lb[1] + lb[2];
  const double dots[3] = {cb[0].dot(lb[0]), cb[1].dot(lb[1]), cb[2].dot(lb[2])};
  const double aa = p.x() * apolar.x(), bb = p.y() * apolar.y(), cc = p.z() * apolar.z();

  put(r, "volume-tiling", volK, 4 * k0, true);
  put(r, "surface-volume", 9 * k0 * lk0, sc.dot(sl), false);
  put(r, "cross-cancellation", sc.dot(sl), 2 * (dots[0] + dots[1] + dots[2]), true);
  put(r, "arc-pairing-1", dots[0], bb + cc, false);
  put(r, "arc-pairing-2", dots[1], aa + cc, false);
  put(r, "arc-pairing-3", dots[2], aa + bb, false);
  put(r, "dual-pairing", aa + bb + cc, 1.0, true);
  r.final_bound = (16.0 / 9.0) * 2 * (dots[0] + dots[1] + dots[2]);
  put(r, "product-dominates-chain", volK * volKp, r.final_bound, false);

  r.details["scale"] = s;
  put_vec(r, "p", p);
  put_vec(r, "apolar", apolar);
  for (int i = 0; i < 3; ++i) {
    put_vec(r, "cbar" + std::to_string(i + 1), cb[i]);
    put_vec(r, "lbar" + std::to_string(i + 1), lb[i]);
  }
  r.details["k0"] = k0;
  r.details["lambda_k0"] = lk0;
  r.details["volume"] = volK;
  r.details["polar_volume"] = volKp;
  r.details["residual"] = part.residual;
  return r;
}

ChainReport chain_s4(const ConvexBody& k, const S4Balance& bal, int n) {
  ChainReport r;
  if (bal.residual > kChainResidualGate) {
    r.skip_reason = "chain-skipped: balance residual above 1e-6";
    return r;
  }
  r.run = true;
  const Mat3 g = SymmetryGroup::s4_generator();
  const double u = bal.u;
  Vec3 v0(1, 0, u);
  v0 /= gauge(k, v0); // dilate onto the boundary
  const Vec3 v1 = g * v0;
  const Vec3 v2 = g * v1;

  const Polyline c01 = radial_curve(k, v0, v1, n);
  const Polyline c12 = radial_curve(k, v1, v2, n);
  const Polyline c20 = radial_curve(k, v2, v0, n);
  const Vec3 cb01 = cbar(c01), cb12 = cbar(c12), cb20 = cbar(c20);
  const Vec3 lb01 = cbar(lambda_image(k, c01));
  const Vec3 lb12 = cbar(lambda_image(k, c12));
  const Vec3 lb20 = cbar(lambda_image(k, c20));

  const double volK = volume(k);
  const double volKp = polar_volume(k);
  const double k0 = cone_region_volume(k, {v0, v1, v2});
  const double k0p = volKp / 4;
  const Vec3 sc = cb01 + cb12 + cb20;
  const Vec3 sl = lb01 + lb12 + lb20;
  const double c = cb01.z(), beta = cb20.y();
  const double apo = lb01.x(), bpo = lb01.y(), cpo = lb01.z(), bpo20 = lb20.y();
  const Vec3 l0 = lambda_limit(k, v0), l1 = lambda_limit(k, v1), l2 = lambda_limit(k, v2);

  put(r, "volume-tiling", volK, 4 * k0, true);
  put(r, "surface-volume", 9 * k0 * k0p, sc.dot(sl), false);
  put(r, "a-eq-minus-uc", cb01.x(), -u * c, true);
  put(r, "b-eq-uc", cb01.y(), u * c, true);
  put(r, "alpha-zero", cb20.x(), 0.0, true);
  put(r, "gamma-zero", cb20.z(), 0.0, true);
  put(r, "gamma-polar-zero", lb20.z(), 0.0, true);
  put(r, "curve-equivariance", (cb12 + g * cb01).norm(), 0.0, true);
  put(r, "image-equivariance", (lb12 + g * lb01).norm(), 0.0, true);
  put(r, "star-assembly", sc.dot(sl), (2 * u * c + beta) * (-apo + bpo + bpo20) + 4 * c * cpo,
      true);
  put(r, "balance-cancellation", sc.dot(sl), 4 * cb01.dot(lb01) + 2 * cb20.dot(lb20), true);
  put(r, "arc-pairing-01", cb01.dot(lb01), 0.25 * (v0 - v1).dot(l0 - l1), false);
  put(r, "arc-pairing-20", cb20.dot(lb20), 0.25 * (v2 - v0).dot(l2 - l0), false);
  put(r, "pairing-sum", (v0 - v1).dot(l0 - l1) + 0.5 * (v2 - v0).dot(l2 - l0), 4.0, true);
  r.final_bound = (16.0 / 9.0) * (4 * cb01.dot(lb01) + 2 * cb20.dot(lb20));
  put(r, "product-dominates-chain", volK * volKp, r.final_bound, false);

  r.details["u"] = u;
  r.details["residual"] = bal.residual;
  put_vec(r, "v0", v0);
  put_vec(r, "cbar01", cb01);
  put_vec(r, "cbar12", cb12);
  put_vec(r, "cbar20", cb20);
  put_vec(r, "lbar01", lb01);
  put_vec(r, "lbar12", lb12);
  put_vec(r, "lbar20", lb20);
  r.details["k0"] = k0;
  r.details["k0_polar"] = k0p;
  r.details["volume"] = volK;
  r.details["polar_volume"] = volKp;
  return r;
}

namespace {

std::optional<Mat3> match_four(const std::vector<Vec3>& verts, const std::vector<Vec3>& ref,
                               const SymmetryGroup& g) {
  const double scale = std::max({verts[0].norm(), verts[1].norm(), verts[2].norm(),
                                 verts[3].norm(), 1.0});
  std::array<int, 4> idx{0, 1, 2, 3};
  std::sort(idx.begin(), idx.end());
  do {
    Mat3 rm, vm;
    for (int i = 0; i < 3; ++i) {
      rm.col(i) = ref[i];
      vm.col(i) = verts[idx[i]];
    }
    if (std::abs(rm.determinant()) < 1e-12) continue;
    const Mat3 m = vm * rm.inverse();
    if ((m * ref[3] - verts[idx[3]]).norm() > 1e-8 * scale) continue;
    if (std::abs(m.determinant()) < 1e-12) continue;
    bool commutes = true;
    const double mscale = m.cwiseAbs().maxCoeff();
    for (const Mat3& h : g.elements)
      if ((h * m - m * h).cwiseAbs().maxCoeff() > 1e-8 * mscale) {
        commutes = false;
        break;
      }
    if (commutes) return m;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return std::nullopt;
}

std::pair<std::optional<Mat3>, std::string> simplex_diagnosis(const ConvexBody& k,
                                                              const SymmetryGroup& g) {
  if (!k.is_polytope()) return {std::nullopt, "none"};
  const bool s4_like = g.name == GroupName::S4 || g.name == GroupName::D2d;
  const ConvexBody ref = s4_like ? make_simplex_s4(1) : make_simplex_d2(1, 1, 1);
  const VPolytope& p = k.vform();
  if (p.nvertices() == 4) {
    if (auto m = match_four(p.vertices, ref.vform().vertices, g)) return {m, "simplex"};
  }
  if (p.nfacets() == 4) {
    const ConvexBody kp = polar(k);
    if (kp.vform().nvertices() == 4)
      if (auto m = match_four(kp.vform().vertices, ref.vform().vertices, g))
        return {Mat3(m->inverse().transpose()), "polar-simplex"};
  }
  return {std::nullopt, "none"};
}

} // namespace

std::optional<Mat3> is_simplex_image(const ConvexBody& k, const SymmetryGroup& g) {
  return simplex_diagnosis(k, g).first;
}

VerifyReport verify(const ConvexBody& k, const SymmetryGroup& g, double tol, bool run_chain) {
  if (!is_invariant(g, k, k.approximate ? 1e-6 : 1e-9))
    throw InvarianceError("body is not invariant under " + to_string(g.name));
  VerifyReport r;
  r.group = to_string(g.name);
  r.tolerance = tol;
  r.volume = volume(k);
  r.polar_volume = polar_volume(k);
  r.product = r.volume * r.polar_volume;
  r.gap = r.product - kSimplexBound;
  r.bound_ok = r.gap >= -tol;

  const bool s4_chain = g.name == GroupName::S4 || g.name == GroupName::D2d;
  const bool d2_chain =
      g.name == GroupName::D2 || g.name == GroupName::T || g.name == GroupName::Td;
  try {
    if (!run_chain)
      r.chain.skip_reason = "chain-skipped: disabled by caller";
    else if (s4_chain)
      r.chain = chain_s4(k, solve_s4(k));
    else if (d2_chain)
      r.chain = chain_d2(k, solve_d2(k, 1e-9));
    else
      r.chain.skip_reason = "chain-skipped: no chain for group " + to_string(g.name);
  } catch (const SolverError& e) {
    r.chain.run = false;
    r.chain.skip_reason = std::string("chain-skipped: ") + e.what();
  }

  auto [witness, kind] = simplex_diagnosis(k, g);
  r.equality = kind;
  r.simplex_witness = witness;
  return r;
}

ConvexBody random_invariant_body(const SymmetryGroup& g, int n_seeds, BodyKind kind,
                                 std::uint64_t seed) {
  if (n_seeds < 1) throw PreconditionError("n_seeds must be at least 1");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n_seeds; ++i) {
      const Vec3 dir = random_direction(rng);
      const double rad = 0.5 + 0.5 * uniform01(rng);
      const auto orb = orbit(g, rad * dir);
      pts.insert(pts.end(), orb.begin(), orb.end());
    }
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = 0.3;
      pts.push_back(e);
      pts.push_back(-e);
    }
    try {
      ConvexBody body = kind == BodyKind::Polytope ? ConvexBody::polytope(convex_hull(pts))
                                                   : ConvexBody::smooth(pts, 8);
      if (body.frame.r > 1e-3 && is_invariant(g, body, 1e-9)) return body;
    } catch (const GeometryError&) {
      // degenerate draw; try the next one
    }
  }
  throw GeometryError("random invariant body: no valid draw in 16 attempts");
}

} // namespace mahler
