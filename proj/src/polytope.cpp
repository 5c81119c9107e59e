#include "mahler/polytope.hpp"

#include <algorithm>
#include <cmath>
#ifdef HULL_DEBUG_STATS
#include <cstdio>
#endif
#include <map>
#include <set>

namespace mahler {

double VPolytope::outer_radius() const {
  double r = 0;
  for (const auto& v : vertices) r = std::max(r, v.norm());
  return r;
}

double VPolytope::inner_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& f : facets) r = std::min(r, f.offset);
  return r;
}

bool VPolytope::contains(const Vec3& x, double eps) const {
  for (const auto& f : facets)
    if (f.normal.dot(x) > f.offset + eps) return false;
  return true;
}

double VPolytope::support(const Vec3& u) const {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) s = std::max(s, u.dot(v));
  return s;
}

Vec3 VPolytope::vertex_centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices) c += v;
  return c / static_cast<double>(vertices.size());
}

namespace {

// ---------------------------------------------------------------------------
// Incremental triangulated hull.
//
// Points are inserted with a strict visibility threshold; a point whose
// maximal signed facet distance is below it is skipped. Skipped points that
// later turn out to be genuine corners (coplanar with a facet plane but
// outside the facet polygon) are detected by the caller and the build is
// re-run with those points inserted first, when the partial hull is still
// small enough to see them. Orbit polytopes and axis-aligned fixtures hit
// this path routinely, so it is load bearing, not defensive fluff.
// ---------------------------------------------------------------------------

struct Tri {
  int a, b, c;
  Vec3 n;      // unit normal matching the winding (outward when honest)
  double off;  // n . x = off on the plane
  Vec3 nr;     // unnormalized winding normal: visibility tests use raw
  double offr; // orientation determinants, which stay meaningful on slivers
  bool alive = true;
};

struct TriHull {
  std::vector<Vec3> pts; // all candidate points (deduped input)
  std::vector<Tri> tris;
  std::map<std::pair<int, int>, int> owner; // directed edge -> alive triangle
  Vec3 inside;               // strictly interior reference point
  std::vector<int> rejected; // points left well outside by horizon tangles
};

double tri_scale(const std::vector<Vec3>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

// Attach triangle (a, b, c). Cone triangles over a horizon edge must keep the
// given winding: it is what matches the twin edges of the surviving surface,
// and the manifold invariant lives on it. Deciding orientation geometrically
// against the interior witness is reliable only for the well-shaped initial
// tetrahedron; a sliver's normal is noise and the witness test can flip it,
// which registers twin edges of live triangles and double-covers the surface.
void make_tri(TriHull& h, int a, int b, int c, bool orient_by_witness) {
  Tri t;
  t.a = a; t.b = b; t.c = c;
  Vec3 nr = (h.pts[b] - h.pts[a]).cross(h.pts[c] - h.pts[a]);
  const double nn = nr.norm();
  if (nn <= 0) throw GeometryError("degenerate hull triangle");
  if (orient_by_witness && nr.dot(h.inside) > nr.dot(h.pts[a])) {
    std::swap(t.b, t.c);
    nr = -nr;
  }
  t.nr = nr;
  t.offr = nr.dot(h.pts[t.a]);
  t.n = nr / nn;
  t.off = t.n.dot(h.pts[t.a]);
  const int id = static_cast<int>(h.tris.size());
  h.owner[{t.a, t.b}] = id;
  h.owner[{t.b, t.c}] = id;
  h.owner[{t.c, t.a}] = id;
  h.tris.push_back(t);
}

void kill_tri(TriHull& h, int t) {
  Tri& tr = h.tris[t];
  tr.alive = false;
  for (auto [u, v] : {std::pair{tr.a, tr.b}, {tr.b, tr.c}, {tr.c, tr.a}}) {
    const auto it = h.owner.find({u, v});
    if (it != h.owner.end() && it->second == t) h.owner.erase(it);
  }
}

// Build a triangulated hull; insertion order: `first` indices, then the rest.
TriHull triangulated_hull(const std::vector<Vec3>& pts, const std::vector<int>& first) {
  const double scale = tri_scale(pts);
  // Visibility uses the raw orientation determinant nr.(p - a) = 2 area dist,
  // not the normalized plane distance: on sliver triangles the unit normal is
  // pure noise while the determinant is honestly tiny, so marginal points read
  // "not visible" and the enclosed-volume error of each skipped cut stays
  // below eps_vis / 6.
  const double eps_vis = 1e-12 * scale * scale * scale;
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw GeometryError("convex hull needs at least 4 points");

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> used(n, 0);
  for (int i : first)
    if (!used[i]) { order.push_back(i); used[i] = 1; }
  const int n_first = static_cast<int>(order.size());
  for (int i = 0; i < n; ++i)
    if (!used[i]) order.push_back(i);

  // initial simplex from extreme points of the ordered list
  int i0 = order[0];
  int i1 = -1;
  double best = -1;
  for (int i : order) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) { best = d; i1 = i; }
  }
  if (best <= tol::vertex_merge * scale) throw GeometryError("degenerate input: all points coincide");
  int i2 = -1;
  best = -1;
  const Vec3 e01 = pts[i1] - pts[i0];
  for (int i : order) {
    const double d = e01.cross(pts[i] - pts[i0]).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (best <= tol::plane * scale * e01.norm()) throw GeometryError("degenerate input: points are collinear");
  int i3 = -1;
  best = -1;
  const Vec3 nrm = e01.cross(pts[i2] - pts[i0]);
  for (int i : order) {
    const double d = std::abs(nrm.dot(pts[i] - pts[i0]));
    if (d > best) { best = d; i3 = i; }
  }
  if (best <= tol::plane * scale * nrm.norm()) throw GeometryError("degenerate input: points are coplanar");

  TriHull h;
  h.pts = pts;
  h.inside = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
  [[maybe_unused]] int dbg_absorb_events = 0, dbg_absorb_tris = 0, dbg_lev2 = 0;
  make_tri(h, i0, i1, i2, true);
  make_tri(h, i0, i1, i3, true);
  make_tri(h, i0, i2, i3, true);
  make_tri(h, i1, i2, i3, true);

  // horizon: directed edges of visible faces whose twin is not visible
  const auto horizon_of = [&](const std::vector<int>& vs) {
    std::set<std::pair<int, int>> ve;
    for (int t : vs) {
      const Tri& tr = h.tris[t];
      ve.insert({tr.a, tr.b});
      ve.insert({tr.b, tr.c});
      ve.insert({tr.c, tr.a});
    }
    std::vector<std::pair<int, int>> hz;
    for (const auto& e : ve)
      if (!ve.count({e.second, e.first})) hz.push_back(e);
    return hz;
  };
  const auto single_cycle = [](const std::vector<std::pair<int, int>>& hz) {
    if (hz.empty()) return false;
    std::map<int, int> next;
    for (const auto& e : hz)
      if (!next.emplace(e).second) return false;
    size_t steps = 0;
    int cur = hz[0].first;
    do {
      const auto it = next.find(cur);
      if (it == next.end()) return false;
      cur = it->second;
      ++steps;
    } while (cur != hz[0].first && steps <= hz.size());
    return cur == hz[0].first && steps == hz.size();
  };

  // Outside sets, qhull style: every pending point is attached to one face it
  // lies outside of, and each round inserts the globally farthest point.
  // Farthest-first keeps the inserted point well clear of the current surface,
  // so its visible region is fat and unambiguous; fixed-order insertion on
  // dense structured clouds (boundary sample lattices) creeps along the
  // surface instead, builds needle fans whose visibility reads as noise, and
  // quietly loses convexity. A point whose determinant against every
  // replacement face falls below eps_vis sits within tolerance of the hull
  // and is dropped; the support clamp in assemble() re-covers it.
  struct OutSet {
    std::vector<int> pts;
    int best = -1;
    double bestd = 0;
  };
  std::vector<OutSet> out(h.tris.size());
  std::vector<char> done(n, 0);
  done[i0] = done[i1] = done[i2] = done[i3] = 1;
  const auto raw = [&](int t, const Vec3& q) { return h.tris[t].nr.dot(q) - h.tris[t].offr; };
  const auto attach = [&](int idx, int lo) {
    int tb = -1;
    double db = eps_vis;
    for (int t = lo; t < static_cast<int>(h.tris.size()); ++t) {
      if (!h.tris[t].alive) continue;
      const double d = raw(t, h.pts[idx]);
      if (d > db) { db = d; tb = t; }
    }
    if (tb < 0) { done[idx] = 1; return; }
    out[tb].pts.push_back(idx);
    if (db > out[tb].bestd) { out[tb].bestd = db; out[tb].best = idx; }
  };
  for (int i = 0; i < n; ++i)
    if (!done[i]) attach(i, 0);

  // Cut the faces visible from pts[idx] and cone the horizon onto it. Returns
  // false when no clean cut exists at either tolerance level; the caller
  // parks the point for the next rebuild attempt.
  const auto insert_point = [&](int idx, int tseed) {
    const Vec3& p = pts[idx];
    for (const double lev : {eps_vis, 1e3 * eps_vis}) {
      if (raw(tseed, p) <= lev) return false;
      // Grow the visible region edge-connected from the seed. Faces inside
      // the +-lev band join it as well: silhouette slivers read ~0 under any
      // threshold and would otherwise pinch the region apart, leaving faces
      // the new cone then cuts through.
      std::vector<int> vis, stack{tseed};
      std::vector<char> seen(h.tris.size(), 0);
      seen[tseed] = 1;
      while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        vis.push_back(t);
        const Tri& tr = h.tris[t];
        for (auto [u, v] : {std::pair{tr.a, tr.b}, {tr.b, tr.c}, {tr.c, tr.a}}) {
          const auto it = h.owner.find({v, u});
          if (it == h.owner.end() || seen[it->second]) continue;
          if (raw(it->second, p) > -lev) {
            seen[it->second] = 1;
            stack.push_back(it->second);
          }
        }
      }
      std::vector<std::pair<int, int>> horizon = horizon_of(vis);
      if (!single_cycle(horizon)) {
        // Absorb non-visible islands enclosed by the visible region (they
        // miss the threshold by noise); a multi-cycle horizon would break the
        // manifold invariant when the cone is attached. The genuine outside
        // is the component of the most strongly hidden face -- seeding it
        // from an arbitrary face risks absorbing the real back side instead.
        std::vector<char> outs(h.tris.size(), 0);
        int t0 = -1;
        double d0 = std::numeric_limits<double>::infinity();
        for (int t = 0; t < static_cast<int>(h.tris.size()); ++t) {
          if (!h.tris[t].alive || seen[t]) continue;
          const double d = raw(t, p);
          if (d < d0) { d0 = d; t0 = t; }
        }
        if (t0 < 0) continue; // p sees every face at this level
        stack.assign(1, t0);
        outs[t0] = 1;
        while (!stack.empty()) {
          const int t = stack.back();
          stack.pop_back();
          const Tri& tr = h.tris[t];
          for (auto [u, v] : {std::pair{tr.a, tr.b}, {tr.b, tr.c}, {tr.c, tr.a}}) {
            const auto it = h.owner.find({v, u});
            if (it == h.owner.end()) continue;
            const int nb = it->second;
            if (!seen[nb] && !outs[nb]) {
              outs[nb] = 1;
              stack.push_back(nb);
            }
          }
        }
        // a true island misses the threshold by noise and spans a few faces;
        // wanting to absorb a sizable share of the surface means the visible
        // region itself is distrusted, so give the insertion up instead
        int alive_cnt = 0, absorb_cnt = 0;
        for (const auto& tr : h.tris) alive_cnt += tr.alive ? 1 : 0;
        for (int t = 0; t < static_cast<int>(h.tris.size()); ++t)
          if (h.tris[t].alive && !seen[t] && !outs[t]) ++absorb_cnt;
        if (absorb_cnt > std::max(16, alive_cnt / 8)) continue;
        ++dbg_absorb_events;
        for (int t = 0; t < static_cast<int>(h.tris.size()); ++t)
          if (h.tris[t].alive && !seen[t] && !outs[t]) {
            seen[t] = 1;
            vis.push_back(t);
            ++dbg_absorb_tris;
          }
        horizon = horizon_of(vis);
        if (!single_cycle(horizon)) continue; // tangled at this level too
      }
      const bool degenerate_cone =
          std::any_of(horizon.begin(), horizon.end(), [&](const auto& e) {
            return (h.pts[e.second] - h.pts[e.first]).cross(p - h.pts[e.first]).norm() <= 0;
          });
      if (degenerate_cone) continue; // p exactly on a horizon edge line
      std::vector<int> orphans;
      for (int t : vis) {
        for (int q : out[t].pts)
          if (!done[q] && q != idx) orphans.push_back(q);
        out[t] = OutSet{};
      }
      for (int t : vis) kill_tri(h, t);
      const int lo = static_cast<int>(h.tris.size());
      for (const auto& e : horizon) make_tri(h, e.first, e.second, idx, false);
      out.resize(h.tris.size());
      done[idx] = 1;
      // conflict-set rule: a displaced point is outside the new hull only if
      // it is outside one of the replacement faces
      for (int q : orphans) attach(q, lo);
      if (lev > eps_vis) ++dbg_lev2;
      return true;
    }
    return false;
  };

  // corner retries from the caller go first, in the order given
  for (int k = 0; k < n_first; ++k) {
    const int idx = order[k];
    if (done[idx]) continue;
    int tb = -1;
    double db = eps_vis;
    for (int t = 0; t < static_cast<int>(h.tris.size()); ++t) {
      if (!h.tris[t].alive) continue;
      const double d = raw(t, pts[idx]);
      if (d > db) { db = d; tb = t; }
    }
    if (tb < 0) { done[idx] = 1; continue; }
    if (!insert_point(idx, tb)) h.rejected.push_back(idx);
    done[idx] = 1;
  }

  // farthest-first rounds over the remaining outside points
  while (true) {
    int tb = -1;
    double db = eps_vis;
    for (int t = 0; t < static_cast<int>(h.tris.size()); ++t) {
      if (!h.tris[t].alive || out[t].best < 0) continue;
      if (out[t].bestd > db) { db = out[t].bestd; tb = t; }
    }
    if (tb < 0) break;
    const int idx = out[tb].best;
    if (done[idx]) {
      // stale winner (already placed or parked): refresh this face's list
      OutSet& os = out[tb];
      os.best = -1;
      os.bestd = 0;
      std::vector<int> keep;
      for (int q : os.pts) {
        if (done[q]) continue;
        keep.push_back(q);
        const double d = raw(tb, pts[q]);
        if (d > os.bestd) { os.bestd = d; os.best = q; }
      }
      os.pts.swap(keep);
      continue;
    }
    if (!insert_point(idx, tb)) {
      h.rejected.push_back(idx);
      done[idx] = 1;
    }
  }
#ifdef HULL_DEBUG_STATS
  {
    double v6 = 0;
    for (const auto& t : h.tris)
      if (t.alive) v6 += h.pts[t.a].cross(h.pts[t.b]).dot(h.pts[t.c]);
    std::fprintf(stderr, "[hull] tri-vol=%.6f alive=%zu rejected=%zu absorb_events=%d absorb_tris=%d lev2=%d\n",
                 v6 / 6,
                 static_cast<size_t>(std::count_if(h.tris.begin(), h.tris.end(), [](const Tri& t) { return t.alive; })),
                 h.rejected.size(), dbg_absorb_events, dbg_absorb_tris, dbg_lev2);
  }
#endif
  // manifold audit: every directed edge owned exactly once, twin present
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : h.tris)
    if (t.alive) {
      ++uses[{t.a, t.b}];
      ++uses[{t.b, t.c}];
      ++uses[{t.c, t.a}];
    }
  for (const auto& [e, c] : uses)
    if (c != 1 || !uses.count({e.second, e.first}))
      throw GeometryError("hull triangulation lost the manifold invariant");
  return h;
}

// ---------------------------------------------------------------------------
// Coplanar merge: group adjacent triangles lying within tol::plane of a common
// plane, then rebuild each group's boundary ring and refit its plane.
// ---------------------------------------------------------------------------

struct MergedFacet {
  Vec3 normal;
  double offset;
  std::vector<int> ring; // indices into TriHull::pts
};

std::vector<MergedFacet> merge_coplanar(const TriHull& h) {
  const double scale = tri_scale(h.pts);
  const double eps = tol::plane * std::max(1.0, scale);

  std::vector<int> live;
  for (int t = 0; t < static_cast<int>(h.tris.size()); ++t)
    if (h.tris[t].alive) live.push_back(t);

  // adjacency via the maintained directed-edge ownership
  auto neighbors = [&](int t) {
    const Tri& tr = h.tris[t];
    std::vector<int> out;
    for (auto [u, v] : {std::pair{tr.a, tr.b}, {tr.b, tr.c}, {tr.c, tr.a}}) {
      auto it = h.owner.find({v, u});
      if (it != h.owner.end()) out.push_back(it->second);
    }
    return out;
  };

  std::vector<int> group_of(h.tris.size(), -1);
  std::vector<std::vector<int>> groups;
  for (int seed : live) {
    if (group_of[seed] >= 0) continue;
    const int gid = static_cast<int>(groups.size());
    groups.push_back({});
    // group plane accumulators (area-weighted normal, mean offset refit later)
    Vec3 gn = h.tris[seed].n;
    std::vector<int> stack{seed};
    group_of[seed] = gid;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      groups[gid].push_back(t);
      for (int nb : neighbors(t)) {
        if (group_of[nb] >= 0) continue;
        const Tri& tr = h.tris[nb];
        const Vec3 gnu = gn.normalized();
        const double goff = gnu.dot(h.pts[h.tris[seed].a]);
        const bool coplanar = std::abs(gnu.dot(h.pts[tr.a]) - goff) <= eps &&
                              std::abs(gnu.dot(h.pts[tr.b]) - goff) <= eps &&
                              std::abs(gnu.dot(h.pts[tr.c]) - goff) <= eps;
        if (coplanar) {
          group_of[nb] = gid;
          stack.push_back(nb);
          gn += tr.n * (h.pts[tr.b] - h.pts[tr.a]).cross(h.pts[tr.c] - h.pts[tr.a]).norm();
        }
      }
    }
  }

  std::vector<MergedFacet> out;
  for (const auto& g : groups) {
    // Boundary of the group: directed edges used exactly once. Accept the
    // merge only when they form a single simple cycle; a pinched or
    // multiply-connected patch (a nearly flat dome whose rim is coplanar
    // within tolerance but whose crown is not) falls back to the unmerged
    // triangles, which is always a valid facet set. Rings keep collinear
    // boundary vertices: dropping them here and not in the neighbouring
    // facet's ring would desynchronize the shared edge chains.
    std::set<std::pair<int, int>> edges;
    for (int t : g) {
      const Tri& tr = h.tris[t];
      for (auto [u, v] : {std::pair{tr.a, tr.b}, {tr.b, tr.c}, {tr.c, tr.a}}) {
        if (edges.count({v, u})) edges.erase({v, u});
        else edges.insert({u, v});
      }
    }
    const auto keep_triangles = [&] {
      for (int t : g)
        out.push_back({h.tris[t].n, h.tris[t].off, {h.tris[t].a, h.tris[t].b, h.tris[t].c}});
    };
    bool simple = !edges.empty();
    if (simple) {
      std::set<int> tails;
      for (const auto& e : edges)
        if (!tails.insert(e.first).second) { simple = false; break; }
    }
    std::vector<int> ring;
    if (simple) {
      std::map<int, int> next(edges.begin(), edges.end());
      const int start = next.begin()->first;
      int cur = start;
      do {
        ring.push_back(cur);
        cur = next.at(cur);
      } while (cur != start && ring.size() <= next.size());
      simple = cur == start && ring.size() == next.size();
    }
    if (!simple) {
      keep_triangles();
      continue;
    }

    // refit plane: Newell normal over the merged ring, offset = mean
    Vec3 nn = Vec3::Zero();
    for (size_t i = 0; i < ring.size(); ++i) {
      const Vec3& p = h.pts[ring[i]];
      const Vec3& q = h.pts[ring[(i + 1) % ring.size()]];
      nn += p.cross(q);
    }
    const double len = nn.norm();
    if (len <= tol::plane * scale * scale) { // sliver chain: refit is noise
      keep_triangles();
      continue;
    }
    // Newell normal of a CCW-from-outside ring already points outward
    Vec3 normal = nn / len;
    double off = 0;
    for (int i : ring) off += normal.dot(h.pts[i]);
    off /= static_cast<double>(ring.size());
    if (normal.dot(h.inside) > off) { // safety: orient against interior witness
      normal = -normal;
      off = -off;
      std::reverse(ring.begin(), ring.end());
    }
    out.push_back({normal, off, std::move(ring)});
  }
  return out;
}

// Squared distance from p to triangle (a, b, c); closest-point cases after
// Ericson, Real-Time Collision Detection 5.1.5.
double point_tri_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return ap.squaredNorm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return bp.squaredNorm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (ap - (d1 / (d1 - d3)) * ab).squaredNorm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return cp.squaredNorm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (ap - (d2 / (d2 - d6)) * ac).squaredNorm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (bp - w * (c - b)).squaredNorm();
  }
  const double denom = va + vb + vc;
  return (ap - (vb / denom) * ab - (vc / denom) * ac).squaredNorm();
}

// Points that belong on the hull but were skipped as "coplanar" during
// insertion (a cube corner lying on three facet planes never looks visible).
// The test is purely geometric so needle facets cannot bear false witness:
// flag a point only if it is far from the triangulated surface and the
// surface's winding number says it is outside. Points hovering within
// tolerance of the surface, or tucked under it by a fold, are fine where
// they are.
std::vector<int> missed_corners(const std::vector<Vec3>& pts, const TriHull& h,
                                const std::vector<MergedFacet>& facets,
                                const std::vector<char>& is_vertex) {
  const double scale = tri_scale(pts);
  const double eps = tol::plane * std::max(1.0, scale);
  // cheap interior prefilter against support-clamped facet planes
  std::vector<double> clamped(facets.size(), -std::numeric_limits<double>::infinity());
  for (size_t fi = 0; fi < facets.size(); ++fi)
    for (const auto& q : pts)
      clamped[fi] = std::max(clamped[fi], facets[fi].normal.dot(q));
  std::vector<int> missed;
#ifdef HULL_DEBUG_STATS
  std::vector<double> dbg_d2;
#endif
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if (is_vertex[i]) continue;
    const Vec3& q = pts[i];
    double dmax = -std::numeric_limits<double>::infinity();
    for (size_t fi = 0; fi < facets.size(); ++fi)
      dmax = std::max(dmax, facets[fi].normal.dot(q) - clamped[fi]);
    if (dmax < -eps) continue; // interior
    double d2 = std::numeric_limits<double>::infinity();
    for (const auto& t : h.tris)
      if (t.alive) d2 = std::min(d2, point_tri_dist2(q, h.pts[t.a], h.pts[t.b], h.pts[t.c]));
    // A lost corner carries a pyramid of macroscopic size; tolerance bumps
    // (near-duplicate clusters dropped during insertion sit up to ~1e-5 scale
    // off the surface) must not trip the rebuild loop.
    const double dist_tol = 1e-4 * std::max(1.0, scale);
    if (d2 <= dist_tol * dist_tol) continue; // on the surface within tolerance
#ifdef HULL_DEBUG_STATS
    dbg_d2.push_back(d2);
#endif
    // generalized winding number (van Oosterom-Strackee solid angles)
    double w = 0;
    for (const auto& t : h.tris) {
      if (!t.alive) continue;
      const Vec3 a = h.pts[t.a] - q, b = h.pts[t.b] - q, c = h.pts[t.c] - q;
      const double la = a.norm(), lb = b.norm(), lc = c.norm();
      w += 2 * std::atan2(a.cross(b).dot(c),
                          la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb);
    }
    if (w > 2 * M_PI) continue; // inside the closed surface
    missed.push_back(i);
  }
#ifdef HULL_DEBUG_STATS
  if (!dbg_d2.empty()) {
    std::sort(dbg_d2.begin(), dbg_d2.end());
    std::fprintf(stderr, "[missed] beyond-tol=%zu flagged=%zu dmed=%.3g dmax=%.3g\n",
                 dbg_d2.size(), missed.size(), std::sqrt(dbg_d2[dbg_d2.size() / 2]),
                 std::sqrt(dbg_d2.back()));
  }
#endif
  return missed;
}

VPolytope assemble(const std::vector<Vec3>& pts, const std::vector<MergedFacet>& merged) {
  VPolytope out;
  std::map<int, int> remap;
  for (const auto& f : merged)
    for (int i : f.ring)
      if (!remap.count(i)) {
        remap[i] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(pts[i]);
      }
  for (const auto& f : merged) {
    Facet g;
    g.normal = f.normal;
    // Publish the supporting offset in the facet's direction rather than the
    // fitted one: a sliver triangle's normal is noise-dominated, and its
    // fitted plane can cut well into the hull. With the support offset every
    // facet halfspace contains all points by construction; a shifted sliver
    // plane is merely non-tight, and its dual point falls strictly inside
    // the dual hull, so polar constructions are unaffected.
    g.offset = -std::numeric_limits<double>::infinity();
    for (const auto& q : pts) g.offset = std::max(g.offset, f.normal.dot(q));
    for (int i : f.ring) g.ring.push_back(remap[i]);
    out.facets.push_back(std::move(g));
  }
  return out;
}

void validate_hull(const VPolytope& p, const std::vector<Vec3>& pts) {
  const double scale = tri_scale(pts);
  const double eps = tol::plane * std::max(1.0, scale);
  for (const auto& f : p.facets)
    for (const auto& q : pts)
      if (f.normal.dot(q) > f.offset + 10 * eps)
        throw GeometryError("hull postcondition failed: point outside a facet plane");
  // Euler check V - E + F = 2
  size_t edges2 = 0;
  for (const auto& f : p.facets) edges2 += f.ring.size();
  if (edges2 % 2 != 0 ||
      static_cast<long>(p.vertices.size()) - static_cast<long>(edges2 / 2) +
              static_cast<long>(p.facets.size()) != 2)
    throw GeometryError("hull postcondition failed: Euler characteristic");
}

} // namespace

VPolytope convex_hull(const std::vector<Vec3>& points) {
  // dedupe
  std::vector<Vec3> pts;
  const double scale = tri_scale(points);
  for (const auto& p : points) {
    bool dup = std::any_of(pts.begin(), pts.end(), [&](const Vec3& q) {
      return (p - q).norm() <= tol::vertex_merge * std::max(1.0, scale);
    });
    if (!dup) pts.push_back(p);
  }
  if (pts.size() < 4) throw GeometryError("convex hull needs at least 4 distinct points");

  std::vector<int> priority;
  for (int attempt = 0;; ++attempt) {
    TriHull th = triangulated_hull(pts, priority);
    std::vector<MergedFacet> merged = merge_coplanar(th);
    std::vector<int> retry = th.rejected;
    if (attempt < 6) {
      std::vector<char> is_vertex(pts.size(), 0);
      for (const auto& f : merged)
        for (int i : f.ring) is_vertex[i] = 1;
      const std::vector<int> missed = missed_corners(pts, th, merged, is_vertex);
#ifdef HULL_DEBUG_STATS
      {
        double v6 = 0;
        for (const auto& f : merged) {
          for (size_t k = 1; k + 1 < f.ring.size(); ++k)
            v6 += pts[f.ring[0]].cross(pts[f.ring[k]]).dot(pts[f.ring[k + 1]]);
        }
        std::fprintf(stderr, "[hull] attempt=%d merged-vol=%.6f facets=%zu rejected=%zu missed=%zu",
                     attempt, v6 / 6, merged.size(), th.rejected.size(), missed.size());
        for (size_t k = 0; k < missed.size() && k < 6; ++k)
          std::fprintf(stderr, " m%d", missed[k]);
        std::fprintf(stderr, "\n");
      }
#endif
      retry.insert(retry.end(), missed.begin(), missed.end());
      if (!retry.empty()) {
        priority.insert(priority.begin(), retry.begin(), retry.end());
        continue;
      }
    } else if (!th.rejected.empty()) {
      throw GeometryError("convex hull did not stabilize (tangled horizon)");
    }
    // Either every point is placed or the retries did not stabilize (dense
    // near-coplanar clouds shuffle a fresh crop of noise-level "corners"
    // every pass). Accept the hull; the postcondition still rejects any
    // point left genuinely outside.
    VPolytope out = assemble(pts, merged);
    validate_hull(out, pts);
    return out;
  }
}

VPolytope halfspace_intersection(const std::vector<Halfspace>& hs, const Vec3& interior) {
  if (hs.size() < 4) throw GeometryError("halfspace intersection needs at least 4 halfspaces");
  std::vector<Vec3> duals;
  duals.reserve(hs.size());
  double scale = 0;
  for (const auto& h : hs) scale = std::max(scale, h.n.norm());
  for (const auto& h : hs) {
    const double slack = h.c - h.n.dot(interior);
    if (slack < tol::feasibility * std::max(1.0, h.n.norm()))
      throw GeometryError("interior point violates a halfspace (slack below feasibility tolerance)");
    duals.push_back(h.n / slack);
  }
  VPolytope dual_hull = convex_hull(duals);
  // Boundedness of the primal <=> origin strictly inside the dual hull.
  for (const auto& f : dual_hull.facets)
    if (f.offset <= tol::feasibility)
      throw GeometryError("halfspace intersection is unbounded (origin not interior to dual hull)");
  std::vector<Vec3> verts;
  verts.reserve(dual_hull.facets.size());
  for (const auto& f : dual_hull.facets) verts.push_back(f.normal / f.offset + interior);
  return convex_hull(verts);
}

double volume(const VPolytope& p) {
  const Vec3 c = p.vertex_centroid();
  double v6 = 0;
  for (const auto& f : p.facets) {
    const Vec3 a = p.vertices[f.ring[0]] - c;
    for (size_t i = 1; i + 1 < f.ring.size(); ++i) {
      const Vec3 b = p.vertices[f.ring[i]] - c;
      const Vec3 d = p.vertices[f.ring[i + 1]] - c;
      v6 += a.dot(b.cross(d));
    }
  }
  if (v6 <= 0) throw GeometryError("non-positive polytope volume");
  return v6 / 6.0;
}

Vec3 centroid(const VPolytope& p) {
  const Vec3 c = p.vertex_centroid();
  double v6 = 0;
  Vec3 m = Vec3::Zero();
  for (const auto& f : p.facets) {
    const Vec3 a = p.vertices[f.ring[0]] - c;
    for (size_t i = 1; i + 1 < f.ring.size(); ++i) {
      const Vec3 b = p.vertices[f.ring[i]] - c;
      const Vec3 d = p.vertices[f.ring[i + 1]] - c;
      const double w = a.dot(b.cross(d));
      v6 += w;
      m += w * 0.25 * (a + b + d); // tetra centroid relative to c
    }
  }
  if (v6 <= 0) throw GeometryError("non-positive polytope volume");
  return c + m / v6;
}

Polygon2 cross_section_polygon(const VPolytope& p, const PlaneFrame& f) {
  std::vector<Vec2> pts;
  const double scale = std::max(1.0, p.outer_radius());
  const double eps = tol::plane * scale;
  for (const auto& fa : p.facets) {
    const size_t m = fa.ring.size();
    for (size_t i = 0; i < m; ++i) {
      const Vec3 a = p.vertices[fa.ring[i]];
      const Vec3 b = p.vertices[fa.ring[(i + 1) % m]];
      const double da = f.n.dot(a), db = f.n.dot(b);
      if (std::abs(da) <= eps) pts.push_back(f.to2(a));
      if ((da < -eps && db > eps) || (da > eps && db < -eps)) {
        const double t = da / (da - db);
        pts.push_back(f.to2(a + t * (b - a)));
      }
    }
  }
  if (pts.size() < 3) return Polygon2{};
  return hull2(pts);
}

Polygon2 projection_polygon(const VPolytope& p, const PlaneFrame& f) {
  std::vector<Vec2> pts;
  pts.reserve(p.vertices.size());
  for (const auto& v : p.vertices) pts.push_back(f.to2(v));
  return hull2(pts);
}

std::vector<Halfspace> facet_halfspaces(const VPolytope& p) {
  std::vector<Halfspace> hs;
  hs.reserve(p.facets.size());
  for (const auto& f : p.facets) hs.push_back({f.normal, f.offset});
  return hs;
}

} // namespace mahler
