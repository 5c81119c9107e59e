#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "mahler/equipartition.hpp"
#include "mahler/estimates.hpp"

namespace mahler {

inline constexpr double kSimplexBound = 64.0 / 9.0;

enum class VPMode { AtOrigin, Santalo };

/// |K| |K^z| at the returned base point z (the approximate Santalo point).
struct SantaloResult {
  Vec3 z = Vec3::Zero();
  double polar_volume_at_z = 0;
  int iterations = 0;
  double displacement = 0; // norm of the polar's centroid at z, ~ gradient
};

/// One audited step of an inequality chain. Identities expect
/// |lhs - rhs| small; inequalities expect lhs >= rhs - tol.
struct ChainTerm {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool identity = false;
  double slack() const { return lhs - rhs; }
};

struct ChainReport {
  bool run = false;
  std::string skip_reason;
  std::vector<ChainTerm> terms;
  double final_bound = 0; // proved lower bound for |K| |K°|
  std::map<std::string, double> details;
};

struct VerifyReport {
  std::string group;
  double volume = 0;
  double polar_volume = 0;
  double product = 0;
  double gap = 0; // product - 64/9
  bool bound_ok = false;
  double tolerance = 0;
  ChainReport chain;
  std::string equality;                // "simplex", "polar-simplex", or "none"
  std::optional<Mat3> simplex_witness; // K = witness * (fixture or its polar)
};

double volume_product(const ConvexBody& k, VPMode mode = VPMode::AtOrigin);

/// Descent on z -> |K^z| using the polar's centroid as search direction,
/// with step halving; certified locally minimal by callers via probe points.
SantaloResult santalo_point(const ConvexBody& k, double tol = 1e-9);

/// Audit of the D2 inequality chain at an equipartition point: tiling,
/// 9 |K0| |Lambda K0| >= (sum cbar) . (sum polar cbar), cross-term
/// cancellation, the three per-arc pairing bounds, and the dual pairing
/// normalization. Skipped (report.run = false) if p.residual > 1e-6.
ChainReport chain_d2(const ConvexBody& k, const D2Partition& p, int n = 4096);

/// Audit of the S4 chain at a balance point: the component identities
/// a = -uc, b = uc, alpha = gamma = 0, gamma° = 0, the (*) assembly, the
/// balance cancellation, and the two weighted pairing bounds summing to 4.
ChainReport chain_s4(const ConvexBody& k, const S4Balance& bal, int n = 4096);

/// Full pipeline: invariance check, volume product at the origin, the chain
/// matching the group (D2 chain for D2/T/Td, S4 chain for S4/D2d), and
/// simplex-image equality diagnosis.
/// Full verification pass: invariance gate, volumes, bound check, equality
/// diagnosis, and (when run_chain is set) the group's inequality chain.
/// Sweeps disable the chain: it needs an equipartition solve per body.
VerifyReport verify(const ConvexBody& k, const SymmetryGroup& g, double tol = tol::report,
                    bool run_chain = true);

/// Exact-combinatorics equality detector: returns M with K = M * fixture
/// (4 vertices) or K = M * fixture-polar (4 facets), where the fixture is the
/// group's reference simplex and M commutes with the group within 1e-8.
std::optional<Mat3> is_simplex_image(const ConvexBody& k, const SymmetryGroup& g);

enum class BodyKind { Polytope, Smooth };

/// Seeded generator of G-invariant test bodies: orbit hull of n_seeds annulus
/// points plus a small octahedron (polytope kind), or the p = 8 smoothing of
/// that hull's polar facet family (smooth kind). Deterministic per seed.
ConvexBody random_invariant_body(const SymmetryGroup& g, int n_seeds, BodyKind kind,
                                 std::uint64_t seed);

} // namespace mahler
