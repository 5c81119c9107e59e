#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mahler {

template <class S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <class S> using Vec2T = Eigen::Matrix<S, 2, 1>;
template <class S> using Mat3T = Eigen::Matrix<S, 3, 3>;

using Vec3 = Vec3T<double>;
using Vec2 = Vec2T<double>;
using Mat3 = Mat3T<double>;

/// Central tolerance record. Every geometric predicate in the library pulls
/// its threshold from here so the accuracy contract lives in one place.
namespace tol {
inline constexpr double plane = 1e-9;         // coplanarity / facet membership
inline constexpr double vertex_merge = 1e-10; // points closer than this coincide
inline constexpr double feasibility = 1e-9;   // interior-point slack for H-intersections
inline constexpr double orbit_merge = 1e-10;  // orbit point dedup
inline constexpr double group = 1e-12;        // orthogonality / closure of group matrices
inline constexpr double boundary = 1e-7;      // |gauge - 1| for boundary-point preconditions
inline constexpr double quadrature = 1e-7;    // relative target for adaptive sphere quadrature
inline constexpr double report = 1e-8;        // default slack tolerance in reports
}

// Error taxonomy. The CLI maps these onto distinct exit codes.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& m) : std::runtime_error(m) {}
};
struct InvarianceError : std::runtime_error {
  explicit InvarianceError(const std::string& m) : std::runtime_error(m) {}
};
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& m) : std::runtime_error(m) {}
};

/// Deterministic uniform double in [0,1) from a 64-bit generator. We avoid
/// std::uniform_real_distribution because its output is implementation
/// defined; sweep output must be reproducible byte for byte.
template <class Rng> double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng> double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform direction on the unit sphere (rejection-free, via z and angle).
template <class Rng> Vec3 random_direction(Rng& rng) {
  const double z = uniform(rng, -1.0, 1.0);
  const double phi = uniform(rng, 0.0, 2.0 * EIGEN_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

} // namespace mahler
