#pragma once

#include "mahler/types.hpp"

#include <string>
#include <vector>

namespace mahler {

enum class GroupName { D2, S4, D2d, T, Td, Z2c, Custom };

std::string to_string(GroupName n);

/// A finite subgroup of O(3), stored as an explicit list of matrices with the
/// identity first. The named constructors produce exact {-1,0,1} entries, so
/// orbit computations under them are free of rounding.
struct SymmetryGroup {
  GroupName name = GroupName::Custom;
  std::vector<Mat3> elements;

  int order() const { return static_cast<int>(elements.size()); }

  /// Named groups:
  ///   D2   coordinate half-turns {E, diag(1,-1,-1), diag(-1,1,-1), diag(-1,-1,1)}
  ///   S4   the order-4 rotoreflection generated by a quarter turn about z
  ///        composed with z-reflection
  ///   D2d  S4 extended by the reflection diag(1,-1,1)
  ///   T    rotation group of the tetrahedron conv{(-1,-1,-1),(-1,1,1),(1,-1,1),(1,1,-1)}
  ///   Td   full symmetry group of that tetrahedron
  ///   Z2c  central inversion {E, -E}
  static SymmetryGroup named(GroupName n);
  static SymmetryGroup named(const std::string& n); // CLI spelling, e.g. "D2", "Z2c"

  /// User-supplied group as an explicit matrix list. Validates orthogonality,
  /// closure and presence of the identity to tol::group.
  static SymmetryGroup custom(std::vector<Mat3> elems);

  /// Generator of S4 in the convention used throughout: maps (x,y,z) to (-y,x,-z).
  static Mat3 s4_generator();
};

/// Orbit of a point; duplicates within tol::orbit_merge are merged.
std::vector<Vec3> orbit(const SymmetryGroup& g, const Vec3& p);

} // namespace mahler
