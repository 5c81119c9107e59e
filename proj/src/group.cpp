#include "mahler/group.hpp"

#include <algorithm>
#include <array>

namespace mahler {

std::string to_string(GroupName n) {
  switch (n) {
  case GroupName::D2: return "D2";
  case GroupName::S4: return "S4";
  case GroupName::D2d: return "D2d";
  case GroupName::T: return "T";
  case GroupName::Td: return "Td";
  case GroupName::Z2c: return "Z2c";
  case GroupName::Custom: return "custom";
  }
  return "?";
}

Mat3 SymmetryGroup::s4_generator() {
  Mat3 g;
  g << 0, -1, 0,
       1, 0, 0,
       0, 0, -1;
  return g;
}

namespace {

bool same_matrix(const Mat3& a, const Mat3& b, double eps) {
  return (a - b).cwiseAbs().maxCoeff() <= eps;
}

// Closure of a generating set. All inputs have entries in {-1,0,1}, so the
// products stay exact and membership tests can use a tiny tolerance.
std::vector<Mat3> closure(std::vector<Mat3> gens) {
  std::vector<Mat3> elems;
  elems.push_back(Mat3::Identity());
  auto known = [&](const Mat3& m) {
    return std::any_of(elems.begin(), elems.end(),
                       [&](const Mat3& e) { return same_matrix(e, m, tol::group); });
  };
  for (const auto& g : gens)
    if (!known(g)) elems.push_back(g);
  bool grew = true;
  while (grew) {
    grew = false;
    const size_t n = elems.size();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        Mat3 m = elems[i] * elems[j];
        if (!known(m)) {
          elems.push_back(m);
          grew = true;
        }
      }
    if (elems.size() > 64) throw GeometryError("group closure does not terminate");
  }
  return elems;
}

void validate(const std::vector<Mat3>& elems) {
  if (elems.empty()) throw GeometryError("empty group");
  bool has_id = false;
  for (const auto& g : elems) {
    if (!same_matrix(g * g.transpose(), Mat3::Identity(), tol::group))
      throw GeometryError("group element is not orthogonal");
    if (same_matrix(g, Mat3::Identity(), tol::group)) has_id = true;
  }
  if (!has_id) throw GeometryError("group does not contain the identity");
  for (const auto& a : elems)
    for (const auto& b : elems) {
      Mat3 m = a * b;
      bool found = std::any_of(elems.begin(), elems.end(),
                               [&](const Mat3& e) { return same_matrix(e, m, tol::group); });
      if (!found) throw GeometryError("group is not closed under multiplication");
    }
}

Mat3 diag(double a, double b, double c) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = a; m(1, 1) = b; m(2, 2) = c;
  return m;
}

} // namespace

SymmetryGroup SymmetryGroup::named(GroupName n) {
  SymmetryGroup g;
  g.name = n;
  switch (n) {
  case GroupName::D2:
    g.elements = {Mat3::Identity(), diag(1, -1, -1), diag(-1, 1, -1), diag(-1, -1, 1)};
    break;
  case GroupName::S4:
    g.elements = closure({s4_generator()});
    break;
  case GroupName::D2d:
    g.elements = closure({s4_generator(), diag(1, -1, 1)});
    break;
  case GroupName::T: {
    Mat3 cyc; // x -> y -> z -> x, the 3-fold rotation about (1,1,1)
    cyc << 0, 0, 1,
           1, 0, 0,
           0, 1, 0;
    g.elements = closure({diag(1, -1, -1), diag(-1, -1, 1), cyc});
    break;
  }
  case GroupName::Td: {
    Mat3 cyc;
    cyc << 0, 0, 1,
           1, 0, 0,
           0, 1, 0;
    Mat3 swap_xy; // odd permutation, preserves the reference tetrahedron
    swap_xy << 0, 1, 0,
               1, 0, 0,
               0, 0, 1;
    g.elements = closure({diag(1, -1, -1), diag(-1, -1, 1), cyc, swap_xy});
    break;
  }
  case GroupName::Z2c:
    g.elements = {Mat3::Identity(), -Mat3::Identity()};
    break;
  case GroupName::Custom:
    throw GeometryError("custom groups need an explicit element list");
  }
  return g;
}

SymmetryGroup SymmetryGroup::named(const std::string& n) {
  if (n == "D2") return named(GroupName::D2);
  if (n == "S4") return named(GroupName::S4);
  if (n == "D2d") return named(GroupName::D2d);
  if (n == "T") return named(GroupName::T);
  if (n == "Td") return named(GroupName::Td);
  if (n == "Z2c") return named(GroupName::Z2c);
  throw ParseError("unknown group name: " + n);
}

SymmetryGroup SymmetryGroup::custom(std::vector<Mat3> elems) {
  validate(elems);
  // identity first, for a canonical element order
  std::stable_sort(elems.begin(), elems.end(), [](const Mat3& a, const Mat3& b) {
    return same_matrix(a, Mat3::Identity(), tol::group) &&
           !same_matrix(b, Mat3::Identity(), tol::group);
  });
  SymmetryGroup g;
  g.name = GroupName::Custom;
  g.elements = std::move(elems);
  return g;
}

std::vector<Vec3> orbit(const SymmetryGroup& g, const Vec3& p) {
  std::vector<Vec3> pts;
  pts.reserve(g.elements.size());
  for (const auto& m : g.elements) {
    Vec3 q = m * p;
    bool dup = std::any_of(pts.begin(), pts.end(), [&](const Vec3& r) {
      return (r - q).norm() <= tol::orbit_merge;
    });
    if (!dup) pts.push_back(q);
  }
  return pts;
}

} // namespace mahler
