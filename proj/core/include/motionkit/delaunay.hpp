#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "motionkit/types.hpp"

namespace motionkit {

using Tet = std::array<std::size_t, 4>;

struct Tetrahedralization {
  // Indices into the input point list, positively oriented.
  std::vector<Tet> tets;
  // Input points dropped as duplicates (within 1e-12) of an earlier point.
  std::vector<std::size_t> merged;
};

// Relative tolerance of the in-sphere predicate.
constexpr double kInSphereTolerance = 1e-9;

// Incremental Bowyer-Watson. Throws DegenerateInputError for fewer than four
// distinct points or an (almost) coplanar cloud.
Tetrahedralization delaunay3d(const Points& points);

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius_sq = 0.0;
  bool valid = false;
};
Sphere circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// True when p lies strictly inside the sphere, beyond the relative tolerance.
bool strictly_inside(const Sphere& s, const Vec3& p, double rel_tol = kInSphereTolerance);

}  // namespace motionkit
