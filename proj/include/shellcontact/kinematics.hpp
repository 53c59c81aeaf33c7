#pragma once

// Discrete meridian kinematics shared by the reference mesh (reference
// curvatures) and the mechanics kernels. All kernels are templates on the
// scalar type so that the same expression yields values and derivatives.

#include <cmath>

#include "shellcontact/jet.hpp"

namespace shellcontact::kinematics {

template <typename T>
struct Curvatures {
  T meridional;
  T hoop;
};

template <typename T>
T segment_length(const T& ra, const T& za, const T& rb, const T& zb) {
  using std::sqrt;
  const T dr = rb - ra;
  const T dz = zb - za;
  return sqrt(dr * dr + dz * dz);
}

// Inclination of a segment measured from the +r axis, positive when the
// meridian descends (z decreasing). Equals the polar angle at the segment
// midpoint on the undeformed sphere.
template <typename T>
T inclination(const T& ra, const T& za, const T& rb, const T& zb) {
  using std::atan2;
  return atan2(za - zb, rb - ra);
}

// Apex node: the meridian continues by mirror symmetry across the axis, so the
// turning angle is twice the inclination of the first segment and the hoop
// curvature equals the meridional one.
template <typename T>
Curvatures<T> apex(const T& r0, const T& z0, const T& r1, const T& z1) {
  const T psi = inclination(r0, z0, r1, z1);
  const T len = segment_length(r0, z0, r1, z1);
  const T k = 2.0 * psi / len;
  return {k, k};
}

// Node b between neighbours a and c.
template <typename T>
Curvatures<T> interior(const T& ra, const T& za, const T& rb, const T& zb,
                       const T& rc, const T& zc) {
  using std::atan2;
  using std::sin;
  const T t1r = rb - ra, t1z = zb - za;
  const T t2r = rc - rb, t2z = zc - zb;
  // Signed turning angle, positive for the undeformed (convex) sphere.
  const T cross = t1z * t2r - t1r * t2z;
  const T dot = t1r * t2r + t1z * t2z;
  const T turn = atan2(cross, dot);
  const T len1 = segment_length(ra, za, rb, zb);
  const T len2 = segment_length(rb, zb, rc, zc);
  const T psi_node = inclination(ra, za, rb, zb) + 0.5 * turn;
  return {turn / (0.5 * (len1 + len2)), sin(psi_node) / rb};
}

}  // namespace shellcontact::kinematics
