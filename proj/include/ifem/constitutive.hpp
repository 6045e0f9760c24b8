#ifndef IFEM_CONSTITUTIVE_HPP
#define IFEM_CONSTITUTIVE_HPP

#include "ifem/geometry.hpp"

namespace ifem {

// Deformation gradient F = I + grad_s(w) and its determinant.
struct DeformationGradient {
  Mat2 F;
  double J;

  static DeformationGradient identity() { return {Mat2::Identity(), 1.0}; }
  static DeformationGradient from_matrix(const Mat2& F) { return {F, F.determinant()}; }
  static DeformationGradient from_displacement_gradient(const Mat2& H) {
    return from_matrix(Mat2::Identity() + H);
  }
};

struct SolidModel {
  enum class Kind { INH0, INH1, CircumferentialFiber };

  Kind kind = Kind::INH0;
  double shear_modulus = 1.0;       // Pa
  Vec2 fiber_center = Vec2(0, 0);   // CircumferentialFiber only
};

// Elastic part of the first Piola-Kirchhoff stress at reference point s.
// The pressure term -p F^{-T} is assembled separately with the rest of the
// incompressibility coupling; it never appears here.
//   INH0:  mu (F - F^{-T})
//   INH1:  mu F
//   fiber: mu F (u_theta x u_theta), u_theta the unit circumferential
//          direction of s about the fiber center
Mat2 elastic_pk1(const SolidModel& model, const DeformationGradient& fg, const Vec2& s);

// Directional derivative dP[H] of elastic_pk1 with respect to F.
Mat2 elastic_tangent(const SolidModel& model, const DeformationGradient& fg, const Vec2& s,
                     const Mat2& H);

}  // namespace ifem

#endif
