#include "ifem/constitutive.hpp"

#include <cmath>

#include "ifem/errors.hpp"

namespace ifem {

namespace {

Mat2 inverse_transpose(const Mat2& F, double det) {
  if (det == 0.0) throw SingularDeformationError("deformation gradient is singular");
  Mat2 it;
  it << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return it / det;
}

Mat2 fiber_projector(const SolidModel& model, const Vec2& s) {
  const Vec2 d = s - model.fiber_center;
  const double len = d.norm();
  if (len == 0.0)
    throw InvalidArgumentError("fiber direction undefined at the fiber center");
  const Vec2 u_theta = rotate90(d) / len;
  return u_theta * u_theta.transpose();
}

}  // namespace

Mat2 elastic_pk1(const SolidModel& model, const DeformationGradient& fg, const Vec2& s) {
  const double mu = model.shear_modulus;
  switch (model.kind) {
    case SolidModel::Kind::INH0:
      return mu * (fg.F - inverse_transpose(fg.F, fg.J));
    case SolidModel::Kind::INH1:
      return mu * fg.F;
    case SolidModel::Kind::CircumferentialFiber:
      return mu * fg.F * fiber_projector(model, s);
  }
  return Mat2::Zero();
}

Mat2 elastic_tangent(const SolidModel& model, const DeformationGradient& fg, const Vec2& s,
                     const Mat2& H) {
  const double mu = model.shear_modulus;
  switch (model.kind) {
    case SolidModel::Kind::INH0: {
      const Mat2 Fit = inverse_transpose(fg.F, fg.J);
      return mu * (H + Fit * H.transpose() * Fit);
    }
    case SolidModel::Kind::INH1:
      return mu * H;
    case SolidModel::Kind::CircumferentialFiber:
      return mu * H * fiber_projector(model, s);
  }
  return Mat2::Zero();
}

}  // namespace ifem
