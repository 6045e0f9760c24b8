#ifndef IFEM_GEOMETRY_HPP
#define IFEM_GEOMETRY_HPP

#include <Eigen/Dense>
#include <algorithm>

namespace ifem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct BoundingBox {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};

  void extend(const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void pad(double eps) {
    lo.array() -= eps;
    hi.array() += eps;
  }
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  double diameter() const { return (hi - lo).norm(); }
};

inline Vec2 rotate90(const Vec2& v) { return Vec2(-v.y(), v.x()); }

}  // namespace ifem

#endif
