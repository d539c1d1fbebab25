#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <vector>

#include "fsiam/error.hpp"

// Working frame convention: rectified camera coordinates. x right, y down
// (the vertical/gravity axis), z forward. Boxes rotate about y only.

namespace fsiam {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat34 = Eigen::Matrix<Scalar, 3, 4>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Mat34d = Mat34<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * std::numbers::pi_v<Scalar>;
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

/// Rotation about the vertical (y) axis, KITTI rotation_y convention.
template <typename Scalar>
Mat3<Scalar> rotation_y(Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  Mat3<Scalar> r;
  r << c, 0, s,
       0, 1, 0,
      -s, 0, c;
  return r;
}

template <typename Scalar>
struct PointCloud {
  using Points = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Points points = Points(3, 0);
  Values intensity;  // empty, or one value per point

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
  bool has_intensity() const { return intensity.size() == points.cols() && !empty(); }
};

using PointCloudd = PointCloud<double>;

template <typename Scalar>
struct Box2 {
  Scalar u_min = 0;
  Scalar v_min = 0;
  Scalar u_max = 0;
  Scalar v_max = 0;

  Scalar width() const { return u_max - u_min; }
  Scalar height() const { return v_max - v_min; }
  bool valid() const {
    return std::isfinite(u_min) && std::isfinite(v_min) && std::isfinite(u_max) &&
           std::isfinite(v_max) && u_min < u_max && v_min < v_max;
  }
  bool operator==(const Box2&) const = default;
};

using Box2d = Box2<double>;

/// Oriented box. size = (length, width, height); length runs along the
/// local x axis, height along y, width along z. Yaw rotates about y.
template <typename Scalar>
class Box3 {
 public:
  Box3() : center_(Vec3<Scalar>::Zero()), size_(Vec3<Scalar>::Ones()), yaw_(0) {}

  Box3(const Vec3<Scalar>& center, const Vec3<Scalar>& size, Scalar yaw)
      : center_(center), size_(size), yaw_(normalize_angle(yaw)) {
    if (!center_.allFinite() || !size_.allFinite() || !std::isfinite(yaw))
      throw Error(ErrorCode::kInvalidArgument, "box parameters must be finite");
    if ((size_.array() <= 0).any())
      throw Error(ErrorCode::kInvalidArgument, "box sizes must be positive");
  }

  const Vec3<Scalar>& center() const { return center_; }
  const Vec3<Scalar>& size() const { return size_; }
  Scalar length() const { return size_.x(); }
  Scalar width() const { return size_.y(); }
  Scalar height() const { return size_.z(); }
  Scalar yaw() const { return yaw_; }
  Scalar volume() const { return size_.prod(); }

  /// Half extents along the local (x, y, z) axes.
  Vec3<Scalar> half_extents() const {
    return Vec3<Scalar>(size_.x(), size_.z(), size_.y()) / Scalar(2);
  }
  Mat3<Scalar> rotation() const { return rotation_y(yaw_); }
  Scalar half_diagonal() const { return size_.norm() / 2; }

  Box3 with_center(const Vec3<Scalar>& c) const { return Box3(c, size_, yaw_); }
  Box3 with_yaw(Scalar yaw) const { return Box3(center_, size_, yaw); }
  Box3 scaled(Scalar factor) const { return Box3(center_, size_ * factor, yaw_); }

  bool operator==(const Box3& o) const {
    return center_ == o.center_ && size_ == o.size_ && yaw_ == o.yaw_;
  }

 private:
  Vec3<Scalar> center_;
  Vec3<Scalar> size_;
  Scalar yaw_;
};

using Box3d = Box3<double>;

template <typename Scalar>
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3<Scalar>::Identity()), translation_(Vec3<Scalar>::Zero()) {}

  RigidTransform(const Mat3<Scalar>& rotation, const Vec3<Scalar>& translation)
      : rotation_(rotation), translation_(translation) {
    if (std::abs(rotation_.determinant() - Scalar(1)) > Scalar(1e-9) ||
        !(rotation_.transpose() * rotation_).isApprox(Mat3<Scalar>::Identity(), Scalar(1e-9)))
      throw Error(ErrorCode::kInvalidArgument, "rotation part is not orthonormal");
  }

  const Mat3<Scalar>& rotation() const { return rotation_; }
  const Vec3<Scalar>& translation() const { return translation_; }

  Vec3<Scalar> operator()(const Vec3<Scalar>& p) const { return rotation_ * p + translation_; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation_ = rotation_.transpose();
    inv.translation_ = -(inv.rotation_ * translation_);
    return inv;
  }

  /// (a * b)(p) == a(b(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation_ = a.rotation_ * b.rotation_;
    out.translation_ = a.rotation_ * b.translation_ + a.translation_;
    return out;
  }

 private:
  Mat3<Scalar> rotation_;
  Vec3<Scalar> translation_;
};

using RigidTransformd = RigidTransform<double>;

/// Pure rotation about the vertical axis that brings `central_ray` into the
/// x = 0 plane with positive z, giving a left-right symmetric frustum.
template <typename Scalar>
RigidTransform<Scalar> center_view_rotation(const Vec3<Scalar>& central_ray) {
  if (!(central_ray.z() > 0))
    throw Error(ErrorCode::kInvalidArgument, "central ray must point forward");
  const Scalar angle = std::atan2(-central_ray.x(), central_ray.z());
  return RigidTransform<Scalar>(rotation_y(angle), Vec3<Scalar>::Zero());
}

}  // namespace fsiam
