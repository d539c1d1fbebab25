#pragma once

#include "fsiam/geom3d/types.hpp"

namespace fsiam {

/// KITTI-style projection chain: LiDAR -> camera (rigid) -> rectified
/// camera (R_rect) -> pixels (P). The rectified camera frame is the working
/// frame for boxes and frustums.
template <typename Scalar>
struct CameraModel {
  Mat34<Scalar> projection = Mat34<Scalar>::Identity();
  Mat3<Scalar> rectification = Mat3<Scalar>::Identity();
  Mat34<Scalar> lidar_to_camera = Mat34<Scalar>::Identity();
  int image_width = 1242;
  int image_height = 375;

  /// Pinhole camera with identity extrinsics and no rectification.
  static CameraModel pinhole(Scalar fx, Scalar fy, Scalar cx, Scalar cy, int width = 1242,
                             int height = 375) {
    CameraModel cam;
    cam.projection << fx, 0, cx, 0,
                      0, fy, cy, 0,
                      0, 0, 1, 0;
    cam.image_width = width;
    cam.image_height = height;
    return cam;
  }

  Vec3<Scalar> lidar_to_rect(const Vec3<Scalar>& p) const {
    return rectification * (lidar_to_camera.template leftCols<3>() * p + lidar_to_camera.col(3));
  }

  Vec3<Scalar> rect_to_lidar(const Vec3<Scalar>& p) const {
    const Vec3<Scalar> cam = rectification.inverse() * p;
    const Mat3<Scalar> r = lidar_to_camera.template leftCols<3>();
    return r.transpose() * (cam - lidar_to_camera.col(3));
  }

  /// Homogeneous depth of a rectified-frame point under the projection.
  Scalar depth(const Vec3<Scalar>& p_rect) const {
    return projection.row(2).template head<3>().dot(p_rect) + projection(2, 3);
  }

  bool operator==(const CameraModel&) const = default;
};

using CameraModeld = CameraModel<double>;

template <typename Scalar>
struct PixelProjection {
  Scalar u;
  Scalar v;
  Scalar depth;
};

template <typename Scalar>
struct Ray {
  Vec3<Scalar> origin;
  Vec3<Scalar> direction;  // unit length

  Vec3<Scalar> at(Scalar t) const { return origin + t * direction; }
};

/// Projects a point already in the rectified camera frame.
template <typename Scalar>
PixelProjection<Scalar> project_rect(const CameraModel<Scalar>& cam, const Vec3<Scalar>& p) {
  const Vec3<Scalar> h = cam.projection.template leftCols<3>() * p + cam.projection.col(3);
  if (!(h.z() > 0)) throw Error(ErrorCode::kBehindCamera, "point has nonpositive depth");
  return {h.x() / h.z(), h.y() / h.z(), h.z()};
}

/// Projects a LiDAR-frame point through the full chain.
template <typename Scalar>
PixelProjection<Scalar> project_point(const CameraModel<Scalar>& cam, const Vec3<Scalar>& p_lidar) {
  if (!p_lidar.allFinite()) throw Error(ErrorCode::kInvalidArgument, "point must be finite");
  return project_rect(cam, cam.lidar_to_rect(p_lidar));
}

/// Viewing ray through pixel (u, v) in the rectified camera frame.
template <typename Scalar>
Ray<Scalar> pixel_ray(const CameraModel<Scalar>& cam, Scalar u, Scalar v) {
  if (!std::isfinite(u) || !std::isfinite(v))
    throw Error(ErrorCode::kInvalidArgument, "pixel coordinates must be finite");
  const Mat3<Scalar> m = cam.projection.template leftCols<3>();
  Eigen::FullPivLU<Mat3<Scalar>> lu(m);
  if (!lu.isInvertible())
    throw Error(ErrorCode::kSingularProjection, "projection 3x3 block is singular");
  Ray<Scalar> ray;
  ray.origin = -lu.solve(Vec3<Scalar>(cam.projection.col(3)));
  ray.direction = lu.solve(Vec3<Scalar>(u, v, Scalar(1))).normalized();
  // Keep the direction pointing towards increasing projective depth.
  if (m.row(2).dot(ray.direction) < 0) ray.direction = -ray.direction;
  return ray;
}

}  // namespace fsiam
