#pragma once

#include <array>
#include <vector>

#include "fsiam/geom3d/polytope.hpp"
#include "fsiam/geom3d/types.hpp"

namespace fsiam {

/// Corner order follows the KITTI devkit: bottom face (+y, y points down)
/// first, then the top face, each as (+l,+w), (+l,-w), (-l,-w), (-l,+w) in
/// local (x, z).
template <typename Scalar>
std::array<Vec3<Scalar>, 8> box3d_corners(const Box3<Scalar>& b) {
  static constexpr int kSx[8] = {1, 1, -1, -1, 1, 1, -1, -1};
  static constexpr int kSy[8] = {1, 1, 1, 1, -1, -1, -1, -1};
  static constexpr int kSz[8] = {1, -1, -1, 1, 1, -1, -1, 1};
  const Vec3<Scalar> e = b.half_extents();
  const Mat3<Scalar> r = b.rotation();
  std::array<Vec3<Scalar>, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3<Scalar> local(kSx[i] * e.x(), kSy[i] * e.y(), kSz[i] * e.z());
    out[i] = r * local + b.center();
  }
  return out;
}

/// The six face half-spaces of `b`, outward normals.
template <typename Scalar>
std::vector<HalfSpace<Scalar>> box3d_half_spaces(const Box3<Scalar>& b) {
  const Mat3<Scalar> r = b.rotation();
  const Vec3<Scalar> e = b.half_extents();
  std::vector<HalfSpace<Scalar>> out;
  out.reserve(6);
  for (int a = 0; a < 3; ++a) {
    const Vec3<Scalar> n = r.col(a);
    const Scalar c = n.dot(b.center());
    out.push_back({n, c + e[a]});
    out.push_back({-n, -c + e[a]});
  }
  return out;
}

template <typename Scalar>
ConvexPolytope<Scalar> box3d_polytope(const Box3<Scalar>& b) {
  return ConvexPolytope<Scalar>::from_half_spaces(box3d_half_spaces(b));
}

/// Point expressed in the box's local frame (box center at origin, axis aligned).
template <typename Scalar>
Vec3<Scalar> box3d_local(const Box3<Scalar>& b, const Vec3<Scalar>& p) {
  return b.rotation().transpose() * (p - b.center());
}

/// Boundary counts as inside.
template <typename Scalar>
bool box3d_contains(const Box3<Scalar>& b, const Vec3<Scalar>& p) {
  const Vec3<Scalar> local = box3d_local(b, p);
  return (local.cwiseAbs().array() <= b.half_extents().array()).all();
}

/// Points of `cloud` inside `b`, in their original order.
template <typename Scalar>
PointCloud<Scalar> crop_points_in_box(const PointCloud<Scalar>& cloud, const Box3<Scalar>& b) {
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(cloud.size()));
  const Mat3<Scalar> rt = b.rotation().transpose();
  const Vec3<Scalar> e = b.half_extents();
  // Cheap radial reject before the exact test.
  const Scalar r2 = e.squaredNorm() * (1 + Scalar(1e-9));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vec3<Scalar> d = cloud.points.col(i) - b.center();
    if (d.squaredNorm() > r2) continue;
    if (((rt * d).cwiseAbs().array() <= e.array()).all()) keep.push_back(i);
  }
  PointCloud<Scalar> out;
  out.points.resize(3, static_cast<Eigen::Index>(keep.size()));
  const bool with_intensity = cloud.has_intensity();
  if (with_intensity) out.intensity.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    out.points.col(idx) = cloud.points.col(keep[k]);
    if (with_intensity) out.intensity[idx] = cloud.intensity[keep[k]];
  }
  return out;
}

/// Translate by -center, then rotate by -yaw: the candidate becomes axis
/// aligned at the origin.
template <typename Scalar>
PointCloud<Scalar> to_candidate_frame(const PointCloud<Scalar>& cloud, const Box3<Scalar>& candidate) {
  PointCloud<Scalar> out = cloud;
  out.points = candidate.rotation().transpose() * (cloud.points.colwise() - candidate.center());
  return out;
}

template <typename Scalar>
PointCloud<Scalar> from_candidate_frame(const PointCloud<Scalar>& cloud, const Box3<Scalar>& candidate) {
  PointCloud<Scalar> out = cloud;
  out.points = (candidate.rotation() * cloud.points).colwise() + candidate.center();
  return out;
}

}  // namespace fsiam
