#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "fsiam/geom3d/box.hpp"
#include "fsiam/geom3d/polytope.hpp"

namespace fsiam {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

namespace detail {

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <typename Scalar>
Scalar polygon_area(const std::vector<Vec2<Scalar>>& poly) {
  Scalar acc = 0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    acc += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return acc / 2;
}

/// Bird's-eye footprint in the (x, z) plane, counter-clockwise.
template <typename Scalar>
std::vector<Vec2<Scalar>> bev_footprint(const Box3<Scalar>& b) {
  const auto corners = box3d_corners(b);
  std::vector<Vec2<Scalar>> poly;
  for (int i = 0; i < 4; ++i) poly.emplace_back(corners[i].x(), corners[i].z());
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

/// Sutherland-Hodgman clip of `subject` by the convex CCW polygon `clip`.
template <typename Scalar>
std::vector<Vec2<Scalar>> clip_convex_polygon(std::vector<Vec2<Scalar>> subject,
                                              const std::vector<Vec2<Scalar>>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Vec2<Scalar>& a = clip[e];
    const Vec2<Scalar> edge = clip[(e + 1) % clip.size()] - a;
    std::vector<Vec2<Scalar>> out;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Vec2<Scalar>& p = subject[i];
      const Vec2<Scalar>& q = subject[(i + 1) % subject.size()];
      const Scalar dp = cross2(edge, Vec2<Scalar>(p - a));
      const Scalar dq = cross2(edge, Vec2<Scalar>(q - a));
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) out.push_back(p + (q - p) * (dp / (dp - dq)));
    }
    subject = std::move(out);
  }
  return subject;
}

template <typename Scalar>
auto box_key(const Box3<Scalar>& b) {
  return std::make_tuple(b.center().x(), b.center().y(), b.center().z(), b.length(), b.width(),
                         b.height(), b.yaw());
}

}  // namespace detail

/// Oriented 3D IoU: (BEV polygon intersection area x vertical overlap) over
/// the union volume. Arguments are put in a canonical order first so the
/// result is bitwise symmetric.
template <typename Scalar>
Scalar box3d_iou(const Box3<Scalar>& first, const Box3<Scalar>& second) {
  const bool swap = detail::box_key(second) < detail::box_key(first);
  const Box3<Scalar>& a = swap ? second : first;
  const Box3<Scalar>& b = swap ? first : second;

  const Scalar ya0 = a.center().y() - a.height() / 2, ya1 = a.center().y() + a.height() / 2;
  const Scalar yb0 = b.center().y() - b.height() / 2, yb1 = b.center().y() + b.height() / 2;
  const Scalar dy = std::min(ya1, yb1) - std::max(ya0, yb0);
  if (dy <= 0) return 0;

  // Disjoint footprints: skip the polygon clip.
  const Scalar reach = Vec2<Scalar>(a.length(), a.width()).norm() / 2 +
                       Vec2<Scalar>(b.length(), b.width()).norm() / 2;
  const Vec2<Scalar> dc(a.center().x() - b.center().x(), a.center().z() - b.center().z());
  if (dc.norm() >= reach) return 0;

  const auto inter = detail::clip_convex_polygon(detail::bev_footprint(a), detail::bev_footprint(b));
  const Scalar area = inter.size() < 3 ? Scalar(0) : std::abs(detail::polygon_area(inter));
  const Scalar vi = area * dy;
  const Scalar vu = a.volume() + b.volume() - vi;
  return std::clamp(vi / vu, Scalar(0), Scalar(1));
}

/// IoU between a convex region and a box: the region is clipped by the box's
/// six face planes.
template <typename Scalar>
Scalar polytope_box_iou(const ConvexPolytope<Scalar>& p, const Box3<Scalar>& b) {
  const Scalar vp = p.volume();
  const Scalar vb = b.volume();
  if (!(vp + vb > 0)) throw Error(ErrorCode::kZeroUnion, "both volumes are zero");
  if (p.empty()) return 0;
  const Scalar vi = clip_polytope(p, box3d_half_spaces(b)).volume();
  return std::clamp(vi / (vp + vb - vi), Scalar(0), Scalar(1));
}

}  // namespace fsiam
