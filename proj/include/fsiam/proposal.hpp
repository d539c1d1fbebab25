#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "fsiam/geom3d.hpp"

namespace fsiam {

enum class Branch { kFrustumAccepted, kFallback };

const char* to_string(Branch b);

/// Knobs of the frustum-based region proposal.
struct ProposalConfig {
  double iou_threshold = 0.2;  // accept the frustum branch iff validation IoU > this
  int n_candidates = 72;
  int fallback_count = 147;
  /// Depth crop half-width; unset means half the template diagonal + 1 m.
  std::optional<double> depth_margin;
  /// Yaw offsets (radians) applied to both candidate grids.
  std::vector<double> yaw_offsets = default_yaw_offsets();
  /// Fallback grid spans +/- this many template widths along x and z.
  double fallback_extent = 1.0;
  /// Template enlargement before intersecting with the frustum.
  double search_space_scale = 1.0;
  double frustum_near = 0.5;
  double frustum_far = 120.0;

  static std::vector<double> default_yaw_offsets();

  /// Throws kInvalidArgument on the first violated invariant.
  void validate() const;
  double margin_for(const Box3d& tmpl) const;
};

/// Viewing frustum of a 2D box plus the data needed to crop it in depth.
struct Frustum {
  ConvexPolytoped polytope;
  Vec3d apex = Vec3d::Zero();
  /// Horizontal bisector of the left and right faces.
  Vec3d central_ray = Vec3d::UnitZ();
  Vec3d depth_normal = Vec3d::UnitZ();  // depth(p) = depth_normal . p + depth_offset
  double depth_offset = 0;

  double depth(const Vec3d& p) const { return depth_normal.dot(p) + depth_offset; }
};

struct Validation {
  double iou = 0;
  Branch branch = Branch::kFallback;
};

struct ProposalOutcome {
  Branch branch = Branch::kFallback;
  double validation_iou = 0;
  ConvexPolytoped search_space;  // empty on the fallback branch
  std::vector<Box3d> candidates;
  std::chrono::nanoseconds elapsed{0};
  /// Validation accepted but the intersection came out empty; the outcome
  /// was routed to the fallback grid.
  bool inconsistent = false;
};

Frustum frustum_from_box2d(const CameraModeld& cam, const Box2d& box, double near, double far);

/// Clips the frustum to [d - margin, d + margin], d being the template
/// center's projective depth. May return an empty polytope.
ConvexPolytoped crop_frustum_by_depth(const Frustum& frustum, const Box3d& tmpl, double margin);

/// branch is FrustumAccepted iff iou > threshold (strict).
Validation validate(const ConvexPolytoped& cropped, const Box3d& tmpl, double threshold);

/// Cropped frustum intersected with the (optionally enlarged) template box.
/// Throws kEmptyResult when nothing remains.
ConvexPolytoped intersection_search_space(const ConvexPolytoped& cropped, const Box3d& tmpl,
                                          double template_scale = 1.0);

/// Exactly `count` boxes with the template's size, centers inside `space`.
///
/// Centers lie on a square lattice in the horizontal (x, z) plane at the
/// height of the space's centroid, anchored on the centroid itself. The
/// lattice is refined until at least ceil(count / |yaw_offsets|) points fall
/// inside the space; the ones closest to the centroid are kept. Output
/// order is x-major, then z, then yaw offset.
std::vector<Box3d> generate_candidates(const ConvexPolytoped& space, const Box3d& tmpl, int count,
                                       const std::vector<double>& yaw_offsets);

/// Exhaustive grid around `previous`: g x g horizontal offsets spanning
/// +/- extent * width along x and z, times the yaw offsets. With the default
/// 147 and three yaws this is 7 x 7 x 3. Order is x-major, then z, then yaw.
std::vector<Box3d> fallback_candidates(const Box3d& previous, int count,
                                       const std::vector<double>& yaw_offsets,
                                       double extent = 1.0);

RigidTransformd center_view_rotation(const Frustum& frustum);

/// Runs crop -> validate -> candidates for one frame. A missing or unusable
/// 2D box goes straight to the fallback grid with validation IoU 0.
ProposalOutcome propose(const CameraModeld& cam, const std::optional<Box2d>& box2d, const Box3d& tmpl,
                        const ProposalConfig& config);

}  // namespace fsiam
