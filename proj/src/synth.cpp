#include <random>

#include "fsiam/dataio.hpp"

namespace fsiam {

void SynthSpec::validate() const {
  if (frames < 2) throw Error(ErrorCode::kInvalidArgument, "synthetic tracklets need at least 2 frames");
  if (!start.allFinite() || !velocity.allFinite() || !std::isfinite(yaw) || !std::isfinite(yaw_rate))
    throw Error(ErrorCode::kInvalidArgument, "synthetic motion must be finite");
  if (!size.allFinite() || (size.array() <= 0).any())
    throw Error(ErrorCode::kInvalidArgument, "synthetic box size must be positive");
  if (surface_points < 0 || clutter_points < 0)
    throw Error(ErrorCode::kInvalidArgument, "point counts must be >= 0");
  if (!(clutter_extent >= 0)) throw Error(ErrorCode::kInvalidArgument, "clutter_extent must be >= 0");
}

CameraModeld synth_camera() { return CameraModeld::pinhole(721.5377, 721.5377, 609.5593, 172.854); }

Tracklet synth_tracklet(const SynthSpec& spec, std::uint64_t seed, int scene_id, int track_id) {
  spec.validate();
  const CameraModeld cam = synth_camera();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::uniform_real_distribution<double> pick(0.0, 1.0);

  Tracklet t;
  t.scene_id = scene_id;
  t.track_id = track_id;
  t.category = spec.category;
  t.frames.reserve(static_cast<std::size_t>(spec.frames));

  const double l = spec.size[0], w = spec.size[1], h = spec.size[2];
  // Face areas for the +/-x, +/-y, +/-z local faces.
  const double areas[3] = {h * w, l * w, l * h};
  const double total_area = 2 * (areas[0] + areas[1] + areas[2]);
  const Vec3d half(l / 2, h / 2, w / 2);

  for (int k = 0; k < spec.frames; ++k) {
    const Box3d box(spec.start + k * spec.velocity, spec.size, spec.yaw + k * spec.yaw_rate);
    const Mat3d rot = box.rotation();

    Box2d box2d{1e300, 1e300, -1e300, -1e300};
    for (const Vec3d& c : box3d_corners(box)) {
      if (!(cam.depth(c) > 0.1))
        throw Error(ErrorCode::kInvalidArgument, "synthetic box leaves the camera's field of depth at frame " +
                                                     std::to_string(k));
      const auto px = project_rect(cam, c);
      box2d.u_min = std::min(box2d.u_min, px.u);
      box2d.v_min = std::min(box2d.v_min, px.v);
      box2d.u_max = std::max(box2d.u_max, px.u);
      box2d.v_max = std::max(box2d.v_max, px.v);
    }

    PointCloudd cloud;
    const int n = spec.surface_points + spec.clutter_points;
    cloud.points.resize(3, n);
    cloud.intensity.resize(n);
    for (int i = 0; i < spec.surface_points; ++i) {
      double r = pick(rng) * total_area;
      int axis = 0;
      while (axis < 2 && r >= 2 * areas[axis]) r -= 2 * areas[axis++];
      Vec3d local;
      for (int a = 0; a < 3; ++a) local[a] = unit(rng) * 2 * half[a];
      local[axis] = r < areas[axis] ? half[axis] : -half[axis];
      cloud.points.col(i) = box.center() + rot * local;
      cloud.intensity[i] = 0.5;
    }
    for (int i = spec.surface_points; i < n; ++i) {
      Vec3d offset;
      offset.x() = unit(rng) * 2 * spec.clutter_extent;
      offset.y() = unit(rng) * 2 * h;
      offset.z() = unit(rng) * 2 * spec.clutter_extent;
      cloud.points.col(i) = box.center() + offset;
      cloud.intensity[i] = 0.1;
    }

    FrameRecord f;
    f.frame_index = k;
    f.cloud = std::make_shared<const PointCloudd>(std::move(cloud));
    f.gt_box3d = box;
    f.gt_box2d = box2d;
    f.camera = cam;
    t.frames.push_back(std::move(f));
  }
  return t;
}

}  // namespace fsiam
