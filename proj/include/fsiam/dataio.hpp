#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsiam/geom3d.hpp"

namespace fsiam {

enum class Category { kCar, kPedestrian, kCyclist };

const char* to_string(Category c);
/// Car, Pedestrian or Cyclist; nullopt for every other KITTI type.
std::optional<Category> parse_category(std::string_view name);

struct FrameRecord {
  int frame_index = 0;
  /// Points in the working (rectified camera) frame. Shared between the
  /// tracklets that see the same scan.
  std::shared_ptr<const PointCloudd> cloud = std::make_shared<PointCloudd>();
  std::optional<Box3d> gt_box3d;
  std::optional<Box2d> gt_box2d;
  CameraModeld camera;

  const PointCloudd& points() const { return *cloud; }
};

struct Tracklet {
  int scene_id = 0;
  int track_id = 0;
  Category category = Category::kCar;
  std::vector<FrameRecord> frames;

  /// Number of frame indices missing between the first and last frame.
  int gap_frames() const;
};

// --- KITTI tracking formats ---

/// Reads P2, R_rect and Tr_velo_cam (object-benchmark names R0_rect and
/// Tr_velo_to_cam are accepted too). Keys may carry a trailing colon.
CameraModeld parse_calib(std::string_view text);
std::string format_calib(const CameraModeld& cam);

struct LabelRecord {
  int frame = 0;
  int track_id = -1;
  std::string type;
  double truncated = 0;
  int occluded = 0;
  double alpha = 0;
  Box2d box2d;
  Vec3d dimensions = Vec3d::Ones();  // h, w, l as written
  Vec3d location = Vec3d::Zero();    // bottom-face center
  double rotation_y = 0;
  std::optional<double> score;
  Box3d box3d;  // geometric center in the rectified camera frame
};

/// Record for a box, filling the raw KITTI fields from `box`.
LabelRecord make_label(int frame, int track_id, std::string type, const Box3d& box, const Box2d& box2d);

/// One record per non-DontCare line. KITTI locations are bottom-face
/// centers; the box center is lifted by h/2 (towards -y).
std::vector<LabelRecord> parse_labels(std::string_view text);
std::string format_labels(std::span<const LabelRecord> labels);

/// Little-endian float32 (x, y, z, intensity) quadruplets, LiDAR frame.
PointCloudd parse_velodyne(std::span<const unsigned char> bytes);
PointCloudd load_velodyne(const std::filesystem::path& path);
void write_velodyne(const std::filesystem::path& path, const PointCloudd& cloud);

enum class Split { kTrain, kVal, kTest };

const char* to_string(Split s);
/// 0-16 train, 17-18 validation, 19-20 test.
Split split_scenes(int scene_id);

// --- Tracklets ---

struct TrackletDiagnostics {
  int dropped_singletons = 0;
  int skipped_labels = 0;  // types other than Car, Pedestrian, Cyclist
  int tracklets_with_gaps = 0;
  int gap_frames = 0;

  TrackletDiagnostics& operator+=(const TrackletDiagnostics& o);
};

/// Returns the LiDAR-frame scan of a frame.
using CloudLoader = std::function<PointCloudd(int frame)>;

/// One tracklet per track id with at least two labeled frames, ordered by
/// track id. Frame gaps are kept; clouds are moved into the working frame.
std::vector<Tracklet> build_tracklets(int scene_id, std::span<const LabelRecord> labels, const CloudLoader& clouds,
                                      const CameraModeld& cam, TrackletDiagnostics* diagnostics = nullptr);

/// Reads calib/<scene>.txt, label_02/<scene>.txt and velodyne/<scene>/<frame>.bin
/// under `root` (scene zero-padded to 4 digits, frame to 6).
std::vector<Tracklet> load_kitti_scene(const std::filesystem::path& root, int scene_id,
                                       TrackletDiagnostics* diagnostics = nullptr);

/// Writes tracklets of one scene in the KITTI tracking layout.
void write_kitti_scene(const std::filesystem::path& root, int scene_id, std::span<const Tracklet> tracklets);

// --- Synthetic data ---

struct SynthSpec {
  int frames = 50;
  Category category = Category::kCar;
  Vec3d start = Vec3d(-2.0, 1.0, 15.0);  // box center at frame 0, rectified camera frame
  Vec3d velocity = Vec3d(0.1, 0.0, 0.25);  // meters per frame
  Vec3d size = Vec3d(3.9, 1.6, 1.5);       // l, w, h
  double yaw = 0.3;
  double yaw_rate = 0.0;       // radians per frame
  int surface_points = 400;    // per frame
  int clutter_points = 300;    // per frame
  double clutter_extent = 8.0; // clutter half-width around the box center, meters

  void validate() const;
};

/// Pinhole camera with KITTI-like intrinsics and identity extrinsics.
CameraModeld synth_camera();

/// Deterministic in `seed`. Frame k has the box at start + k * velocity
/// with yaw + k * yaw_rate; its 2D box is the unclamped image extent of the
/// projected corners.
Tracklet synth_tracklet(const SynthSpec& spec, std::uint64_t seed, int scene_id = 0, int track_id = 0);

// --- 2D box streams ---

struct Box2dObservation {
  Box2d box;
  double confidence = 1.0;
};

/// One entry per tracklet frame; nullopt where the 2D tracker has no output.
using Box2dStream = std::vector<std::optional<Box2dObservation>>;

/// Rows `frame,u_min,v_min,u_max,v_max,confidence` keyed by absolute frame
/// index. Blank lines and lines starting with '#' are ignored.
Box2dStream parse_box2d_stream(std::string_view text, const Tracklet& tracklet);
Box2dStream load_box2d_stream(const std::filesystem::path& path, const Tracklet& tracklet);
std::string format_box2d_stream(const Box2dStream& stream, const Tracklet& tracklet);

/// Ground-truth 2D boxes with Gaussian corner noise (sigma in pixels) and
/// per-frame dropout probability.
Box2dStream simulate_box2d_stream(const Tracklet& tracklet, double sigma, double dropout, std::uint64_t seed);

}  // namespace fsiam
