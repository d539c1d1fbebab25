#include <map>

#include "fsiam/dataio.hpp"

namespace fsiam {

int Tracklet::gap_frames() const {
  if (frames.size() < 2) return 0;
  const int span = frames.back().frame_index - frames.front().frame_index + 1;
  return span - static_cast<int>(frames.size());
}

TrackletDiagnostics& TrackletDiagnostics::operator+=(const TrackletDiagnostics& o) {
  dropped_singletons += o.dropped_singletons;
  skipped_labels += o.skipped_labels;
  tracklets_with_gaps += o.tracklets_with_gaps;
  gap_frames += o.gap_frames;
  return *this;
}

std::vector<Tracklet> build_tracklets(int scene_id, std::span<const LabelRecord> labels, const CloudLoader& clouds,
                                      const CameraModeld& cam, TrackletDiagnostics* diagnostics) {
  TrackletDiagnostics diag;
  std::map<int, std::map<int, const LabelRecord*>> by_track;
  std::map<int, Category> categories;
  for (const LabelRecord& r : labels) {
    const auto cat = parse_category(r.type);
    if (!cat) {
      ++diag.skipped_labels;
      continue;
    }
    const auto [it, fresh] = categories.emplace(r.track_id, *cat);
    if (!fresh && it->second != *cat)
      throw Error(ErrorCode::kMalformedLine, "track " + std::to_string(r.track_id) + " changes category");
    if (!by_track[r.track_id].emplace(r.frame, &r).second)
      throw Error(ErrorCode::kMalformedLine, "track " + std::to_string(r.track_id) + " labeled twice in frame " +
                                                 std::to_string(r.frame));
  }

  std::map<int, std::shared_ptr<const PointCloudd>> cache;
  const auto scan = [&](int frame) {
    auto it = cache.find(frame);
    if (it != cache.end()) return it->second;
    PointCloudd cloud = clouds ? clouds(frame) : PointCloudd{};
    for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.points.col(i) = cam.lidar_to_rect(cloud.points.col(i));
    auto ptr = std::make_shared<const PointCloudd>(std::move(cloud));
    cache.emplace(frame, ptr);
    return ptr;
  };

  std::vector<Tracklet> out;
  for (const auto& [track_id, frames] : by_track) {
    if (frames.size() < 2) {
      ++diag.dropped_singletons;
      continue;
    }
    Tracklet t;
    t.scene_id = scene_id;
    t.track_id = track_id;
    t.category = categories.at(track_id);
    for (const auto& [frame, label] : frames) {
      FrameRecord f;
      f.frame_index = frame;
      f.cloud = scan(frame);
      f.gt_box3d = label->box3d;
      f.gt_box2d = label->box2d;
      f.camera = cam;
      t.frames.push_back(std::move(f));
    }
    if (const int gaps = t.gap_frames(); gaps > 0) {
      ++diag.tracklets_with_gaps;
      diag.gap_frames += gaps;
    }
    out.push_back(std::move(t));
  }
  if (diagnostics) *diagnostics += diag;
  return out;
}

}  // namespace fsiam
