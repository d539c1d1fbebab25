#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsiam/dataio.hpp"
#include "fsiam/proposal.hpp"
#include "fsiam/scoring.hpp"

namespace fsiam {

enum class TemplateMode { kGroundTruth, kPreviousPrediction };

const char* to_string(TemplateMode m);
/// Accepts "gt" / "ground_truth" and "pr" / "previous_prediction".
std::optional<TemplateMode> parse_template_mode(std::string_view s);

struct TrackerConfig {
  TemplateMode mode = TemplateMode::kGroundTruth;
  ProposalConfig proposal;
  std::string scorer = "cosine";
  VoxelResolution resolution{8, 8, 8};

  void validate() const;
};

struct TrackerState {
  Box3d template_box;
  ShapeDescriptor template_descriptor;
  Box3d previous_prediction;
  int frame_cursor = 0;
};

struct FrameResult {
  int frame_index = 0;
  Box3d predicted;
  std::optional<Box3d> ground_truth;
  Branch branch = Branch::kFallback;
  double validation_iou = 0;
  int candidate_count = 0;
  double best_score = 0;
  int best_point_count = 0;
  bool has_box2d = false;
  bool inconsistent = false;
  std::chrono::nanoseconds proposal_time{0};
  std::chrono::nanoseconds scoring_time{0};
  std::chrono::nanoseconds elapsed{0};
};

/// Template = frame-0 ground truth, descriptor from frame-0 points inside it.
/// Throws kMissingInitialGT for tracklets shorter than 2 frames or without a
/// frame-0 box.
TrackerState init(const Tracklet& tracklet, const TrackerConfig& config);

/// One frame of crop -> validate -> candidates -> score. Geometric failures
/// route to the fallback grid. Ground-truth mode takes the template from the
/// frame's own ground truth (points of this frame); previous-prediction mode
/// uses the last prediction and, after predicting, re-extracts the
/// descriptor from this frame's points inside the new prediction.
FrameResult step(TrackerState& state, const FrameRecord& frame, const std::optional<Box2d>& box2d,
                 const TrackerConfig& config, const CandidateScorer& scorer);
FrameResult step(TrackerState& state, const FrameRecord& frame, const std::optional<Box2d>& box2d,
                 const TrackerConfig& config);

/// One result per frame after the first. `stream` must hold one entry per frame.
std::vector<FrameResult> run_tracklet(const Tracklet& tracklet, const Box2dStream& stream, const TrackerConfig& config);

/// Image extent of the corners in front of the camera, clamped to the
/// image. Throws kBehindCamera when no corner has positive depth.
Box2d project_prediction_to_2d(const CameraModeld& cam, const Box3d& predicted);

}  // namespace fsiam
