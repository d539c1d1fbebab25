#include "fsiam/tracker.hpp"

#include <algorithm>

namespace fsiam {

namespace {

using Clock = std::chrono::steady_clock;

}  // namespace

const char* to_string(TemplateMode m) {
  return m == TemplateMode::kGroundTruth ? "gt" : "pr";
}

std::optional<TemplateMode> parse_template_mode(std::string_view s) {
  if (s == "gt" || s == "ground_truth") return TemplateMode::kGroundTruth;
  if (s == "pr" || s == "previous_prediction") return TemplateMode::kPreviousPrediction;
  return std::nullopt;
}

void TrackerConfig::validate() const {
  proposal.validate();
  for (int r : resolution)
    if (r < 1) throw Error(ErrorCode::kInvalidArgument, "voxel resolution must be >= 1");
  make_scorer(scorer, resolution);
}

TrackerState init(const Tracklet& tracklet, const TrackerConfig& config) {
  if (tracklet.frames.size() < 2)
    throw Error(ErrorCode::kMissingInitialGT, "tracklet needs a template frame and at least one more frame");
  const FrameRecord& first = tracklet.frames.front();
  if (!first.gt_box3d) throw Error(ErrorCode::kMissingInitialGT, "first frame has no ground-truth box");
  TrackerState state;
  state.template_box = *first.gt_box3d;
  state.template_descriptor = voxel_descriptor(first.points(), state.template_box, config.resolution);
  state.previous_prediction = state.template_box;
  state.frame_cursor = first.frame_index;
  return state;
}

FrameResult step(TrackerState& state, const FrameRecord& frame, const std::optional<Box2d>& box2d,
                 const TrackerConfig& config, const CandidateScorer& scorer) {
  if (frame.frame_index <= state.frame_cursor)
    throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(frame.frame_index) +
                                                 " does not follow frame " + std::to_string(state.frame_cursor));
  const auto start = Clock::now();

  if (config.mode == TemplateMode::kGroundTruth && frame.gt_box3d) {
    state.template_box = *frame.gt_box3d;
    state.template_descriptor = voxel_descriptor(frame.points(), state.template_box, config.resolution);
  }

  FrameResult result;
  result.frame_index = frame.frame_index;
  result.ground_truth = frame.gt_box3d;
  result.has_box2d = box2d.has_value();

  const ProposalOutcome outcome = propose(frame.camera, box2d, state.template_box, config.proposal);
  result.branch = outcome.branch;
  result.validation_iou = outcome.validation_iou;
  result.candidate_count = static_cast<int>(outcome.candidates.size());
  result.inconsistent = outcome.inconsistent;
  result.proposal_time = outcome.elapsed;

  const auto scoring_start = Clock::now();
  const ScoringContext ctx{frame.points(), state.template_descriptor, frame.gt_box3d};
  const ScoringResult scored = score_candidates(scorer, ctx, outcome.candidates, state.previous_prediction);
  result.scoring_time = Clock::now() - scoring_start;

  result.predicted = scored.best.box;
  result.best_score = scored.best.score;
  result.best_point_count = scored.best.point_count;

  state.previous_prediction = result.predicted;
  state.frame_cursor = frame.frame_index;
  if (config.mode == TemplateMode::kPreviousPrediction) {
    state.template_box = result.predicted;
    state.template_descriptor = voxel_descriptor(frame.points(), result.predicted, config.resolution);
  }
  result.elapsed = Clock::now() - start;
  return result;
}

FrameResult step(TrackerState& state, const FrameRecord& frame, const std::optional<Box2d>& box2d,
                 const TrackerConfig& config) {
  return step(state, frame, box2d, config, *make_scorer(config.scorer, config.resolution));
}

std::vector<FrameResult> run_tracklet(const Tracklet& tracklet, const Box2dStream& stream, const TrackerConfig& config) {
  TrackerState state = init(tracklet, config);
  if (stream.size() != tracklet.frames.size())
    throw Error(ErrorCode::kLengthMismatch, "2D box stream has " + std::to_string(stream.size()) +
                                                " entries for " + std::to_string(tracklet.frames.size()) + " frames");
  const auto scorer = make_scorer(config.scorer, config.resolution);
  std::vector<FrameResult> results;
  results.reserve(tracklet.frames.size() - 1);
  for (std::size_t i = 1; i < tracklet.frames.size(); ++i) {
    std::optional<Box2d> box2d;
    if (stream[i]) box2d = stream[i]->box;
    results.push_back(step(state, tracklet.frames[i], box2d, config, *scorer));
  }
  return results;
}

Box2d project_prediction_to_2d(const CameraModeld& cam, const Box3d& predicted) {
  Box2d out{1e300, 1e300, -1e300, -1e300};
  bool any = false;
  for (const Vec3d& c : box3d_corners(predicted)) {
    if (!(cam.depth(c) > 0)) continue;
    const auto px = project_rect(cam, c);
    out.u_min = std::min(out.u_min, px.u);
    out.v_min = std::min(out.v_min, px.v);
    out.u_max = std::max(out.u_max, px.u);
    out.v_max = std::max(out.v_max, px.v);
    any = true;
  }
  if (!any) throw Error(ErrorCode::kBehindCamera, "box is entirely behind the camera");
  const double w = cam.image_width, h = cam.image_height;
  out.u_min = std::clamp(out.u_min, 0.0, w);
  out.u_max = std::clamp(out.u_max, 0.0, w);
  out.v_min = std::clamp(out.v_min, 0.0, h);
  out.v_max = std::clamp(out.v_max, 0.0, h);
  return out;
}

}  // namespace fsiam
