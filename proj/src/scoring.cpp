#include "fsiam/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace fsiam {

namespace {

ShapeDescriptor describe_cropped(const PointCloudd& cropped, const Box3d& box, const VoxelResolution& resolution) {
  for (int r : resolution)
    if (r < 1) throw Error(ErrorCode::kInvalidArgument, "voxel resolution must be >= 1");
  ShapeDescriptor d;
  d.resolution = resolution;
  d.values = Eigen::VectorXd::Zero(resolution[0] * resolution[1] * resolution[2]);

  const PointCloudd local = to_candidate_frame(cropped, box);
  const Vec3d extent(box.length(), box.height(), box.width());
  for (Eigen::Index p = 0; p < local.size(); ++p) {
    std::array<int, 3> cell{};
    for (int a = 0; a < 3; ++a) {
      const double t = (local.points(a, p) + extent[a] / 2) / extent[a];
      cell[a] = std::clamp(static_cast<int>(std::floor(t * resolution[a])), 0, resolution[a] - 1);
    }
    d.values[(cell[0] * resolution[1] + cell[1]) * resolution[2] + cell[2]] += 1;
  }
  const double peak = d.values.maxCoeff();
  if (peak > 0) d.values /= peak;
  return d;
}

}  // namespace

ShapeDescriptor voxel_descriptor(const PointCloudd& cloud, const Box3d& box, const VoxelResolution& resolution) {
  return describe_cropped(crop_points_in_box(cloud, box), box, resolution);
}

double cosine_similarity(const ShapeDescriptor& a, const ShapeDescriptor& b) {
  if (a.values.size() != b.values.size())
    throw Error(ErrorCode::kLengthMismatch, "descriptor lengths differ");
  const double na = a.values.norm();
  const double nb = b.values.norm();
  if (na == 0 || nb == 0) return 0;
  return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

double oracle_score(const Box3d& candidate, const Box3d& gt) { return box3d_iou(candidate, gt); }

ScoredCandidate CosineScorer::score(const Box3d& candidate, const ScoringContext& ctx) const {
  const PointCloudd cropped = crop_points_in_box(ctx.cloud, candidate);
  const ShapeDescriptor d = describe_cropped(cropped, candidate, resolution_);
  ScoredCandidate out{candidate, 0.0, static_cast<int>(cropped.size())};
  out.score = cosine_similarity(ctx.template_descriptor, d);
  return out;
}

ScoredCandidate OracleScorer::score(const Box3d& candidate, const ScoringContext& ctx) const {
  ScoredCandidate out{candidate, 0.0, 0};
  out.point_count = static_cast<int>(crop_points_in_box(ctx.cloud, candidate).size());
  if (ctx.ground_truth) out.score = oracle_score(candidate, *ctx.ground_truth);
  return out;
}

std::unique_ptr<CandidateScorer> make_scorer(const std::string& name, VoxelResolution resolution) {
  if (name == "cosine") return std::make_unique<CosineScorer>(resolution);
  if (name == "oracle") return std::make_unique<OracleScorer>();
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer '" + name + "'");
}

ScoringResult score_candidates(const CandidateScorer& scorer, const ScoringContext& ctx,
                               std::span<const Box3d> candidates, const Box3d& previous) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates to score");
  ScoringResult result;
  result.all.reserve(candidates.size());
  double best_dist = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ScoredCandidate sc = scorer.score(candidates[i], ctx);
    const double dist = (sc.box.center() - previous.center()).norm();
    if (i == 0 || sc.score > result.best.score || (sc.score == result.best.score && dist < best_dist)) {
      result.best = sc;
      result.best_index = i;
      best_dist = dist;
    }
    result.all.push_back(std::move(sc));
  }
  return result;
}

}  // namespace fsiam
