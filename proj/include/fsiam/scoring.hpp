#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsiam/geom3d.hpp"

namespace fsiam {

using VoxelResolution = std::array<int, 3>;

/// Occupancy histogram of the points inside a box, expressed in the box's
/// own frame and scaled so the fullest cell is 1 (all zero when empty).
struct ShapeDescriptor {
  Eigen::VectorXd values;
  VoxelResolution resolution{8, 8, 8};

  bool is_zero() const { return values.size() == 0 || values.isZero(0); }
};

/// Bins along the local (length, height, width) axes. A coordinate on the
/// upper face goes to the last cell; cell (i, j, k) is stored at
/// (i * ny + j) * nz + k.
ShapeDescriptor voxel_descriptor(const PointCloudd& cloud, const Box3d& box,
                                 const VoxelResolution& resolution = {8, 8, 8});

/// a.b / (|a||b|), or 0 when either norm is zero.
double cosine_similarity(const ShapeDescriptor& a, const ShapeDescriptor& b);

double oracle_score(const Box3d& candidate, const Box3d& gt);

struct ScoredCandidate {
  Box3d box;
  double score = 0;
  int point_count = 0;
};

/// Per-frame inputs shared by every candidate.
struct ScoringContext {
  const PointCloudd& cloud;
  const ShapeDescriptor& template_descriptor;
  std::optional<Box3d> ground_truth;
};

class CandidateScorer {
 public:
  virtual ~CandidateScorer() = default;
  virtual ScoredCandidate score(const Box3d& candidate, const ScoringContext& ctx) const = 0;
  virtual std::string name() const = 0;
};

/// Cosine similarity between the template's and the candidate's voxel
/// occupancy descriptors.
class CosineScorer final : public CandidateScorer {
 public:
  explicit CosineScorer(VoxelResolution resolution = {8, 8, 8}) : resolution_(resolution) {}
  ScoredCandidate score(const Box3d& candidate, const ScoringContext& ctx) const override;
  std::string name() const override { return "cosine"; }
  const VoxelResolution& resolution() const { return resolution_; }

 private:
  VoxelResolution resolution_;
};

/// IoU with the frame's ground truth; 0 for every candidate when the frame
/// has none. For harness validation only.
class OracleScorer final : public CandidateScorer {
 public:
  ScoredCandidate score(const Box3d& candidate, const ScoringContext& ctx) const override;
  std::string name() const override { return "oracle"; }
};

std::unique_ptr<CandidateScorer> make_scorer(const std::string& name, VoxelResolution resolution = {8, 8, 8});

struct ScoringResult {
  ScoredCandidate best;
  std::size_t best_index = 0;
  std::vector<ScoredCandidate> all;
};

/// Highest score wins; ties go to the center closest to `previous`, then to
/// the lowest index.
ScoringResult score_candidates(const CandidateScorer& scorer, const ScoringContext& ctx,
                               std::span<const Box3d> candidates, const Box3d& previous);

}  // namespace fsiam
