#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fsiam/dataio.hpp"
#include "fsiam/tracker.hpp"

namespace fsiam {

/// Threshold grids of the success (overlap) and precision (center error)
/// curves: `points` evenly spaced values from 0 to the maximum.
struct OpeConfig {
  int success_points = 101;
  double success_max = 1.0;
  int precision_points = 101;
  double precision_max = 2.0;  // meters

  void validate() const;
};

struct OpeSeries {
  std::vector<double> overlaps;
  std::vector<double> errors;

  std::size_t size() const { return overlaps.size(); }
  void append(const OpeSeries& other);
};

OpeSeries ope_series(std::span<const Box3d> predictions, std::span<const Box3d> ground_truth);
/// Frames that carry a ground-truth box.
OpeSeries ope_series(std::span<const FrameResult> results);

/// 100 x mean over thresholds t of the fraction of frames with overlap > t.
double success_auc(std::span<const double> overlaps, const OpeConfig& config = {});
/// 100 x mean over thresholds e of the fraction of frames with error < e.
double precision_auc(std::span<const double> errors, const OpeConfig& config = {});

struct TrackletSeries {
  int scene_id = 0;
  int track_id = 0;
  Category category = Category::kCar;
  OpeSeries series;
};

struct OpeScore {
  int tracklets = 0;
  int frames = 0;
  double success = 0;
  double precision = 0;
};

struct TrackletScore {
  int scene_id = 0;
  int track_id = 0;
  Category category = Category::kCar;
  OpeScore score;
};

struct OpeReport {
  OpeScore overall;
  std::map<Category, OpeScore> per_category;
  std::vector<TrackletScore> per_tracklet;
};

/// Frame-weighted means of the tracklet metrics, overall and per category.
/// Tracklets without evaluated frames are listed but carry no weight.
OpeReport aggregate_report(std::span<const TrackletSeries> tracklets, const OpeConfig& config = {});

/// Plain-text table: one row per category plus the overall mean.
std::string format_report(const OpeReport& report);

}  // namespace fsiam
