#include "fsiam/eval.hpp"

#include <cstdio>

namespace fsiam {

namespace {

void check_grid(int points, double max, const char* name) {
  if (points < 2) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " grid needs at least 2 points");
  if (!(max > 0) || !std::isfinite(max))
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " grid maximum must be > 0");
}

template <typename Pass>
double curve_auc(std::span<const double> values, int points, double max, Pass pass) {
  if (values.empty()) throw Error(ErrorCode::kEmptySeries, "cannot evaluate an empty series");
  std::size_t hits = 0;
  for (int i = 0; i < points; ++i) {
    const double threshold = max * i / (points - 1);
    for (double v : values) hits += pass(v, threshold);
  }
  return 100.0 * static_cast<double>(hits) / (static_cast<double>(points) * static_cast<double>(values.size()));
}

void accumulate(OpeScore& into, const OpeScore& s) {
  ++into.tracklets;
  if (s.frames == 0) return;
  if (into.frames == 0) {
    into.success = s.success;
    into.precision = s.precision;
    into.frames = s.frames;
    return;
  }
  const double total = into.frames + s.frames;
  into.success = (into.success * into.frames + s.success * s.frames) / total;
  into.precision = (into.precision * into.frames + s.precision * s.frames) / total;
  into.frames += s.frames;
}

}  // namespace

void OpeConfig::validate() const {
  check_grid(success_points, success_max, "success");
  check_grid(precision_points, precision_max, "precision");
}

void OpeSeries::append(const OpeSeries& other) {
  overlaps.insert(overlaps.end(), other.overlaps.begin(), other.overlaps.end());
  errors.insert(errors.end(), other.errors.begin(), other.errors.end());
}

OpeSeries ope_series(std::span<const Box3d> predictions, std::span<const Box3d> ground_truth) {
  if (predictions.size() != ground_truth.size())
    throw Error(ErrorCode::kLengthMismatch, "predictions and ground truth differ in length");
  OpeSeries s;
  s.overlaps.reserve(predictions.size());
  s.errors.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    s.overlaps.push_back(box3d_iou(predictions[i], ground_truth[i]));
    s.errors.push_back((predictions[i].center() - ground_truth[i].center()).norm());
  }
  return s;
}

OpeSeries ope_series(std::span<const FrameResult> results) {
  std::vector<Box3d> pred, gt;
  for (const FrameResult& r : results) {
    if (!r.ground_truth) continue;
    pred.push_back(r.predicted);
    gt.push_back(*r.ground_truth);
  }
  return ope_series(pred, gt);
}

double success_auc(std::span<const double> overlaps, const OpeConfig& config) {
  config.validate();
  return curve_auc(overlaps, config.success_points, config.success_max,
                   [](double v, double t) { return v > t; });
}

double precision_auc(std::span<const double> errors, const OpeConfig& config) {
  config.validate();
  return curve_auc(errors, config.precision_points, config.precision_max,
                   [](double v, double t) { return v < t; });
}

OpeReport aggregate_report(std::span<const TrackletSeries> tracklets, const OpeConfig& config) {
  config.validate();
  OpeReport report;
  for (const TrackletSeries& t : tracklets) {
    if (t.series.overlaps.size() != t.series.errors.size())
      throw Error(ErrorCode::kLengthMismatch, "series overlaps and errors differ in length");
    TrackletScore ts{t.scene_id, t.track_id, t.category, {1, static_cast<int>(t.series.size()), 0, 0}};
    if (!t.series.overlaps.empty()) {
      ts.score.success = success_auc(t.series.overlaps, config);
      ts.score.precision = precision_auc(t.series.errors, config);
    }
    accumulate(report.overall, ts.score);
    accumulate(report.per_category[t.category], ts.score);
    report.per_tracklet.push_back(ts);
  }
  return report;
}

std::string format_report(const OpeReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %9s %7s %9s %10s\n", "category", "tracklets", "frames", "success",
                "precision");
  out += line;
  const auto row = [&](const char* name, const OpeScore& s) {
    std::snprintf(line, sizeof(line), "%-12s %9d %7d %9.2f %10.2f\n", name, s.tracklets, s.frames, s.success,
                  s.precision);
    out += line;
  };
  for (const auto& [cat, s] : report.per_category) row(to_string(cat), s);
  row("mean", report.overall);
  return out;
}

}  // namespace fsiam
