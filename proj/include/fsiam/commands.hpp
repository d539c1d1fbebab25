#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "fsiam/run_config.hpp"

namespace fsiam {

/// Tracklets selected by the config's data source and category filter.
std::vector<Tracklet> load_tracklets(const RunConfig& config, TrackletDiagnostics* diagnostics = nullptr);

/// The 2D box stream a tracklet sees under the config.
Box2dStream box2d_stream_for(const RunConfig& config, const Tracklet& tracklet);

/// Runs every tracklet on a pool of `config.workers` threads. Results are
/// indexed like `tracklets` whatever the completion order.
std::vector<std::vector<FrameResult>> run_tracklets(const RunConfig& config, const std::vector<Tracklet>& tracklets);

struct TrackOutput {
  std::string results;  // config header, one row per frame, report block
  OpeReport report;
  TrackletDiagnostics diagnostics;
  int frames = 0;
};

/// Row layout of the results file.
std::string results_header();

TrackOutput cmd_track(const RunConfig& config);

enum class SweepAxis { kThreshold, kCandidates, kMode };

const char* to_string(SweepAxis a);
std::optional<SweepAxis> parse_sweep_axis(std::string_view s);

struct SweepRow {
  std::string value;
  double success = 0;
  double precision = 0;
  double ms_per_frame = 0;
  int frustum_frames = 0;
  int fallback_frames = 0;
};

/// One tracking run per axis value, everything else fixed. Mode values are
/// "gt" / "pr"; numeric axes parse the strings as numbers.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, SweepAxis axis, const std::vector<std::string>& values);
/// CSV with the config header.
std::string format_sweep(const RunConfig& config, SweepAxis axis, const std::vector<SweepRow>& rows);

struct BenchReport {
  int frames = 0;
  long long candidates = 0;
  int frustum_frames = 0;
  int fallback_frames = 0;
  std::chrono::nanoseconds proposal{0};
  std::chrono::nanoseconds scoring{0};
  std::chrono::nanoseconds eval{0};
  std::chrono::nanoseconds total{0};
  std::vector<int> candidate_counts;  // per frame
};

/// Steps the tracker over the configured tracklets, cycling through them,
/// until `frames` frames are processed.
BenchReport cmd_bench(const RunConfig& config, int frames);
std::string format_bench(const RunConfig& config, const BenchReport& report);

/// Writes the configured synthetic tracklets in the KITTI layout under
/// `root` as one scene, plus their 2D box streams under root/box2d.
void cmd_synth(const RunConfig& config, const std::filesystem::path& root, int scene_id = 0);

/// Process exit code for an error: 2 for data problems, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace fsiam
