#include "fsiam/commands.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "parse_util.hpp"

namespace fsiam {

namespace {

using Clock = std::chrono::steady_clock;

std::string box2d_file_name(int scene, int track) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d_%04d.txt", scene, track);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

std::string comment_block(const std::string& text) {
  std::string out;
  for (std::string_view line : detail::split_lines(text)) {
    out += "# ";
    out += line;
    out += '\n';
  }
  return out;
}

std::string frame_row(const Tracklet& t, const FrameResult& r, bool timing) {
  const Box3d& b = r.predicted;
  std::string row = std::to_string(t.scene_id) + ',' + std::to_string(t.track_id) + ',' +
                    std::to_string(r.frame_index);
  for (double v : {b.center().x(), b.center().y(), b.center().z(), b.length(), b.width(), b.height(), b.yaw()})
    row += ',' + detail::format_double(v);
  row += ',';
  row += to_string(r.branch);
  row += ',' + detail::format_double(r.validation_iou) + ',' + std::to_string(r.candidate_count) + ',' +
         detail::format_double(r.best_score) + ',';
  row += timing ? std::to_string(std::chrono::duration_cast<std::chrono::microseconds>(r.elapsed).count()) : "0";
  return row;
}

OpeReport report_for(const RunConfig& config, const std::vector<Tracklet>& tracklets,
                     const std::vector<std::vector<FrameResult>>& results) {
  std::vector<TrackletSeries> series;
  for (std::size_t i = 0; i < tracklets.size(); ++i)
    series.push_back({tracklets[i].scene_id, tracklets[i].track_id, tracklets[i].category, ope_series(results[i])});
  return aggregate_report(series, config.ope);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingKey:
    case ErrorCode::kMalformedMatrix:
    case ErrorCode::kMalformedLine:
    case ErrorCode::kTruncatedFile:
    case ErrorCode::kUnknownScene:
    case ErrorCode::kFrameMismatch:
    case ErrorCode::kMissingInitialGT:
    case ErrorCode::kEmptySeries:
    case ErrorCode::kIo:
      return 2;
    default:
      return 1;
  }
}

std::vector<Tracklet> load_tracklets(const RunConfig& config, TrackletDiagnostics* diagnostics) {
  std::vector<Tracklet> all;
  if (config.data.kind == DataKind::kSynthetic) {
    for (int i = 0; i < config.data.synth_tracklets; ++i) {
      SynthSpec spec = config.data.synth;
      spec.yaw += 0.25 * i;
      all.push_back(synth_tracklet(spec, mix_seed(config.seed, static_cast<std::uint64_t>(i)), 0, i));
    }
  } else {
    std::vector<int> scenes = config.data.scenes;
    if (scenes.empty())
      for (int s = 0; s <= 20; ++s)
        if (split_scenes(s) == config.data.split) scenes.push_back(s);
    for (int s : scenes) {
      auto scene = load_kitti_scene(config.data.kitti_root, s, diagnostics);
      std::move(scene.begin(), scene.end(), std::back_inserter(all));
    }
  }
  std::vector<Tracklet> kept;
  for (Tracklet& t : all)
    if (config.keeps(t.category)) kept.push_back(std::move(t));
  return kept;
}

Box2dStream box2d_stream_for(const RunConfig& config, const Tracklet& tracklet) {
  if (config.box2d.kind == Box2dKind::kFile)
    return load_box2d_stream(std::filesystem::path(config.box2d.directory) /
                                 box2d_file_name(tracklet.scene_id, tracklet.track_id),
                             tracklet);
  const std::uint64_t seed = mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(tracklet.scene_id) + 1000),
                                      static_cast<std::uint64_t>(tracklet.track_id));
  return simulate_box2d_stream(tracklet, config.box2d.sigma, config.box2d.dropout, seed);
}

std::vector<std::vector<FrameResult>> run_tracklets(const RunConfig& config, const std::vector<Tracklet>& tracklets) {
  std::vector<std::vector<FrameResult>> results(tracklets.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tracklets.size();) {
      try {
        results[i] = run_tracklet(tracklets[i], box2d_stream_for(config, tracklets[i]), config.tracker);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tracklets.size();
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(config.workers), tracklets.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::string results_header() {
  return "scene,track,frame,x,y,z,l,w,h,yaw,branch,validation_iou,candidates,score,elapsed_us";
}

TrackOutput cmd_track(const RunConfig& config) {
  config.validate();
  TrackOutput out;
  const std::vector<Tracklet> tracklets = load_tracklets(config, &out.diagnostics);
  if (tracklets.empty()) throw Error(ErrorCode::kEmptySeries, "no tracklets match the configuration");
  const auto results = run_tracklets(config, tracklets);
  out.report = report_for(config, tracklets, results);

  std::string text = "# config: " + serialize(config) + "\n";
  text += results_header() + "\n";
  for (std::size_t i = 0; i < tracklets.size(); ++i)
    for (const FrameResult& r : results[i]) {
      text += frame_row(tracklets[i], r, config.timing) + "\n";
      ++out.frames;
    }
  text += comment_block(format_report(out.report));
  const TrackletDiagnostics& d = out.diagnostics;
  text += "# diagnostics: dropped_singletons=" + std::to_string(d.dropped_singletons) +
          " skipped_labels=" + std::to_string(d.skipped_labels) +
          " tracklets_with_gaps=" + std::to_string(d.tracklets_with_gaps) +
          " gap_frames=" + std::to_string(d.gap_frames) + "\n";
  out.results = std::move(text);
  if (!config.output.empty()) write_file(config.output, out.results);
  return out;
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kThreshold: return "threshold";
    case SweepAxis::kCandidates: return "candidates";
    case SweepAxis::kMode: return "mode";
  }
  return "?";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view s) {
  if (s == "threshold") return SweepAxis::kThreshold;
  if (s == "candidates") return SweepAxis::kCandidates;
  if (s == "mode") return SweepAxis::kMode;
  return std::nullopt;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, SweepAxis axis, const std::vector<std::string>& values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one value");
  std::vector<RunConfig> runs;
  for (const std::string& v : values) {
    RunConfig c = config;
    if (axis == SweepAxis::kMode) {
      const auto mode = parse_template_mode(v);
      if (!mode) throw Error(ErrorCode::kInvalidArgument, "unknown template mode '" + v + "'");
      c.tracker.mode = *mode;
    } else if (axis == SweepAxis::kThreshold) {
      const auto x = detail::parse_number<double>(v);
      if (!x) throw Error(ErrorCode::kInvalidArgument, "threshold '" + v + "' is not a number");
      c.tracker.proposal.iou_threshold = *x;
    } else {
      const auto n = detail::parse_number<int>(v);
      if (!n) throw Error(ErrorCode::kInvalidArgument, "candidate count '" + v + "' is not an integer");
      c.tracker.proposal.n_candidates = *n;
    }
    c.validate();
    runs.push_back(std::move(c));
  }

  const std::vector<Tracklet> tracklets = load_tracklets(config);
  if (tracklets.empty()) throw Error(ErrorCode::kEmptySeries, "no tracklets match the configuration");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto start = Clock::now();
    const auto results = run_tracklets(runs[k], tracklets);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const OpeReport report = report_for(runs[k], tracklets, results);
    SweepRow row{values[k], report.overall.success, report.overall.precision, 0, 0, 0};
    int frames = 0;
    for (const auto& rs : results)
      for (const FrameResult& r : rs) {
        ++frames;
        (r.branch == Branch::kFrustumAccepted ? row.frustum_frames : row.fallback_frames) += 1;
      }
    row.ms_per_frame = frames ? ms / frames : 0;
    rows.push_back(row);
  }
  return rows;
}

std::string format_sweep(const RunConfig& config, SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = "# config: " + serialize(config) + "\n";
  out += std::string(to_string(axis)) + ",success,precision,ms_per_frame,frustum_frames,fallback_frames\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%.4f,%.4f,%.4f,%d,%d\n", r.success, r.precision, r.ms_per_frame,
                  r.frustum_frames, r.fallback_frames);
    out += r.value + buf;
  }
  return out;
}

BenchReport cmd_bench(const RunConfig& config, int frames) {
  config.validate();
  if (frames < 1) throw Error(ErrorCode::kInvalidArgument, "bench needs at least one frame");
  const std::vector<Tracklet> tracklets = load_tracklets(config);
  if (tracklets.empty()) throw Error(ErrorCode::kEmptySeries, "no tracklets match the configuration");
  const auto scorer = make_scorer(config.tracker.scorer, config.tracker.resolution);

  BenchReport report;
  const auto start = Clock::now();
  std::vector<Box3d> predictions, truths;
  for (std::size_t t = 0; report.frames < frames; t = (t + 1) % tracklets.size()) {
    const Tracklet& tracklet = tracklets[t];
    const Box2dStream stream = box2d_stream_for(config, tracklet);
    TrackerState state = init(tracklet, config.tracker);
    for (std::size_t i = 1; i < tracklet.frames.size() && report.frames < frames; ++i) {
      std::optional<Box2d> box2d;
      if (stream[i]) box2d = stream[i]->box;
      const FrameResult r = step(state, tracklet.frames[i], box2d, config.tracker, *scorer);
      report.proposal += r.proposal_time;
      report.scoring += r.scoring_time;
      report.candidates += r.candidate_count;
      report.candidate_counts.push_back(r.candidate_count);
      (r.branch == Branch::kFrustumAccepted ? report.frustum_frames : report.fallback_frames) += 1;
      if (r.ground_truth) {
        predictions.push_back(r.predicted);
        truths.push_back(*r.ground_truth);
      }
      ++report.frames;
    }
  }
  const auto eval_start = Clock::now();
  if (!predictions.empty()) {
    const OpeSeries s = ope_series(predictions, truths);
    success_auc(s.overlaps, config.ope);
    precision_auc(s.errors, config.ope);
  }
  const auto end = Clock::now();
  report.eval = end - eval_start;
  report.total = end - start;
  return report;
}

std::string format_bench(const RunConfig& config, const BenchReport& r) {
  const auto ms = [](std::chrono::nanoseconds d) { return std::chrono::duration<double, std::milli>(d).count(); };
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "frames=%d\ncandidates=%lld\nfrustum_frames=%d\nfallback_frames=%d\n"
                "proposal_ms=%.3f\nscoring_ms=%.3f\neval_ms=%.3f\ntotal_ms=%.3f\nms_per_frame=%.4f\n",
                r.frames, r.candidates, r.frustum_frames, r.fallback_frames, ms(r.proposal), ms(r.scoring),
                ms(r.eval), ms(r.total), r.frames ? ms(r.total) / r.frames : 0.0);
  return "# config: " + serialize(config) + "\n" + buf;
}

void cmd_synth(const RunConfig& config, const std::filesystem::path& root, int scene_id) {
  if (config.data.kind != DataKind::kSynthetic)
    throw Error(ErrorCode::kInvalidArgument, "synth needs a synthetic data source");
  config.validate();
  std::vector<Tracklet> tracklets = load_tracklets(config);
  if (tracklets.empty()) throw Error(ErrorCode::kEmptySeries, "no tracklets match the configuration");
  for (Tracklet& t : tracklets) t.scene_id = scene_id;
  // Tracklets share frame indices, so each gets its own scan set: stack the
  // clouds of every tracklet into one scan per frame.
  std::map<int, std::vector<const PointCloudd*>> per_frame;
  for (const Tracklet& t : tracklets)
    for (const FrameRecord& f : t.frames) per_frame[f.frame_index].push_back(f.cloud.get());
  std::map<int, std::shared_ptr<const PointCloudd>> merged;
  for (const auto& [frame, clouds] : per_frame) {
    Eigen::Index n = 0;
    for (const PointCloudd* c : clouds) n += c->size();
    auto m = std::make_shared<PointCloudd>();
    m->points.resize(3, n);
    m->intensity.resize(n);
    Eigen::Index at = 0;
    for (const PointCloudd* c : clouds) {
      m->points.middleCols(at, c->size()) = c->points;
      m->intensity.segment(at, c->size()) =
          c->has_intensity() ? c->intensity : Eigen::VectorXd::Zero(c->size()).eval();
      at += c->size();
    }
    merged[frame] = m;
  }
  for (Tracklet& t : tracklets)
    for (FrameRecord& f : t.frames) f.cloud = merged.at(f.frame_index);
  write_kitti_scene(root, scene_id, tracklets);

  std::filesystem::create_directories(root / "box2d");
  for (const Tracklet& t : tracklets)
    write_file((root / "box2d" / box2d_file_name(t.scene_id, t.track_id)).string(),
               "# config: " + serialize(config) + "\n" + format_box2d_stream(box2d_stream_for(config, t), t));
}

}  // namespace fsiam
