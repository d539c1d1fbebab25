#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fsiam/commands.hpp"

namespace {

using namespace fsiam;

// Flag values land here first so that only flags given on the command line
// override the config file.
struct Flags {
  std::string config_file;
  std::string source, kitti_root, split, mode, scorer, box2d_source, box2d_dir, output;
  std::vector<int> scenes, resolution;
  std::vector<std::string> categories;
  std::vector<double> yaw_offsets, synth_start, synth_velocity, synth_size;
  int synth_tracklets = 0, synth_frames = 0, surface_points = 0, clutter_points = 0;
  std::string synth_category;
  double synth_yaw = 0, synth_yaw_rate = 0, clutter_extent = 0;
  double threshold = 0, depth_margin = 0, fallback_extent = 0, search_scale = 0, near = 0, far = 0;
  int candidates = 0, fallback_count = 0;
  double sigma = 0, dropout = 0;
  int success_points = 0, precision_points = 0;
  double success_max = 0, precision_max = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  bool timing = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vec3d to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

void add_config_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON run config; flags given explicitly override it");
  app.add_option("--source", f.source, "data source")->check(CLI::IsMember({"synthetic", "kitti"}));
  app.add_option("--kitti-root", f.kitti_root, "KITTI tracking root (default: $FSIAM_DATA_ROOT)");
  app.add_option("--scenes", f.scenes, "KITTI scene ids");
  app.add_option("--split", f.split, "split used when no scenes are given")
      ->check(CLI::IsMember({"train", "val", "test"}));
  app.add_option("--categories", f.categories, "category filter (Car Pedestrian Cyclist)");
  app.add_option("--synth-tracklets", f.synth_tracklets, "number of synthetic tracklets");
  app.add_option("--synth-frames", f.synth_frames, "frames per synthetic tracklet");
  app.add_option("--synth-category", f.synth_category, "synthetic object category");
  app.add_option("--synth-start", f.synth_start, "synthetic start center x y z")->expected(3);
  app.add_option("--synth-velocity", f.synth_velocity, "synthetic per-frame velocity x y z")->expected(3);
  app.add_option("--synth-size", f.synth_size, "synthetic box size l w h")->expected(3);
  app.add_option("--synth-yaw", f.synth_yaw, "synthetic initial yaw");
  app.add_option("--synth-yaw-rate", f.synth_yaw_rate, "synthetic yaw change per frame");
  app.add_option("--surface-points", f.surface_points, "object surface points per frame");
  app.add_option("--clutter-points", f.clutter_points, "clutter points per frame");
  app.add_option("--clutter-extent", f.clutter_extent, "clutter half extent in meters");
  app.add_option("--mode", f.mode, "template mode")->check(CLI::IsMember({"gt", "pr"}));
  app.add_option("--threshold", f.threshold, "validation IoU threshold");
  app.add_option("--candidates", f.candidates, "frustum candidate count");
  app.add_option("--fallback-count", f.fallback_count, "fallback candidate count");
  app.add_option("--depth-margin", f.depth_margin, "depth crop margin in meters");
  app.add_option("--yaw-offsets", f.yaw_offsets, "candidate yaw offsets");
  app.add_option("--fallback-extent", f.fallback_extent, "fallback grid extent in template widths");
  app.add_option("--search-scale", f.search_scale, "search space scale");
  app.add_option("--frustum-near", f.near, "frustum near depth");
  app.add_option("--frustum-far", f.far, "frustum far depth");
  app.add_option("--scorer", f.scorer, "candidate scorer")->check(CLI::IsMember({"cosine", "oracle"}));
  app.add_option("--voxel-resolution", f.resolution, "descriptor grid resolution")->expected(3);
  app.add_option("--box2d-source", f.box2d_source, "2D box source")->check(CLI::IsMember({"simulated", "file"}));
  app.add_option("--box2d-dir", f.box2d_dir, "directory of per-tracklet 2D box files");
  app.add_option("--sigma", f.sigma, "simulated 2D box noise in pixels");
  app.add_option("--dropout", f.dropout, "simulated 2D box dropout probability");
  app.add_option("--success-points", f.success_points, "success threshold grid size");
  app.add_option("--success-max", f.success_max, "largest overlap threshold");
  app.add_option("--precision-points", f.precision_points, "precision threshold grid size");
  app.add_option("--precision-max", f.precision_max, "largest center error threshold in meters");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--workers", f.workers, "tracklet worker threads");
  app.add_option("-o,--output", f.output, "output file (stdout when empty)");
  app.add_flag("--timing", f.timing, "record measured per-frame times");
}

RunConfig build_config(const CLI::App& app, const Flags& f) {
  RunConfig c;
  if (!f.config_file.empty()) c = parse_run_config(read_text(f.config_file));
  const auto given = [&](const char* name) { return app.count(name) > 0; };
  const auto category = [](const std::string& s) {
    const auto cat = parse_category(s);
    if (!cat) throw Error(ErrorCode::kInvalidArgument, "unknown category '" + s + "'");
    return *cat;
  };

  if (given("--source")) c.data.kind = f.source == "kitti" ? DataKind::kKitti : DataKind::kSynthetic;
  if (given("--kitti-root")) c.data.kitti_root = f.kitti_root;
  if (c.data.kitti_root.empty())
    if (const char* env = std::getenv("FSIAM_DATA_ROOT")) c.data.kitti_root = env;
  if (given("--scenes")) c.data.scenes = f.scenes;
  if (given("--split")) c.data.split = *parse_split(f.split);
  if (given("--categories")) {
    c.categories.clear();
    for (const auto& s : f.categories) c.categories.push_back(category(s));
  }
  SynthSpec& s = c.data.synth;
  if (given("--synth-tracklets")) c.data.synth_tracklets = f.synth_tracklets;
  if (given("--synth-frames")) s.frames = f.synth_frames;
  if (given("--synth-category")) s.category = category(f.synth_category);
  if (given("--synth-start")) s.start = to_vec3(f.synth_start);
  if (given("--synth-velocity")) s.velocity = to_vec3(f.synth_velocity);
  if (given("--synth-size")) s.size = to_vec3(f.synth_size);
  if (given("--synth-yaw")) s.yaw = f.synth_yaw;
  if (given("--synth-yaw-rate")) s.yaw_rate = f.synth_yaw_rate;
  if (given("--surface-points")) s.surface_points = f.surface_points;
  if (given("--clutter-points")) s.clutter_points = f.clutter_points;
  if (given("--clutter-extent")) s.clutter_extent = f.clutter_extent;

  ProposalConfig& p = c.tracker.proposal;
  if (given("--mode")) c.tracker.mode = *parse_template_mode(f.mode);
  if (given("--threshold")) p.iou_threshold = f.threshold;
  if (given("--candidates")) p.n_candidates = f.candidates;
  if (given("--fallback-count")) p.fallback_count = f.fallback_count;
  if (given("--depth-margin")) p.depth_margin = f.depth_margin;
  if (given("--yaw-offsets")) p.yaw_offsets = f.yaw_offsets;
  if (given("--fallback-extent")) p.fallback_extent = f.fallback_extent;
  if (given("--search-scale")) p.search_space_scale = f.search_scale;
  if (given("--frustum-near")) p.frustum_near = f.near;
  if (given("--frustum-far")) p.frustum_far = f.far;
  if (given("--scorer")) c.tracker.scorer = f.scorer;
  if (given("--voxel-resolution")) c.tracker.resolution = {f.resolution[0], f.resolution[1], f.resolution[2]};

  if (given("--box2d-source")) c.box2d.kind = f.box2d_source == "file" ? Box2dKind::kFile : Box2dKind::kSimulated;
  if (given("--box2d-dir")) c.box2d.directory = f.box2d_dir;
  if (given("--sigma")) c.box2d.sigma = f.sigma;
  if (given("--dropout")) c.box2d.dropout = f.dropout;
  if (given("--success-points")) c.ope.success_points = f.success_points;
  if (given("--success-max")) c.ope.success_max = f.success_max;
  if (given("--precision-points")) c.ope.precision_points = f.precision_points;
  if (given("--precision-max")) c.ope.precision_max = f.precision_max;
  if (given("--seed")) c.seed = f.seed;
  if (given("--workers")) c.workers = f.workers;
  if (given("--output")) c.output = f.output;
  if (given("--timing")) c.timing = f.timing;
  c.validate();
  return c;
}

void emit(const RunConfig& config, const std::string& text) {
  if (config.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + config.output);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frustum-proposal 3D single object tracker"};
  app.require_subcommand(1);

  Flags track_flags, sweep_flags, bench_flags, synth_flags;
  CLI::App* track = app.add_subcommand("track", "track every selected tracklet and report OPE scores");
  add_config_flags(*track, track_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "rerun tracking over a list of values for one parameter");
  add_config_flags(*sweep, sweep_flags);
  std::string axis_name;
  std::vector<std::string> values;
  sweep->add_option("--axis", axis_name, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"threshold", "candidates", "mode"}));
  sweep->add_option("--values", values, "values to sweep")->required();

  CLI::App* bench = app.add_subcommand("bench", "time the proposal, scoring and eval stages");
  add_config_flags(*bench, bench_flags);
  int frames = 100;
  bench->add_option("--frames", frames, "frames to process")->check(CLI::PositiveNumber);

  CLI::App* synth = app.add_subcommand("synth", "write synthetic tracklets as a KITTI tracking tree");
  add_config_flags(*synth, synth_flags);
  std::string out_root;
  int scene_id = 0;
  synth->add_option("--out", out_root, "output dataset root")->required();
  synth->add_option("--scene", scene_id, "scene id of the written sequence")->check(CLI::Range(0, 9999));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (track->parsed()) {
      const RunConfig config = build_config(*track, track_flags);
      const TrackOutput result = cmd_track(config);
      std::cout << (config.output.empty() ? result.results : format_report(result.report));
    } else if (sweep->parsed()) {
      const RunConfig config = build_config(*sweep, sweep_flags);
      const SweepAxis axis = *parse_sweep_axis(axis_name);
      emit(config, format_sweep(config, axis, cmd_sweep(config, axis, values)));
    } else if (bench->parsed()) {
      const RunConfig config = build_config(*bench, bench_flags);
      emit(config, format_bench(config, cmd_bench(config, frames)));
    } else if (synth->parsed()) {
      const RunConfig config = build_config(*synth, synth_flags);
      cmd_synth(config, out_root, scene_id);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
