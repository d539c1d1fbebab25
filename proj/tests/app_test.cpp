#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsiam/commands.hpp"

using namespace fsiam;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.data.synth.frames = 12;
  c.data.synth_tracklets = 3;
  c.box2d.sigma = 2.0;
  c.seed = 42;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fsiam_app_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FSIAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> data_rows(const std::string& results) {
  std::vector<std::string> rows;
  std::istringstream in(results);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#' && line != results_header()) rows.push_back(line);
  return rows;
}

}  // namespace

TEST(RunConfig, SerializeParseRoundTrip) {
  RunConfig c = small_config();
  c.data.kind = DataKind::kKitti;
  c.data.kitti_root = "/data/kitti";
  c.data.scenes = {1, 19};
  c.categories = {Category::kCar, Category::kCyclist};
  c.tracker.mode = TemplateMode::kPreviousPrediction;
  c.tracker.proposal.iou_threshold = 0.35;
  c.tracker.proposal.depth_margin = 2.5;
  c.tracker.proposal.yaw_offsets = {-0.1, 0.1};
  c.tracker.scorer = "oracle";
  c.tracker.resolution = {4, 5, 6};
  c.box2d.kind = Box2dKind::kFile;
  c.box2d.directory = "boxes";
  c.ope.precision_max = 3.0;
  c.seed = 0xFFFFFFFFFFFFFFFFULL;
  c.workers = 3;
  c.timing = true;
  const std::string text = serialize(c);
  EXPECT_EQ(serialize(parse_run_config(text)), text);
  EXPECT_EQ(serialize(parse_run_config("{}")), serialize(RunConfig{}));
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  for (const char* text : {"{\"sed\": 1}", "{\"proposal\": {\"n\": 3}}", "{\"seed\": \"x\"}", "[1]", "not json",
                           "{\"mode\": \"sometimes\"}", "{\"data\": {\"source\": \"tape\"}}"}) {
    try {
      parse_run_config(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument) << text;
    }
  }
}

TEST(RunConfig, Validation) {
  EXPECT_NO_THROW(small_config().validate());
  RunConfig c = small_config();
  c.workers = 0;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.box2d.dropout = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.data.kind = DataKind::kKitti;
  EXPECT_THROW(c.validate(), Error);
  c.data.kitti_root = "/x";
  c.data.scenes = {21};
  EXPECT_THROW(c.validate(), Error);
}

TEST(RunConfig, CategoryFilterAndSeedMixing) {
  RunConfig c;
  EXPECT_TRUE(c.keeps(Category::kPedestrian));
  c.categories = {Category::kCar};
  EXPECT_TRUE(c.keeps(Category::kCar));
  EXPECT_FALSE(c.keeps(Category::kCyclist));
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
}

TEST(ExitCodes, DataErrorsAreTwo) {
  EXPECT_EQ(exit_code_for(ErrorCode::kIo), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kMalformedLine), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kTruncatedFile), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kInvalidArgument), 1);
}

TEST(Track, ResultsAreByteIdenticalAcrossRunsAndWorkerCounts) {
  RunConfig c = small_config();
  const TrackOutput a = cmd_track(c);
  const TrackOutput b = cmd_track(c);
  EXPECT_EQ(a.results, b.results);
  c.workers = 3;
  const TrackOutput d = cmd_track(c);
  EXPECT_EQ(data_rows(a.results), data_rows(d.results));
  EXPECT_EQ(a.frames, 3 * 11);
  EXPECT_EQ(data_rows(a.results).size(), 33u);
  EXPECT_EQ(a.results.rfind("# config: " + serialize(small_config()) + "\n", 0), 0u);
}

TEST(Track, ThresholdOneFallsBackEverywhere) {
  RunConfig c = small_config();
  c.tracker.proposal.iou_threshold = 1.0;
  for (const std::string& row : data_rows(cmd_track(c).results)) EXPECT_NE(row.find(",Fallback,"), std::string::npos);
}

TEST(Track, OracleScorerOnCleanBoxes) {
  RunConfig c = small_config();
  c.box2d.sigma = 0;
  c.tracker.scorer = "oracle";
  c.tracker.mode = TemplateMode::kGroundTruth;
  EXPECT_GT(cmd_track(c).report.overall.success, 99.0);
}

TEST(Track, CategoryFilterWithNoMatchIsAnError) {
  RunConfig c = small_config();
  c.categories = {Category::kCyclist};
  EXPECT_THROW(cmd_track(c), Error);
}

TEST(Sweep, SingletonAxisMatchesTrack) {
  const RunConfig c = small_config();
  const OpeReport track = cmd_track(c).report;
  const auto rows = cmd_sweep(c, SweepAxis::kThreshold, {"0.2"});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].success, track.overall.success);
  EXPECT_EQ(rows[0].precision, track.overall.precision);

  const auto modes = cmd_sweep(c, SweepAxis::kMode, {"gt", "pr"});
  EXPECT_EQ(modes.size(), 2u);
  const std::string csv = format_sweep(c, SweepAxis::kCandidates, cmd_sweep(c, SweepAxis::kCandidates, {"27", "32"}));
  EXPECT_NE(csv.find("\n27,"), std::string::npos);
  EXPECT_NE(csv.find("\n32,"), std::string::npos);
  EXPECT_THROW(cmd_sweep(c, SweepAxis::kCandidates, {}), Error);
  EXPECT_THROW(cmd_sweep(c, SweepAxis::kThreshold, {"high"}), Error);
}

TEST(Bench, SingleFrameAndDeterministicCounts) {
  const RunConfig c = small_config();
  const BenchReport one = cmd_bench(c, 1);
  EXPECT_EQ(one.frames, 1);
  EXPECT_EQ(one.candidate_counts.size(), 1u);
  const BenchReport a = cmd_bench(c, 30), b = cmd_bench(c, 30);
  EXPECT_EQ(a.candidate_counts, b.candidate_counts);
  EXPECT_EQ(a.frames, 30);
  EXPECT_THROW(cmd_bench(c, 0), Error);
}

TEST(Bench, ScoringTimeFallsWithCandidateCount) {
  RunConfig c = small_config();
  c.tracker.proposal.iou_threshold = 0;
  c.box2d.sigma = 0;
  const auto best_scoring = [&](int n) {
    c.tracker.proposal.n_candidates = n;
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep)
      best = std::min(best, std::chrono::duration<double>(cmd_bench(c, 33).scoring).count());
    return best;
  };
  EXPECT_LT(best_scoring(20), best_scoring(120));
}

TEST(Synth, WrittenSceneLoadsBackAsKitti) {
  const auto root = temp_dir("synth");
  RunConfig c = small_config();
  cmd_synth(c, root, 3);
  EXPECT_TRUE(std::filesystem::exists(root / "calib" / "0003.txt"));
  EXPECT_TRUE(std::filesystem::exists(root / "box2d" / "0003_0001.txt"));

  RunConfig k = c;
  k.data.kind = DataKind::kKitti;
  k.data.kitti_root = root.string();
  k.data.scenes = {3};
  k.box2d.kind = Box2dKind::kFile;
  k.box2d.directory = (root / "box2d").string();
  const auto synth = load_tracklets(c);
  const auto loaded = load_tracklets(k);
  ASSERT_EQ(loaded.size(), synth.size());
  for (std::size_t t = 0; t < synth.size(); ++t) {
    ASSERT_EQ(loaded[t].frames.size(), synth[t].frames.size());
    for (std::size_t i = 0; i < synth[t].frames.size(); ++i)
      EXPECT_LT((loaded[t].frames[i].gt_box3d->center() - synth[t].frames[i].gt_box3d->center()).norm(), 1e-9);
    EXPECT_EQ(box2d_stream_for(k, loaded[t]).size(), synth[t].frames.size());
  }
  EXPECT_EQ(cmd_track(k).frames, cmd_track(c).frames);
}

TEST(Cli, ExitCodesAndOutputs) {
  const auto dir = temp_dir("cli");
  const std::string base = "--synth-frames 8 --synth-tracklets 2 --seed 5 ";
  const auto out = dir / "track.txt";
  EXPECT_EQ(run_cli("track " + base + "-o " + out.string()), 0);
  const std::string results = read_file(out);
  EXPECT_EQ(results.rfind("# config: ", 0), 0u);
  EXPECT_NE(results.find("\"seed\":5"), std::string::npos);
  EXPECT_EQ(data_rows(results).size(), 14u);

  EXPECT_EQ(run_cli("track " + base + "-o " + (dir / "again.txt").string()), 0);
  EXPECT_EQ(data_rows(read_file(dir / "again.txt")), data_rows(results));

  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << "{\"seed\": 9, \"data\": {\"synth\": {\"frames\": 6}, \"synth_tracklets\": 1}}";
  }
  const auto over = dir / "over.txt";
  EXPECT_EQ(run_cli("track --config " + (dir / "cfg.json").string() + " --seed 11 -o " + over.string()), 0);
  const std::string overridden = read_file(over);
  EXPECT_NE(overridden.find("\"seed\":11"), std::string::npos);
  EXPECT_EQ(data_rows(overridden).size(), 5u);

  EXPECT_EQ(run_cli("sweep " + base + "--axis candidates --values 27 32 -o " + (dir / "sweep.csv").string()), 0);
  EXPECT_EQ(run_cli("bench " + base + "--frames 3 -o " + (dir / "bench.txt").string()), 0);
  EXPECT_EQ(run_cli("synth " + base + "--out " + (dir / "kitti").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "kitti" / "label_02" / "0000.txt"));

  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("track --no-such-flag"), 1);
  EXPECT_EQ(run_cli("track --workers 0"), 1);
  EXPECT_EQ(run_cli("track --config " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("track --source kitti --kitti-root " + (dir / "nowhere").string() + " --scenes 0"), 2);
  {
    std::ofstream bad(dir / "kitti" / "label_02" / "0000.txt", std::ios::app);
    bad << "0 99 Car 0 0\n";
  }
  EXPECT_EQ(run_cli("track --source kitti --kitti-root " + (dir / "kitti").string() + " --scenes 0"), 2);
  EXPECT_EQ(setenv("FSIAM_DATA_ROOT", (dir / "nowhere").c_str(), 1), 0);
  EXPECT_EQ(run_cli("track --source kitti --scenes 0"), 2);
}
