#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fsiam/dataio.hpp"
#include "fsiam/eval.hpp"
#include "fsiam/tracker.hpp"

namespace fsiam {

enum class DataKind { kSynthetic, kKitti };
enum class Box2dKind { kSimulated, kFile };

struct DataSource {
  DataKind kind = DataKind::kSynthetic;
  std::string kitti_root;
  /// Scenes to load; empty means every scene of `split`.
  std::vector<int> scenes;
  Split split = Split::kTest;
  SynthSpec synth;
  int synth_tracklets = 4;
};

struct Box2dSource {
  Box2dKind kind = Box2dKind::kSimulated;
  double sigma = 0.0;    // pixels
  double dropout = 0.0;  // per-frame probability
  /// File source: one `<scene>_<track>.txt` per tracklet (both 4-digit).
  std::string directory;
};

struct RunConfig {
  DataSource data;
  std::vector<Category> categories;  // empty keeps all three
  TrackerConfig tracker;
  Box2dSource box2d;
  OpeConfig ope;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output;
  /// Write measured per-frame times; off keeps result files byte-identical.
  bool timing = false;

  void validate() const;
  bool keeps(Category c) const;
};

/// Compact single-line JSON.
std::string serialize(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text);

const char* to_string(DataKind k);
const char* to_string(Box2dKind k);
std::optional<Split> parse_split(std::string_view s);

/// Stateless 64-bit mix used to derive per-tracklet seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace fsiam
