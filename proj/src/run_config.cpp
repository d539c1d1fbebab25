#include "fsiam/run_config.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace fsiam {

namespace {

using nlohmann::json;

json vec3(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3d read_vec3(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must hold 3 numbers");
  return Vec3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw Error(ErrorCode::kInvalidArgument, "unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Category read_category(const std::string& s) {
  const auto c = parse_category(s);
  if (!c) throw Error(ErrorCode::kInvalidArgument, "unknown category '" + s + "'");
  return *c;
}

}  // namespace

const char* to_string(DataKind k) { return k == DataKind::kSynthetic ? "synthetic" : "kitti"; }
const char* to_string(Box2dKind k) { return k == Box2dKind::kSimulated ? "simulated" : "file"; }

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool RunConfig::keeps(Category c) const {
  return categories.empty() || std::find(categories.begin(), categories.end(), c) != categories.end();
}

void RunConfig::validate() const {
  tracker.validate();
  ope.validate();
  if (data.kind == DataKind::kKitti) {
    if (data.kitti_root.empty()) throw Error(ErrorCode::kInvalidArgument, "KITTI source needs a dataset root");
    for (int s : data.scenes) split_scenes(s);
  } else {
    data.synth.validate();
    if (data.synth_tracklets < 1) throw Error(ErrorCode::kInvalidArgument, "synth_tracklets must be >= 1");
  }
  if (box2d.kind == Box2dKind::kFile && box2d.directory.empty())
    throw Error(ErrorCode::kInvalidArgument, "file 2D box source needs a directory");
  if (!(box2d.sigma >= 0) || !std::isfinite(box2d.sigma))
    throw Error(ErrorCode::kInvalidArgument, "box2d sigma must be >= 0");
  if (!(box2d.dropout >= 0 && box2d.dropout <= 1))
    throw Error(ErrorCode::kInvalidArgument, "box2d dropout must be in [0, 1]");
  if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
}

std::string serialize(const RunConfig& c) {
  const SynthSpec& s = c.data.synth;
  const ProposalConfig& p = c.tracker.proposal;
  json categories = json::array();
  for (Category cat : c.categories) categories.push_back(to_string(cat));
  json j = {
      {"data",
       {{"source", to_string(c.data.kind)},
        {"kitti_root", c.data.kitti_root},
        {"scenes", c.data.scenes},
        {"split", to_string(c.data.split)},
        {"synth_tracklets", c.data.synth_tracklets},
        {"synth",
         {{"frames", s.frames},
          {"category", to_string(s.category)},
          {"start", vec3(s.start)},
          {"velocity", vec3(s.velocity)},
          {"size", vec3(s.size)},
          {"yaw", s.yaw},
          {"yaw_rate", s.yaw_rate},
          {"surface_points", s.surface_points},
          {"clutter_points", s.clutter_points},
          {"clutter_extent", s.clutter_extent}}}}},
      {"categories", categories},
      {"mode", to_string(c.tracker.mode)},
      {"proposal",
       {{"iou_threshold", p.iou_threshold},
        {"n_candidates", p.n_candidates},
        {"fallback_count", p.fallback_count},
        {"depth_margin", p.depth_margin ? json(*p.depth_margin) : json(nullptr)},
        {"yaw_offsets", p.yaw_offsets},
        {"fallback_extent", p.fallback_extent},
        {"search_space_scale", p.search_space_scale},
        {"frustum_near", p.frustum_near},
        {"frustum_far", p.frustum_far}}},
      {"scorer", c.tracker.scorer},
      {"voxel_resolution", c.tracker.resolution},
      {"box2d",
       {{"source", to_string(c.box2d.kind)},
        {"sigma", c.box2d.sigma},
        {"dropout", c.box2d.dropout},
        {"directory", c.box2d.directory}}},
      {"ope",
       {{"success_points", c.ope.success_points},
        {"success_max", c.ope.success_max},
        {"precision_points", c.ope.precision_points},
        {"precision_max", c.ope.precision_max}}},
      {"seed", c.seed},
      {"workers", c.workers},
      {"output", c.output},
      {"timing", c.timing},
  };
  return j.dump();
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    reject_unknown(j, {"data", "categories", "mode", "proposal", "scorer", "voxel_resolution", "box2d", "ope", "seed",
                       "workers", "output", "timing"},
                   "config");
    if (j.contains("data")) {
      const json& d = j["data"];
      reject_unknown(d, {"source", "kitti_root", "scenes", "split", "synth_tracklets", "synth"}, "data");
      if (d.contains("source")) {
        const std::string src = d["source"].get<std::string>();
        if (src == "synthetic") c.data.kind = DataKind::kSynthetic;
        else if (src == "kitti") c.data.kind = DataKind::kKitti;
        else throw Error(ErrorCode::kInvalidArgument, "unknown data source '" + src + "'");
      }
      read(d, "kitti_root", c.data.kitti_root);
      read(d, "scenes", c.data.scenes);
      read(d, "synth_tracklets", c.data.synth_tracklets);
      if (d.contains("split")) {
        const auto split = parse_split(d["split"].get<std::string>());
        if (!split) throw Error(ErrorCode::kInvalidArgument, "unknown split");
        c.data.split = *split;
      }
      if (d.contains("synth")) {
        const json& s = d["synth"];
        SynthSpec& spec = c.data.synth;
        reject_unknown(s, {"frames", "category", "start", "velocity", "size", "yaw", "yaw_rate", "surface_points",
                           "clutter_points", "clutter_extent"},
                       "data.synth");
        read(s, "frames", spec.frames);
        if (s.contains("category")) spec.category = read_category(s["category"].get<std::string>());
        if (s.contains("start")) spec.start = read_vec3(s["start"], "start");
        if (s.contains("velocity")) spec.velocity = read_vec3(s["velocity"], "velocity");
        if (s.contains("size")) spec.size = read_vec3(s["size"], "size");
        read(s, "yaw", spec.yaw);
        read(s, "yaw_rate", spec.yaw_rate);
        read(s, "surface_points", spec.surface_points);
        read(s, "clutter_points", spec.clutter_points);
        read(s, "clutter_extent", spec.clutter_extent);
      }
    }
    if (j.contains("categories")) {
      c.categories.clear();
      for (const auto& name : j["categories"]) c.categories.push_back(read_category(name.get<std::string>()));
    }
    if (j.contains("mode")) {
      const auto mode = parse_template_mode(j["mode"].get<std::string>());
      if (!mode) throw Error(ErrorCode::kInvalidArgument, "unknown template mode");
      c.tracker.mode = *mode;
    }
    if (j.contains("proposal")) {
      const json& p = j["proposal"];
      ProposalConfig& pc = c.tracker.proposal;
      reject_unknown(p, {"iou_threshold", "n_candidates", "fallback_count", "depth_margin", "yaw_offsets",
                         "fallback_extent", "search_space_scale", "frustum_near", "frustum_far"},
                     "proposal");
      read(p, "iou_threshold", pc.iou_threshold);
      read(p, "n_candidates", pc.n_candidates);
      read(p, "fallback_count", pc.fallback_count);
      if (p.contains("depth_margin")) {
        if (p["depth_margin"].is_null()) pc.depth_margin.reset();
        else pc.depth_margin = p["depth_margin"].get<double>();
      }
      read(p, "yaw_offsets", pc.yaw_offsets);
      read(p, "fallback_extent", pc.fallback_extent);
      read(p, "search_space_scale", pc.search_space_scale);
      read(p, "frustum_near", pc.frustum_near);
      read(p, "frustum_far", pc.frustum_far);
    }
    read(j, "scorer", c.tracker.scorer);
    read(j, "voxel_resolution", c.tracker.resolution);
    if (j.contains("box2d")) {
      const json& b = j["box2d"];
      reject_unknown(b, {"source", "sigma", "dropout", "directory"}, "box2d");
      if (b.contains("source")) {
        const std::string src = b["source"].get<std::string>();
        if (src == "simulated") c.box2d.kind = Box2dKind::kSimulated;
        else if (src == "file") c.box2d.kind = Box2dKind::kFile;
        else throw Error(ErrorCode::kInvalidArgument, "unknown box2d source '" + src + "'");
      }
      read(b, "sigma", c.box2d.sigma);
      read(b, "dropout", c.box2d.dropout);
      read(b, "directory", c.box2d.directory);
    }
    if (j.contains("ope")) {
      const json& o = j["ope"];
      reject_unknown(o, {"success_points", "success_max", "precision_points", "precision_max"}, "ope");
      read(o, "success_points", c.ope.success_points);
      read(o, "success_max", c.ope.success_max);
      read(o, "precision_points", c.ope.precision_points);
      read(o, "precision_max", c.ope.precision_max);
    }
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    read(j, "output", c.output);
    read(j, "timing", c.timing);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

}  // namespace fsiam
