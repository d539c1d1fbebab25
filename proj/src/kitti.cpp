#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "fsiam/dataio.hpp"
#include "parse_util.hpp"

namespace fsiam {

namespace {

using detail::format_double;
using detail::parse_number;

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols> read_matrix(const std::vector<std::string_view>& values, const std::string& key) {
  if (values.size() != static_cast<std::size_t>(Rows * Cols))
    throw Error(ErrorCode::kMalformedMatrix, key + ": expected " + std::to_string(Rows * Cols) + " values, got " +
                                                 std::to_string(values.size()));
  Eigen::Matrix<double, Rows, Cols> m;
  for (int r = 0; r < Rows; ++r)
    for (int c = 0; c < Cols; ++c) {
      const auto v = parse_number<double>(values[static_cast<std::size_t>(r * Cols + c)]);
      if (!v || !std::isfinite(*v)) throw Error(ErrorCode::kMalformedMatrix, key + ": non-numeric entry");
      m(r, c) = *v;
    }
  return m;
}

void require_orthonormal(const Mat3d& r, const std::string& key) {
  const double err = (r * r.transpose() - Mat3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-6) || r.determinant() <= 0)
    throw Error(ErrorCode::kMalformedMatrix, key + ": rotation is not orthonormal within 1e-6");
}

std::string join_matrix(const auto& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += ' ';
      out += format_double(m(r, c));
    }
  return out;
}

std::string padded(int value, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

const char* to_string(Category c) {
  switch (c) {
    case Category::kCar: return "Car";
    case Category::kPedestrian: return "Pedestrian";
    case Category::kCyclist: return "Cyclist";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  if (name == "Car") return Category::kCar;
  if (name == "Pedestrian") return Category::kPedestrian;
  if (name == "Cyclist") return Category::kCyclist;
  return std::nullopt;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_scenes(int scene_id) {
  if (scene_id >= 0 && scene_id <= 16) return Split::kTrain;
  if (scene_id >= 17 && scene_id <= 18) return Split::kVal;
  if (scene_id >= 19 && scene_id <= 20) return Split::kTest;
  throw Error(ErrorCode::kUnknownScene, "scene " + std::to_string(scene_id) + " is outside 0..20");
}

CameraModeld parse_calib(std::string_view text) {
  std::map<std::string, std::vector<std::string_view>, std::less<>> entries;
  for (std::string_view line : detail::split_lines(text)) {
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    std::string key(tokens.front());
    if (!key.empty() && key.back() == ':') key.pop_back();
    tokens.erase(tokens.begin());
    entries[key] = std::move(tokens);
  }
  const auto find = [&](std::initializer_list<const char*> names) -> std::pair<std::string, const std::vector<std::string_view>*> {
    for (const char* n : names)
      if (auto it = entries.find(n); it != entries.end()) return {n, &it->second};
    throw Error(ErrorCode::kMissingKey, std::string("calibration key ") + *names.begin() + " not found");
  };

  CameraModeld cam;
  const auto [p_key, p] = find({"P2"});
  cam.projection = read_matrix<3, 4>(*p, p_key);
  const auto [r_key, r] = find({"R_rect", "R0_rect"});
  cam.rectification = read_matrix<3, 3>(*r, r_key);
  require_orthonormal(cam.rectification, r_key);
  const auto [t_key, t] = find({"Tr_velo_cam", "Tr_velo_to_cam"});
  cam.lidar_to_camera = read_matrix<3, 4>(*t, t_key);
  require_orthonormal(cam.lidar_to_camera.leftCols<3>(), t_key);
  return cam;
}

std::string format_calib(const CameraModeld& cam) {
  std::string out;
  out += "P2: " + join_matrix(cam.projection) + "\n";
  out += "R_rect " + join_matrix(cam.rectification) + "\n";
  out += "Tr_velo_cam " + join_matrix(cam.lidar_to_camera) + "\n";
  return out;
}

std::vector<LabelRecord> parse_labels(std::string_view text) {
  std::vector<LabelRecord> out;
  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const auto tokens = detail::split_ws(lines[n]);
    if (tokens.empty()) continue;
    if (tokens.size() != 17 && tokens.size() != 18)
      throw Error(ErrorCode::kMalformedLine, line_error(line_no, "expected 17 or 18 fields, got " +
                                                                     std::to_string(tokens.size())));
    if (tokens[2] == "DontCare") continue;

    const auto num = [&](std::size_t i) {
      const auto v = parse_number<double>(tokens[i]);
      if (!v || !std::isfinite(*v))
        throw Error(ErrorCode::kMalformedLine, line_error(line_no, "field " + std::to_string(i + 1) + " is not a number"));
      return *v;
    };
    const auto integer = [&](std::size_t i) {
      const auto v = parse_number<int>(tokens[i]);
      if (!v) throw Error(ErrorCode::kMalformedLine, line_error(line_no, "field " + std::to_string(i + 1) + " is not an integer"));
      return *v;
    };

    LabelRecord rec;
    rec.frame = integer(0);
    rec.track_id = integer(1);
    rec.type = std::string(tokens[2]);
    rec.truncated = num(3);
    rec.occluded = integer(4);
    rec.alpha = num(5);
    rec.box2d = {num(6), num(7), num(8), num(9)};
    rec.dimensions = Vec3d(num(10), num(11), num(12));
    rec.location = Vec3d(num(13), num(14), num(15));
    rec.rotation_y = num(16);
    if (tokens.size() == 18) rec.score = num(17);
    if (rec.frame < 0) throw Error(ErrorCode::kMalformedLine, line_error(line_no, "negative frame index"));
    if (!(rec.dimensions.array() > 0).all())
      throw Error(ErrorCode::kMalformedLine, line_error(line_no, "dimensions must be positive"));
    const double h = rec.dimensions[0], w = rec.dimensions[1], l = rec.dimensions[2];
    rec.box3d = Box3d(rec.location - Vec3d(0, h / 2, 0), Vec3d(l, w, h), rec.rotation_y);
    out.push_back(std::move(rec));
  }
  return out;
}

LabelRecord make_label(int frame, int track_id, std::string type, const Box3d& box, const Box2d& box2d) {
  LabelRecord r;
  r.frame = frame;
  r.track_id = track_id;
  r.type = std::move(type);
  r.box2d = box2d;
  r.dimensions = Vec3d(box.height(), box.width(), box.length());
  r.location = box.center() + Vec3d(0, box.height() / 2, 0);
  r.rotation_y = box.yaw();
  r.box3d = box;
  return r;
}

std::string format_labels(std::span<const LabelRecord> labels) {
  std::string out;
  for (const LabelRecord& r : labels) {
    const Vec3d& d = r.dimensions;
    const Vec3d& loc = r.location;
    std::ostringstream line;
    line << r.frame << ' ' << r.track_id << ' ' << r.type << ' ' << format_double(r.truncated) << ' ' << r.occluded
         << ' ' << format_double(r.alpha) << ' ' << format_double(r.box2d.u_min) << ' '
         << format_double(r.box2d.v_min) << ' ' << format_double(r.box2d.u_max) << ' '
         << format_double(r.box2d.v_max) << ' ' << format_double(d[0]) << ' ' << format_double(d[1]) << ' '
         << format_double(d[2]) << ' ' << format_double(loc.x()) << ' ' << format_double(loc.y()) << ' '
         << format_double(loc.z()) << ' ' << format_double(r.rotation_y);
    if (r.score) line << ' ' << format_double(*r.score);
    out += line.str();
    out += '\n';
  }
  return out;
}

PointCloudd parse_velodyne(std::span<const unsigned char> bytes) {
  if (bytes.size() % 16 != 0)
    throw Error(ErrorCode::kTruncatedFile, "velodyne data length " + std::to_string(bytes.size()) +
                                               " is not a multiple of 16");
  const Eigen::Index n = static_cast<Eigen::Index>(bytes.size() / 16);
  PointCloudd cloud;
  cloud.points.resize(3, n);
  cloud.intensity.resize(n);
  const auto read_float = [&](std::size_t offset) {
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[offset]) |
                               static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
                               static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
                               static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * 16;
    for (int a = 0; a < 3; ++a) cloud.points(a, i) = read_float(base + 4 * static_cast<std::size_t>(a));
    cloud.intensity[i] = read_float(base + 12);
  }
  return cloud;
}

PointCloudd load_velodyne(const std::filesystem::path& path) {
  const std::string data = read_text(path);
  return parse_velodyne({reinterpret_cast<const unsigned char*>(data.data()), data.size()});
}

void write_velodyne(const std::filesystem::path& path, const PointCloudd& cloud) {
  std::string data;
  data.reserve(static_cast<std::size_t>(cloud.size()) * 16);
  const auto put = [&](double v) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int k = 0; k < 4; ++k) data.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  };
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) put(cloud.points(a, i));
    put(cloud.has_intensity() ? cloud.intensity[i] : 0.0);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::vector<Tracklet> load_kitti_scene(const std::filesystem::path& root, int scene_id,
                                       TrackletDiagnostics* diagnostics) {
  const std::string scene = padded(scene_id, 4);
  const CameraModeld cam = parse_calib(read_text(root / "calib" / (scene + ".txt")));
  const std::vector<LabelRecord> labels = parse_labels(read_text(root / "label_02" / (scene + ".txt")));
  const std::filesystem::path velodyne = root / "velodyne" / scene;
  const CloudLoader loader = [&](int frame) {
    const std::filesystem::path p = velodyne / (padded(frame, 6) + ".bin");
    return std::filesystem::exists(p) ? load_velodyne(p) : PointCloudd{};
  };
  return build_tracklets(scene_id, labels, loader, cam, diagnostics);
}

void write_kitti_scene(const std::filesystem::path& root, int scene_id, std::span<const Tracklet> tracklets) {
  const std::string scene = padded(scene_id, 4);
  std::filesystem::create_directories(root / "calib");
  std::filesystem::create_directories(root / "label_02");
  std::filesystem::create_directories(root / "velodyne" / scene);
  if (tracklets.empty()) throw Error(ErrorCode::kInvalidArgument, "no tracklets to write");

  const CameraModeld& cam = tracklets.front().frames.front().camera;
  {
    std::ofstream out(root / "calib" / (scene + ".txt"));
    out << format_calib(cam);
  }
  std::vector<LabelRecord> labels;
  std::map<int, PointCloudd> scans;
  for (const Tracklet& t : tracklets) {
    for (const FrameRecord& f : t.frames) {
      if (!(f.camera == cam)) throw Error(ErrorCode::kInvalidArgument, "camera differs within a scene");
      // Scans are stored in the LiDAR frame, merged across tracklets.
      PointCloudd lidar = f.points();
      for (Eigen::Index i = 0; i < lidar.size(); ++i) lidar.points.col(i) = cam.rect_to_lidar(lidar.points.col(i));
      auto [it, inserted] = scans.emplace(f.frame_index, std::move(lidar));
      if (!inserted && it->second.size() != f.points().size())
        throw Error(ErrorCode::kInvalidArgument, "tracklets disagree on the scan of frame " +
                                                     std::to_string(f.frame_index));
      if (!f.gt_box3d) continue;
      labels.push_back(make_label(f.frame_index, t.track_id, to_string(t.category), *f.gt_box3d,
                                  f.gt_box2d.value_or(Box2d{})));
    }
  }
  std::stable_sort(labels.begin(), labels.end(),
                   [](const LabelRecord& a, const LabelRecord& b) { return a.frame < b.frame; });
  {
    std::ofstream out(root / "label_02" / (scene + ".txt"));
    out << format_labels(labels);
  }
  for (const auto& [frame, cloud] : scans)
    write_velodyne(root / "velodyne" / scene / (padded(frame, 6) + ".bin"), cloud);
}

}  // namespace fsiam
