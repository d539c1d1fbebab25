#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>

#include "fsiam/dataio.hpp"
#include "parse_util.hpp"

namespace fsiam {

namespace {

std::map<int, std::size_t> frame_positions(const Tracklet& tracklet) {
  std::map<int, std::size_t> out;
  for (std::size_t i = 0; i < tracklet.frames.size(); ++i) out.emplace(tracklet.frames[i].frame_index, i);
  return out;
}

}  // namespace

Box2dStream parse_box2d_stream(std::string_view text, const Tracklet& tracklet) {
  const auto positions = frame_positions(tracklet);
  Box2dStream stream(tracklet.frames.size());
  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = detail::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(n + 1) + ": ";

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string_view::npos; start = comma + 1)
      fields.push_back(detail::trim(line.substr(start, comma - start)));
    fields.push_back(detail::trim(line.substr(start)));
    if (fields.size() != 6) throw Error(ErrorCode::kMalformedLine, where + "expected 6 comma-separated fields");

    const auto frame = detail::parse_number<int>(fields[0]);
    if (!frame) throw Error(ErrorCode::kMalformedLine, where + "frame index is not an integer");
    double v[5];
    for (int i = 0; i < 5; ++i) {
      const auto x = detail::parse_number<double>(fields[static_cast<std::size_t>(i + 1)]);
      if (!x || !std::isfinite(*x)) throw Error(ErrorCode::kMalformedLine, where + "non-numeric field");
      v[i] = *x;
    }
    const Box2dObservation obs{{v[0], v[1], v[2], v[3]}, v[4]};
    if (!obs.box.valid()) throw Error(ErrorCode::kMalformedLine, where + "box must have u_min < u_max and v_min < v_max");
    if (!(obs.confidence >= 0 && obs.confidence <= 1))
      throw Error(ErrorCode::kMalformedLine, where + "confidence must be in [0, 1]");

    const auto it = positions.find(*frame);
    if (it == positions.end())
      throw Error(ErrorCode::kFrameMismatch, where + "frame " + std::to_string(*frame) + " is not part of the tracklet");
    if (stream[it->second]) throw Error(ErrorCode::kFrameMismatch, where + "frame " + std::to_string(*frame) + " repeated");
    stream[it->second] = obs;
  }
  return stream;
}

Box2dStream load_box2d_stream(const std::filesystem::path& path, const Tracklet& tracklet) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  return parse_box2d_stream(text, tracklet);
}

std::string format_box2d_stream(const Box2dStream& stream, const Tracklet& tracklet) {
  if (stream.size() != tracklet.frames.size())
    throw Error(ErrorCode::kFrameMismatch, "stream length differs from the tracklet");
  std::string out;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!stream[i]) continue;
    const Box2dObservation& o = *stream[i];
    out += std::to_string(tracklet.frames[i].frame_index);
    for (double v : {o.box.u_min, o.box.v_min, o.box.u_max, o.box.v_max, o.confidence})
      out += ',' + detail::format_double(v);
    out += '\n';
  }
  return out;
}

Box2dStream simulate_box2d_stream(const Tracklet& tracklet, double sigma, double dropout, std::uint64_t seed) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  if (!(dropout >= 0 && dropout <= 1)) throw Error(ErrorCode::kInvalidArgument, "dropout must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Box2dStream stream(tracklet.frames.size());
  for (std::size_t i = 0; i < tracklet.frames.size(); ++i) {
    // Draw the same numbers for every frame so one frame's outcome never
    // shifts the noise of the next.
    const bool dropped = coin(rng) < dropout;
    double e[4];
    for (double& x : e) x = noise(rng);
    const auto& gt = tracklet.frames[i].gt_box2d;
    if (dropped || !gt) continue;
    const double u0 = gt->u_min + sigma * e[0], v0 = gt->v_min + sigma * e[1];
    const double u1 = gt->u_max + sigma * e[2], v1 = gt->v_max + sigma * e[3];
    const Box2d box{std::min(u0, u1), std::min(v0, v1), std::max(u0, u1), std::max(v0, v1)};
    if (box.valid()) stream[i] = Box2dObservation{box, 1.0};
  }
  return stream;
}

}  // namespace fsiam
