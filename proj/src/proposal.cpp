#include "fsiam/proposal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fsiam {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kMaxLatticeLevel = 4096;

double deg(double d) { return d * std::numbers::pi / 180.0; }

std::vector<double> yaw_or_zero(const std::vector<double>& offsets) {
  return offsets.empty() ? std::vector<double>{0.0} : offsets;
}

/// Indices of `offsets` sorted by |offset|, stable.
std::vector<std::size_t> yaw_priority(const std::vector<double>& offsets) {
  std::vector<std::size_t> idx(offsets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(offsets[a]) < std::abs(offsets[b]);
  });
  return idx;
}

struct LatticePoint {
  long i;
  long j;
  Vec3d p;
};

}  // namespace

const char* to_string(Branch b) {
  return b == Branch::kFrustumAccepted ? "FrustumAccepted" : "Fallback";
}

std::vector<double> ProposalConfig::default_yaw_offsets() { return {deg(-5), 0.0, deg(5)}; }

void ProposalConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(iou_threshold >= 0 && iou_threshold <= 1)) fail("iou_threshold must be in [0, 1]");
  if (n_candidates < 1) fail("n_candidates must be >= 1");
  if (fallback_count < 1) fail("fallback_count must be >= 1");
  if (depth_margin && !(*depth_margin > 0)) fail("depth_margin must be > 0");
  if (!(fallback_extent > 0)) fail("fallback_extent must be > 0");
  if (!(search_space_scale > 0)) fail("search_space_scale must be > 0");
  if (!(frustum_near > 0 && frustum_near < frustum_far)) fail("need 0 < frustum_near < frustum_far");
  for (double y : yaw_offsets)
    if (!std::isfinite(y)) fail("yaw offsets must be finite");
}

double ProposalConfig::margin_for(const Box3d& tmpl) const {
  return depth_margin ? *depth_margin : tmpl.half_diagonal() + 1.0;
}

Frustum frustum_from_box2d(const CameraModeld& cam, const Box2d& box, double near, double far) {
  if (!box.valid()) throw Error(ErrorCode::kDegenerateBox, "2D box has no area");
  if (!(near > 0)) throw Error(ErrorCode::kBehindCamera, "near plane must be in front of the camera");
  if (!(near < far)) throw Error(ErrorCode::kInvalidArgument, "near must be < far");

  const std::array<std::array<double, 2>, 4> px = {{{box.u_min, box.v_min},
                                                     {box.u_max, box.v_min},
                                                     {box.u_max, box.v_max},
                                                     {box.u_min, box.v_max}}};
  std::array<Vec3d, 4> dirs;
  Vec3d apex = Vec3d::Zero();
  for (int k = 0; k < 4; ++k) {
    const auto ray = pixel_ray(cam, px[k][0], px[k][1]);
    dirs[k] = ray.direction;
    apex = ray.origin;
  }
  const double v_mid = (box.v_min + box.v_max) / 2;
  const auto mid = pixel_ray(cam, (box.u_min + box.u_max) / 2, v_mid);
  auto horizontal = [](Vec3d d) {
    d.y() = 0;
    return d.normalized();
  };
  const Vec3d left = horizontal(pixel_ray(cam, box.u_min, v_mid).direction);
  const Vec3d right = horizontal(pixel_ray(cam, box.u_max, v_mid).direction);

  Frustum f;
  f.apex = apex;
  f.central_ray = (left + right).normalized();
  const Vec3d m3 = cam.projection.row(2).head<3>().transpose();
  const double scale = m3.norm();
  f.depth_normal = m3;
  f.depth_offset = cam.projection(2, 3);

  std::vector<HalfSpaced> planes;
  for (int k = 0; k < 4; ++k) {
    Vec3d n = dirs[k].cross(dirs[(k + 1) % 4]);
    if (n.dot(mid.direction) > 0) n = -n;
    planes.push_back(HalfSpaced::through(n, apex));
  }
  // near <= depth(p) <= far
  planes.push_back({-m3 / scale, (f.depth_offset - near) / scale});
  planes.push_back({m3 / scale, (far - f.depth_offset) / scale});
  f.polytope = ConvexPolytoped::from_half_spaces(std::move(planes));
  return f;
}

ConvexPolytoped crop_frustum_by_depth(const Frustum& frustum, const Box3d& tmpl, double margin) {
  if (!(margin > 0)) throw Error(ErrorCode::kInvalidArgument, "margin must be > 0");
  const double d = frustum.depth(tmpl.center());
  const double scale = frustum.depth_normal.norm();
  const Vec3d n = frustum.depth_normal / scale;
  std::vector<HalfSpaced> slab = {{-n, (frustum.depth_offset - (d - margin)) / scale},
                                  {n, ((d + margin) - frustum.depth_offset) / scale}};
  return clip_polytope(frustum.polytope, slab);
}

Validation validate(const ConvexPolytoped& cropped, const Box3d& tmpl, double threshold) {
  if (!(threshold >= 0 && threshold <= 1))
    throw Error(ErrorCode::kInvalidArgument, "threshold must be in [0, 1]");
  Validation v;
  v.iou = cropped.empty() ? 0.0 : polytope_box_iou(cropped, tmpl);
  v.branch = v.iou > threshold ? Branch::kFrustumAccepted : Branch::kFallback;
  return v;
}

ConvexPolytoped intersection_search_space(const ConvexPolytoped& cropped, const Box3d& tmpl,
                                          double template_scale) {
  const Box3d region = template_scale == 1.0 ? tmpl : tmpl.scaled(template_scale);
  ConvexPolytoped out = clip_polytope(cropped, box3d_half_spaces(region));
  if (out.empty())
    throw Error(ErrorCode::kEmptyResult, "frustum and template do not intersect");
  return out;
}

std::vector<Box3d> generate_candidates(const ConvexPolytoped& space, const Box3d& tmpl, int count,
                                       const std::vector<double>& yaw_offsets) {
  if (space.empty()) throw Error(ErrorCode::kEmptyResult, "search space is empty");
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  const std::vector<double> yaws = yaw_or_zero(yaw_offsets);
  const auto k = static_cast<int>(yaws.size());
  const int n_centers = (count + k - 1) / k;
  const Vec3d c = space.centroid();

  std::vector<Box3d> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n_centers == 1) {
    for (std::size_t idx : yaw_priority(yaws)) {
      if (static_cast<int>(out.size()) == count) break;
      out.emplace_back(c, tmpl.size(), tmpl.yaw() + yaws[idx]);
    }
    return out;
  }

  const auto bounds = space.bounds();
  const double hx = std::max(bounds.max().x() - c.x(), c.x() - bounds.min().x());
  const double hz = std::max(bounds.max().z() - c.z(), c.z() - bounds.min().z());
  const double reach = std::max(hx, hz);

  std::vector<LatticePoint> inside;
  for (int level = 1; level <= kMaxLatticeLevel; ++level) {
    const double step = reach / level;
    const long nx = static_cast<long>(std::ceil(hx / step));
    const long nz = static_cast<long>(std::ceil(hz / step));
    inside.clear();
    for (long i = -nx; i <= nx; ++i)
      for (long j = -nz; j <= nz; ++j) {
        const Vec3d p(c.x() + static_cast<double>(i) * step, c.y(), c.z() + static_cast<double>(j) * step);
        if (space.contains(p)) inside.push_back({i, j, p});
      }
    if (static_cast<int>(inside.size()) >= n_centers) break;
  }
  if (static_cast<int>(inside.size()) < n_centers)
    throw Error(ErrorCode::kEmptyResult, "search space too thin to place candidates");

  // Keep the n_centers lattice points nearest the centroid; ties resolved by
  // lattice order, which the stable sort preserves.
  std::stable_sort(inside.begin(), inside.end(), [](const LatticePoint& a, const LatticePoint& b) {
    return a.i * a.i + a.j * a.j < b.i * b.i + b.j * b.j;
  });
  inside.resize(static_cast<std::size_t>(n_centers));
  std::sort(inside.begin(), inside.end(), [](const LatticePoint& a, const LatticePoint& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  for (const auto& lp : inside)
    for (double dy : yaws) out.emplace_back(lp.p, tmpl.size(), tmpl.yaw() + dy);

  // Trim the surplus yaw slots when count is not a multiple of k: drop the
  // largest-|offset| yaws from the outermost centers first.
  if (static_cast<int>(out.size()) > count) {
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    const auto prio = yaw_priority(yaws);
    std::vector<int> yaw_rank(yaws.size());
    for (std::size_t r = 0; r < prio.size(); ++r) yaw_rank[prio[r]] = static_cast<int>(r);
    auto dist2 = [&](std::size_t o) {
      const auto& lp = inside[o / yaws.size()];
      return lp.i * lp.i + lp.j * lp.j;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const int ra = yaw_rank[a % yaws.size()], rb = yaw_rank[b % yaws.size()];
      if (ra != rb) return ra < rb;
      return dist2(a) < dist2(b);
    });
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
    std::vector<Box3d> trimmed;
    trimmed.reserve(order.size());
    for (std::size_t o : order) trimmed.push_back(out[o]);
    out = std::move(trimmed);
  }
  return out;
}

std::vector<Box3d> fallback_candidates(const Box3d& previous, int count,
                                       const std::vector<double>& yaw_offsets, double extent) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  const std::vector<double> yaws = yaw_or_zero(yaw_offsets);
  const auto k = static_cast<long>(yaws.size());
  long g = 1;
  while (g * g * k < count) g += 2;
  const long half = g / 2;
  const double step = half == 0 ? 0.0 : extent * previous.width() / static_cast<double>(half);

  struct Slot {
    long i, j;
    std::size_t yaw;
  };
  std::vector<Slot> slots;
  for (long i = -half; i <= half; ++i)
    for (long j = -half; j <= half; ++j)
      for (std::size_t y = 0; y < yaws.size(); ++y) slots.push_back({i, j, y});

  if (static_cast<long>(slots.size()) > count) {
    const auto prio = yaw_priority(yaws);
    std::vector<int> yaw_rank(yaws.size());
    for (std::size_t r = 0; r < prio.size(); ++r) yaw_rank[prio[r]] = static_cast<int>(r);
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const long da = slots[a].i * slots[a].i + slots[a].j * slots[a].j;
      const long db = slots[b].i * slots[b].i + slots[b].j * slots[b].j;
      if (da != db) return da < db;
      return yaw_rank[slots[a].yaw] < yaw_rank[slots[b].yaw];
    });
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
    std::vector<Slot> kept;
    for (std::size_t o : order) kept.push_back(slots[o]);
    slots = std::move(kept);
  }

  std::vector<Box3d> out;
  out.reserve(slots.size());
  for (const Slot& s : slots) {
    const Vec3d c = previous.center() + Vec3d(static_cast<double>(s.i) * step, 0.0,
                                              static_cast<double>(s.j) * step);
    // Exact copy for the zero offset so the center candidate equals `previous`.
    if (s.i == 0 && s.j == 0 && yaws[s.yaw] == 0.0)
      out.push_back(previous);
    else
      out.emplace_back(c, previous.size(), previous.yaw() + yaws[s.yaw]);
  }
  return out;
}

RigidTransformd center_view_rotation(const Frustum& frustum) {
  return center_view_rotation(frustum.central_ray);
}

ProposalOutcome propose(const CameraModeld& cam, const std::optional<Box2d>& box2d, const Box3d& tmpl,
                        const ProposalConfig& config) {
  const auto start = Clock::now();
  ProposalOutcome out;
  if (box2d && box2d->valid()) {
    try {
      const Frustum frustum = frustum_from_box2d(cam, *box2d, config.frustum_near, config.frustum_far);
      const ConvexPolytoped cropped = crop_frustum_by_depth(frustum, tmpl, config.margin_for(tmpl));
      const Validation v = validate(cropped, tmpl, config.iou_threshold);
      out.validation_iou = v.iou;
      if (v.branch == Branch::kFrustumAccepted) {
        out.search_space = intersection_search_space(cropped, tmpl, config.search_space_scale);
        out.candidates = generate_candidates(out.search_space, tmpl, config.n_candidates, config.yaw_offsets);
        out.branch = Branch::kFrustumAccepted;
      }
    } catch (const Error&) {
      out.inconsistent = out.validation_iou > config.iou_threshold;
      out.search_space = ConvexPolytoped();
      out.candidates.clear();
      out.branch = Branch::kFallback;
    }
  }
  if (out.branch == Branch::kFallback)
    out.candidates = fallback_candidates(tmpl, config.fallback_count, config.yaw_offsets, config.fallback_extent);
  out.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return out;
}

}  // namespace fsiam
