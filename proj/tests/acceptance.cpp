// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "fsiam/commands.hpp"
#include "fsiam/losses.hpp"
#include "oracles.hpp"

using namespace fsiam;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

oracle::OrientedBox as_oracle(const Box3d& b) {
  return {b.center(), b.length(), b.width(), b.height(), b.yaw()};
}

Box2d project_box(const CameraModeld& cam, const Box3d& b) {
  Box2d out{1e300, 1e300, -1e300, -1e300};
  for (const auto& c : box3d_corners(b)) {
    const double u = cam.projection(0, 0) * c.x() / c.z() + cam.projection(0, 2);
    const double v = cam.projection(1, 1) * c.y() / c.z() + cam.projection(1, 2);
    out.u_min = std::min(out.u_min, u);
    out.u_max = std::max(out.u_max, u);
    out.v_min = std::min(out.v_min, v);
    out.v_max = std::max(out.v_max, v);
  }
  return out;
}

RunConfig synthetic_config() {
  RunConfig c;
  c.data.kind = DataKind::kSynthetic;
  c.data.synth.frames = 50;
  c.data.synth_tracklets = 4;
  c.seed = 2024;
  return c;
}

Outcome geometry_oracles() {
  Outcome o;
  const CameraModeld cam = CameraModeld::pinhole(700, 700, 600, 180);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u0(300, 800), w(30, 200), v0(100, 200), h(20, 120);
  std::uniform_real_distribution<double> near(5, 15), depth(3, 10), yaw(-kPi, kPi), sz(1, 4), off(-1.5, 1.5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    oracle::PinholeFrustum fr{700, 600, 180, 0, 0, 0, 0, 0, 0};
    fr.u0 = u0(rng);
    fr.u1 = fr.u0 + w(rng);
    fr.v0 = v0(rng);
    fr.v1 = fr.v0 + h(rng);
    fr.near = near(rng);
    fr.far = fr.near + depth(rng);
    const Frustum frustum = frustum_from_box2d(cam, Box2d{fr.u0, fr.v0, fr.u1, fr.v1}, fr.near, fr.far);

    const auto [lo, hi] = fr.bounds();
    const Vec3d c = (lo + hi) / 2 + Vec3d(off(rng), off(rng) / 3, off(rng));
    const Box3d box(c, Vec3d(sz(rng), sz(rng), sz(rng)), yaw(rng));
    const auto ob = as_oracle(box);
    const Vec3d blo = lo.cwiseMin(box.center() - Vec3d::Constant(ob.radius()));
    const Vec3d bhi = hi.cwiseMax(box.center() + Vec3d::Constant(ob.radius()));
    const double mc = oracle::mc_iou([&](const Vec3d& p) { return fr.contains(p); },
                                     [&](const Vec3d& p) { return ob.contains(p); }, blo, bhi, 1000000,
                                     1000 + trial);
    worst = std::max(worst, std::abs(polytope_box_iou(frustum.polytope, box) - mc));
  }
  o.check(worst <= 1e-2, fmt("polytope/box IoU off Monte Carlo by %.4g", worst));

  const Box3d unit(Vec3d::Zero(), Vec3d(1, 1, 1), 0);
  const double same = box3d_iou(unit, unit);
  const double disjoint = box3d_iou(unit, Box3d(Vec3d(5, 0, 0), Vec3d(1, 1, 1), 0));
  const double half = box3d_iou(unit, Box3d(Vec3d(0.5, 0, 0), Vec3d(1, 1, 1), 0));
  o.check(std::abs(same - 1) <= 1e-9, fmt("identity IoU %.12g", same));
  o.check(std::abs(disjoint) <= 1e-9, fmt("disjoint IoU %.12g", disjoint));
  o.check(std::abs(half - 1.0 / 3.0) <= 1e-6, fmt("half-shift IoU %.12g", half));
  if (o.pass) o.detail = fmt("100 pairs, max |exact - MC| = %.2e", worst);
  return o;
}

Outcome threshold_semantics() {
  Outcome o;
  const CameraModeld cam = CameraModeld::pinhole(721.5377, 721.5377, 609.5593, 172.854);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> x(-6, 6), z(6, 45), yaw(-kPi, kPi), unit(0, 1);
  std::uniform_real_distribution<double> jitter(-60, 60);
  int cases = 0, positive = 0;
  while (cases < 1000) {
    const Box3d tmpl(Vec3d(x(rng), 1.0, z(rng)), Vec3d(1 + 3 * unit(rng), 0.6 + unit(rng), 1.4 + 0.6 * unit(rng)),
                     yaw(rng));
    std::optional<Box2d> box2d = project_box(cam, tmpl);
    const double r = unit(rng);
    if (r < 0.1) {
      box2d.reset();
    } else if (r < 0.9) {
      const double scale = r < 0.5 ? 0.2 : 3.0;
      box2d->u_min += scale * jitter(rng);
      box2d->u_max += scale * jitter(rng);
      box2d->v_min += scale * jitter(rng) / 3;
      box2d->v_max += scale * jitter(rng) / 3;
      if (!box2d->valid()) continue;
    }
    ++cases;
    ProposalConfig cfg;
    bool accepted_higher = false;
    for (int i = 10; i >= 0; --i) {
      cfg.iou_threshold = i / 10.0;
      const ProposalOutcome out = propose(cam, box2d, tmpl, cfg);
      const bool accepted = out.branch == Branch::kFrustumAccepted;
      if (i == 10) o.check(!accepted, "threshold 1 accepted a frustum");
      if (i == 0 && out.validation_iou > 0) {
        ++positive;
        o.check(accepted, fmt("threshold 0 fell back with validation IoU %.6g", out.validation_iou));
      }
      o.check(!accepted_higher || accepted, fmt("branch not monotone at threshold %.1f", cfg.iou_threshold));
      accepted_higher = accepted;
    }
  }

  RunConfig c = synthetic_config();
  c.tracker.proposal.iou_threshold = 1.0;
  c.box2d.sigma = 2.0;
  const auto tracklets = load_tracklets(c);
  int frames = 0;
  for (const auto& rs : run_tracklets(c, tracklets))
    for (const FrameResult& r : rs) {
      ++frames;
      o.check(r.branch == Branch::kFallback, "threshold 1 tracking run produced a frustum frame");
    }
  if (o.pass)
    o.detail = std::to_string(cases) + " cases (" + std::to_string(positive) + " with validation IoU > 0), " +
               std::to_string(frames) + " tracked frames at threshold 1";
  return o;
}

Outcome candidate_accounting() {
  Outcome o;
  RunConfig c = synthetic_config();
  c.tracker.mode = TemplateMode::kPreviousPrediction;
  c.tracker.proposal.n_candidates = 32;
  c.box2d.sigma = 3.0;
  c.box2d.dropout = 0.2;
  const auto tracklets = load_tracklets(c);
  const auto scorer = make_scorer(c.tracker.scorer, c.tracker.resolution);
  int frustum = 0, fallback = 0;
  for (const Tracklet& t : tracklets) {
    const Box2dStream stream = box2d_stream_for(c, t);
    TrackerState state = init(t, c.tracker);
    for (std::size_t i = 1; i < t.frames.size(); ++i) {
      std::optional<Box2d> box2d;
      if (stream[i]) box2d = stream[i]->box;
      const Box3d tmpl = state.template_box;
      const ProposalOutcome p = propose(t.frames[i].camera, box2d, tmpl, c.tracker.proposal);
      const FrameResult r = step(state, t.frames[i], box2d, c.tracker, *scorer);
      const std::size_t expected = r.branch == Branch::kFrustumAccepted ? 32u : 147u;
      (r.branch == Branch::kFrustumAccepted ? frustum : fallback) += 1;
      o.check(p.branch == r.branch, "replayed proposal disagrees with the tracker");
      o.check(static_cast<std::size_t>(r.candidate_count) == expected && p.candidates.size() == expected,
              "candidate count " + std::to_string(r.candidate_count) + " on the " + to_string(r.branch) + " branch");
      for (const Box3d& b : p.candidates) o.check(b.size() == tmpl.size(), "candidate size differs from template");
    }
  }
  o.check(frustum > 0 && fallback > 0, "run did not exercise both branches");
  if (o.pass)
    o.detail = std::to_string(frustum) + " frustum frames x 32, " + std::to_string(fallback) + " fallback frames x 147";
  return o;
}

Outcome oracle_end_to_end() {
  Outcome o;
  RunConfig c = synthetic_config();
  c.tracker.mode = TemplateMode::kGroundTruth;
  c.tracker.scorer = "oracle";
  const TrackOutput clean = cmd_track(c);
  o.check(clean.report.overall.success >= 99, fmt("clean success %.4f", clean.report.overall.success));
  o.check(clean.report.overall.precision >= 99, fmt("clean precision %.4f", clean.report.overall.precision));

  c.box2d.dropout = 0.3;
  const auto tracklets = load_tracklets(c);
  const auto results = run_tracklets(c, tracklets);
  std::vector<TrackletSeries> series;
  int dropped = 0;
  for (std::size_t t = 0; t < tracklets.size(); ++t) {
    const Box2dStream stream = box2d_stream_for(c, tracklets[t]);
    o.check(results[t].size() + 1 == tracklets[t].frames.size(), "tracklet did not complete");
    for (std::size_t i = 0; i < results[t].size(); ++i)
      if (!stream[i + 1]) {
        ++dropped;
        o.check(results[t][i].branch == Branch::kFallback, "dropped frame did not fall back");
      }
    series.push_back({tracklets[t].scene_id, tracklets[t].track_id, tracklets[t].category, ope_series(results[t])});
  }
  const OpeReport report = aggregate_report(series, c.ope);
  o.check(dropped > 0, "dropout produced no dropped frames");
  o.check(report.overall.success >= 90, fmt("dropout success %.4f", report.overall.success));
  if (o.pass)
    o.detail = fmt("clean %.2f/%.2f, dropout success %.2f", clean.report.overall.success,
                   clean.report.overall.precision, report.overall.success) +
               ", " + std::to_string(dropped) + " dropped frames all fallback";
  return o;
}

Outcome efficiency() {
  Outcome o;
  RunConfig frustum = synthetic_config();
  frustum.tracker.mode = TemplateMode::kPreviousPrediction;
  frustum.tracker.proposal.n_candidates = 32;
  frustum.tracker.proposal.iou_threshold = 0.0;
  RunConfig fallback = frustum;
  fallback.tracker.proposal.iou_threshold = 1.0;

  constexpr int kFrames = 196;
  double best_frustum = 1e300, best_fallback = 1e300;
  BenchReport a, b;
  for (int rep = 0; rep < 3; ++rep) {
    a = cmd_bench(frustum, kFrames);
    b = cmd_bench(fallback, kFrames);
    best_frustum = std::min(best_frustum, std::chrono::duration<double>(a.scoring).count());
    best_fallback = std::min(best_fallback, std::chrono::duration<double>(b.scoring).count());
  }
  const double ratio = best_frustum / best_fallback;
  o.check(b.fallback_frames == kFrames, "fallback-only run accepted a frustum");
  o.check(a.frustum_frames > kFrames / 2, "frustum run mostly fell back");
  o.check(ratio < 0.5, fmt("scoring time ratio %.3f", ratio));
  if (o.pass)
    o.detail = fmt("scoring %.1f ms vs %.1f ms, ratio %.3f", best_frustum * 1e3, best_fallback * 1e3, ratio);
  return o;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

Outcome loss_suite() {
  Outcome o;
  Eigen::VectorXd p(3), r(2), x(2), y(2);
  p << 0.2, 0.3, 0.5;
  r << -3.0, 0.5;
  x << 0, 0;
  y << 2, 1;
  o.check(std::abs(cross_entropy(p, 0).loss + std::log(0.2)) <= 1e-15, "cross entropy hand value");
  o.check(smooth_l1(r).loss == 2.5 + 0.125, "smooth L1 hand value");
  o.check(mse_tracking(x, y).loss == 2.5, "MSE hand value");
  o.check(l2_completion(x, y).loss == 5.0, "L2 hand value");

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3), pu(0.05, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 9;
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    worst = std::max(worst, relative_error(smooth_l1(a).gradient,
                                           oracle::finite_difference([](const auto& v) { return smooth_l1(v).loss; },
                                                                     a, 1e-5)));
    worst = std::max(worst, relative_error(mse_tracking(a, b).gradient,
                                           oracle::finite_difference(
                                               [&](const auto& v) { return mse_tracking(v, b).loss; }, a, 1e-5)));
    worst = std::max(worst, relative_error(l2_completion(a, b).gradient,
                                           oracle::finite_difference(
                                               [&](const auto& v) { return l2_completion(v, b).loss; }, a, 1e-5)));
    const int m = 2 + trial % 5;
    Eigen::VectorXd q(m);
    for (int i = 0; i < m; ++i) q[i] = pu(rng);
    q /= q.sum();
    const int target = trial % m;
    worst = std::max(worst, relative_error(cross_entropy(q, target).gradient,
                                           oracle::finite_difference(
                                               [&](const auto& v) { return cross_entropy(v, target).loss; }, q,
                                               1e-7)));
  }
  o.check(worst < 1e-4, fmt("gradient relative error %.3g", worst));
  const double total = total_loss({1, 1, 1, 1});
  o.check(std::abs(total - 3.200001) <= 1e-12, fmt("total loss %.15g", total));
  if (o.pass) o.detail = fmt("max gradient relative error %.2e, total loss %.9f", worst, total);
  return o;
}

Outcome ope_suite() {
  Outcome o;
  const OpeConfig cfg;
  const std::vector<Box3d> boxes(7, Box3d(Vec3d(1, 1, 10), Vec3d(4, 1.5, 1.6), 0.2));
  const OpeSeries perfect = ope_series(boxes, boxes);
  // Overlap 1 clears thresholds 0..0.99, error 0 clears 0.02..2: 100 of 101 each.
  const double perfect_expected = 100.0 * 100.0 / 101.0;
  o.check(std::abs(success_auc(perfect.overlaps, cfg) - perfect_expected) <= 1e-9, "perfect-track success");
  o.check(std::abs(precision_auc(perfect.errors, cfg) - perfect_expected) <= 1e-9, "perfect-track precision");

  // 0.505 clears thresholds 0.00..0.50 (51); 0.73 m is below 0.74..2.00 (64).
  const std::vector<double> overlap{0.505}, error{0.73};
  o.check(std::abs(success_auc(overlap, cfg) - 5100.0 / 101.0) <= 1e-9, "single-frame success");
  o.check(std::abs(precision_auc(error, cfg) - 6400.0 / 101.0) <= 1e-9, "single-frame precision");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1), e(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40;
    std::vector<double> ov(n), er(n);
    for (int i = 0; i < n; ++i) {
      ov[i] = u(rng);
      er[i] = e(rng);
    }
    const double s = success_auc(ov, cfg), p = precision_auc(er, cfg);
    auto ov2 = ov, er2 = er;
    for (int i = 0; i < n; ++i) {
      ov2[i] = std::min(1.0, ov2[i] + 0.3 * u(rng));
      er2[i] = std::max(0.0, er2[i] - 0.5 * u(rng));
    }
    o.check(success_auc(ov2, cfg) >= s, "success not monotone in overlap");
    o.check(precision_auc(er2, cfg) >= p, "precision not monotone in error");
    std::shuffle(ov.begin(), ov.end(), rng);
    std::shuffle(er.begin(), er.end(), rng);
    o.check(success_auc(ov, cfg) == s && precision_auc(er, cfg) == p, "metric depends on frame order");
    o.check(s >= 0 && s <= 100 && p >= 0 && p <= 100, "metric out of [0, 100]");
  }
  if (o.pass) o.detail = "hand cases exact, 200 randomized series";
  return o;
}

Outcome ingestion() {
  Outcome o;
  const std::vector<unsigned char> bytes = {
      0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x20, 0xC0, 0x00, 0x00, 0x00, 0x3F, 0x00, 0x00, 0x40, 0x40,
      0x00, 0x00, 0x24, 0x41, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0xBF, 0x00, 0x00, 0x00, 0x00};
  const PointCloudd cloud = parse_velodyne(bytes);
  o.check(cloud.size() == 2 && cloud.points.col(0) == Vec3d(1.0, -2.5, 0.5) && cloud.intensity[0] == 3.0 &&
              cloud.points.col(1) == Vec3d(10.25, 0.0, -1.0) && cloud.intensity[1] == 0.0,
          "velodyne fixture");

  const CameraModeld cam = parse_calib(
      "P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 7.215377e+02 1.728540e+02 "
      "2.163791e-01 0.000000e+00 0.000000e+00 1.000000e+00 2.745884e-03\n"
      "R_rect 9.999128e-01 1.009263e-02 -8.511932e-03 -1.012729e-02 9.999406e-01 -4.037671e-03 "
      "8.470675e-03 4.123522e-03 9.999556e-01\n"
      "Tr_velo_cam 6.927964e-03 -9.999722e-01 -2.757829e-03 -2.457729e-02 -1.162982e-03 2.749836e-03 "
      "-9.999955e-01 -6.127237e-02 9.999753e-01 6.931141e-03 -1.143899e-03 -3.321029e-01\n");
  Mat34d p2, tr;
  Mat3d rr;
  p2 << 721.5377, 0, 609.5593, 44.85728, 0, 721.5377, 172.854, 0.2163791, 0, 0, 1, 0.002745884;
  rr << 0.9999128, 0.01009263, -0.008511932, -0.01012729, 0.9999406, -0.004037671, 0.008470675, 0.004123522,
      0.9999556;
  tr << 0.006927964, -0.9999722, -0.002757829, -0.02457729, -0.001162982, 0.002749836, -0.9999955, -0.06127237,
      0.9999753, 0.006931141, -0.001143899, -0.3321029;
  o.check(cam.projection == p2 && cam.rectification == rr && cam.lidar_to_camera == tr, "calibration entries");

  const auto labels = parse_labels(
      "0 -1 DontCare -1 -1 -10 219.31 188.49 245.50 218.56 -1000 -1000 -1000 -10 -1 -1 -1\n"
      "0 2 Pedestrian 0 0 -2.523309 1106.137292 166.576807 1204.470628 323.876144 1.714062 0.767881 "
      "0.972283 6.301919 1.652419 8.455685 -1.900245\n");
  const bool one = labels.size() == 1;
  o.check(one, "label count");
  if (one) {
    const LabelRecord& l = labels[0];
    const double h = 1.714062;
    o.check(l.frame == 0 && l.track_id == 2 && l.type == "Pedestrian" && l.alpha == -2.523309, "label header");
    o.check((l.box2d == Box2d{1106.137292, 166.576807, 1204.470628, 323.876144}), "label 2D box");
    o.check(l.box3d.center() == Vec3d(6.301919, 1.652419 - h / 2, 8.455685), "label box center");
    o.check(l.box3d.size() == Vec3d(0.972283, 0.767881, h) && l.box3d.yaw() == -1.900245, "label box size/yaw");
  }

  for (int s = 0; s <= 20; ++s) {
    const Split want = s <= 16 ? Split::kTrain : s <= 18 ? Split::kVal : Split::kTest;
    o.check(split_scenes(s) == want, "split of scene " + std::to_string(s));
  }
  if (o.pass) o.detail = "velodyne, calib, labels and scene splits exact";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;  // 0: no runtime bound
  };
  const Criterion criteria[] = {
      {1, "geometry oracle suite", geometry_oracles, 120},
      {2, "threshold semantics", threshold_semantics, 60},
      {3, "candidate accounting", candidate_accounting, 0},
      {4, "oracle end-to-end", oracle_end_to_end, 60},
      {5, "efficiency axis", efficiency, 0},
      {6, "loss suite", loss_suite, 0},
      {7, "OPE metric suite", ope_suite, 0},
      {8, "ingestion", ingestion, 0},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.budget_s > 0) o.check(secs < c.budget_s, fmt("took %.1f s, budget %.0f s", secs, c.budget_s));
    failed += !o.pass;
    std::printf("criterion %d %-24s %s  %s (%.1f s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
