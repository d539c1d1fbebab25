#pragma once

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "fsiam/geom3d/types.hpp"

namespace fsiam {

/// Closed half-space {p : normal . p <= offset} with a unit normal.
template <typename Scalar>
struct HalfSpace {
  Vec3<Scalar> normal;
  Scalar offset;

  static HalfSpace through(const Vec3<Scalar>& normal, const Vec3<Scalar>& point) {
    const Vec3<Scalar> n = normal.normalized();
    return {n, n.dot(point)};
  }

  Scalar signed_distance(const Vec3<Scalar>& p) const { return normal.dot(p) - offset; }
  bool contains(const Vec3<Scalar>& p, Scalar tol = 0) const { return signed_distance(p) <= tol; }
};

using HalfSpaced = HalfSpace<double>;

/// Bounded convex region kept as half-spaces plus the derived vertex set.
///
/// Vertices are recomputed from scratch on every construction by
/// enumerating plane triples, so clipping is just "append a half-space and
/// rebuild". Planes that do not support a face are dropped, coplanar
/// duplicates are merged, and a region whose volume vanishes collapses to
/// the canonical empty polytope.
template <typename Scalar>
class ConvexPolytope {
 public:
  using Vec = Vec3<Scalar>;
  using Plane = HalfSpace<Scalar>;

  static constexpr Scalar kTolerance = Scalar(1e-9);

  /// The empty polytope.
  ConvexPolytope() = default;

  /// Throws kUnbounded when the half-spaces leave a region of infinite extent.
  static ConvexPolytope from_half_spaces(std::vector<Plane> planes) {
    ConvexPolytope p;
    p.build(std::move(planes));
    return p;
  }

  static ConvexPolytope axis_aligned(const Vec& lo, const Vec& hi) {
    std::vector<Plane> planes;
    for (int a = 0; a < 3; ++a) {
      Vec n = Vec::Zero();
      n[a] = 1;
      planes.push_back({n, hi[a]});
      planes.push_back({-n, -lo[a]});
    }
    return from_half_spaces(std::move(planes));
  }

  bool empty() const { return vertices_.empty(); }
  const std::vector<Plane>& half_spaces() const { return planes_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  /// Vertex indices of each face, ordered counter-clockwise seen from outside.
  const std::vector<std::vector<int>>& faces() const { return faces_; }
  Scalar volume() const { return volume_; }
  const Vec& centroid() const { return centroid_; }

  bool contains(const Vec& p, Scalar tol = kTolerance) const {
    if (empty()) return false;
    return std::all_of(planes_.begin(), planes_.end(),
                       [&](const Plane& h) { return h.signed_distance(p) <= tol; });
  }

  Eigen::AlignedBox<Scalar, 3> bounds() const {
    Eigen::AlignedBox<Scalar, 3> box;
    for (const Vec& v : vertices_) box.extend(v);
    return box;
  }

 private:
  void build(std::vector<Plane> input) {
    std::vector<Plane> planes;
    planes.reserve(input.size());
    for (Plane h : input) {
      const Scalar len = h.normal.norm();
      if (!(len > 0) || !std::isfinite(h.offset) || !h.normal.allFinite())
        throw Error(ErrorCode::kInvalidArgument, "half-space normal must be finite and nonzero");
      h.normal /= len;
      h.offset /= len;
      merge_plane(planes, h);
    }
    if (planes.empty()) throw Error(ErrorCode::kUnbounded, "no half-spaces given");

    Scalar scale = 1;
    for (const Plane& h : planes) scale = std::max(scale, std::abs(h.offset));
    const Scalar tol = kTolerance * scale;

    // Guard box: any vertex that lands on it means the real region is unbounded.
    const Scalar guard = scale * Scalar(1e6);
    const std::size_t n_real = planes.size();
    std::vector<Plane> all = planes;
    for (int a = 0; a < 3; ++a) {
      Vec n = Vec::Zero();
      n[a] = 1;
      all.push_back({n, guard});
      all.push_back({-n, guard});
    }

    std::vector<Vec> verts;
    const std::size_t n_all = all.size();
    for (std::size_t i = 0; i < n_all; ++i) {
      for (std::size_t j = i + 1; j < n_all; ++j) {
        const Vec nij = all[i].normal.cross(all[j].normal);
        if (nij.squaredNorm() < Scalar(1e-24)) continue;
        for (std::size_t k = j + 1; k < n_all; ++k) {
          const Scalar det = all[k].normal.dot(nij);
          if (std::abs(det) < Scalar(1e-12)) continue;
          const Vec p = (all[i].offset * all[j].normal.cross(all[k].normal) +
                         all[j].offset * all[k].normal.cross(all[i].normal) +
                         all[k].offset * nij) / det;
          bool inside = true;
          for (std::size_t m = 0; m < n_all && inside; ++m) {
            const Scalar slack = m < n_real ? tol : guard * Scalar(1e-9);
            inside = all[m].signed_distance(p) <= slack;
          }
          if (!inside) continue;
          for (std::size_t m = n_real; m < n_all; ++m)
            if (std::abs(all[m].signed_distance(p)) <= guard * Scalar(1e-6))
              throw Error(ErrorCode::kUnbounded, "half-spaces do not bound a finite region");
          add_unique(verts, p, tol);
        }
      }
    }
    if (verts.size() < 4) return;

    Vec interior = Vec::Zero();
    for (const Vec& v : verts) interior += v;
    interior /= Scalar(verts.size());

    std::vector<Plane> kept;
    std::vector<std::vector<int>> faces;
    for (std::size_t pi = 0; pi < n_real; ++pi) {
      const Plane& h = planes[pi];
      std::vector<int> on;
      for (std::size_t vi = 0; vi < verts.size(); ++vi)
        if (std::abs(h.signed_distance(verts[vi])) <= tol) on.push_back(static_cast<int>(vi));
      if (on.size() < 3) continue;
      order_face(verts, h.normal, on);
      if (face_area(verts, on) <= tol * tol) continue;
      kept.push_back(h);
      faces.push_back(std::move(on));
    }

    // Cone decomposition about the interior point: each face contributes a
    // fan of tetrahedra.
    Scalar volume = 0;
    Vec moment = Vec::Zero();
    for (const auto& face : faces) {
      const Vec& a = verts[face[0]];
      for (std::size_t t = 1; t + 1 < face.size(); ++t) {
        const Vec& b = verts[face[t]];
        const Vec& c = verts[face[t + 1]];
        const Scalar v = (a - interior).dot((b - interior).cross(c - interior)) / 6;
        volume += v;
        moment += v * (interior + a + b + c) / 4;
      }
    }
    const Scalar extent = (bounds_of(verts).diagonal()).maxCoeff();
    if (!(volume > kTolerance * kTolerance * extent * extent * extent) || faces.size() < 4) return;

    planes_ = std::move(kept);
    vertices_ = std::move(verts);
    faces_ = std::move(faces);
    volume_ = volume;
    centroid_ = moment / volume;
  }

  static void merge_plane(std::vector<Plane>& planes, const Plane& h) {
    for (Plane& existing : planes) {
      if ((existing.normal - h.normal).norm() <= kTolerance) {
        existing.offset = std::min(existing.offset, h.offset);
        return;
      }
    }
    planes.push_back(h);
  }

  static void add_unique(std::vector<Vec>& verts, const Vec& p, Scalar tol) {
    for (const Vec& v : verts)
      if ((v - p).norm() <= tol) return;
    verts.push_back(p);
  }

  static Eigen::AlignedBox<Scalar, 3> bounds_of(const std::vector<Vec>& verts) {
    Eigen::AlignedBox<Scalar, 3> box;
    for (const Vec& v : verts) box.extend(v);
    return box;
  }

  static void order_face(const std::vector<Vec>& verts, const Vec& normal, std::vector<int>& idx) {
    Vec c = Vec::Zero();
    for (int i : idx) c += verts[i];
    c /= Scalar(idx.size());
    const Vec u = normal.unitOrthogonal();
    const Vec w = normal.cross(u);
    std::vector<std::pair<Scalar, int>> keyed;
    keyed.reserve(idx.size());
    for (int i : idx) {
      const Vec d = verts[i] - c;
      keyed.emplace_back(std::atan2(d.dot(w), d.dot(u)), i);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = keyed[k].second;
  }

  static Scalar face_area(const std::vector<Vec>& verts, const std::vector<int>& face) {
    Vec acc = Vec::Zero();
    for (std::size_t t = 1; t + 1 < face.size(); ++t)
      acc += (verts[face[t]] - verts[face[0]]).cross(verts[face[t + 1]] - verts[face[0]]);
    return acc.norm() / 2;
  }

  std::vector<Plane> planes_;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> faces_;
  Scalar volume_ = 0;
  Vec centroid_ = Vec::Zero();
};

using ConvexPolytoped = ConvexPolytope<double>;

/// Intersects `p` with one half-space. An empty result is a valid polytope.
template <typename Scalar>
ConvexPolytope<Scalar> clip_polytope(const ConvexPolytope<Scalar>& p, const HalfSpace<Scalar>& h) {
  if (p.empty()) return p;
  const Scalar n = h.normal.norm();
  const HalfSpace<Scalar> hs{h.normal / n, h.offset / n};
  bool all_in = true;
  bool all_out = true;
  for (const auto& v : p.vertices()) {
    const Scalar d = hs.signed_distance(v);
    all_in = all_in && d <= ConvexPolytope<Scalar>::kTolerance;
    all_out = all_out && d >= -ConvexPolytope<Scalar>::kTolerance;
  }
  if (all_in) return p;
  if (all_out) return ConvexPolytope<Scalar>();
  auto planes = p.half_spaces();
  planes.push_back(hs);
  return ConvexPolytope<Scalar>::from_half_spaces(std::move(planes));
}

template <typename Scalar>
ConvexPolytope<Scalar> clip_polytope(const ConvexPolytope<Scalar>& p,
                                     const std::vector<HalfSpace<Scalar>>& hs) {
  ConvexPolytope<Scalar> out = p;
  for (const auto& h : hs) {
    if (out.empty()) break;
    out = clip_polytope(out, h);
  }
  return out;
}

template <typename Scalar>
Scalar polytope_volume(const ConvexPolytope<Scalar>& p) {
  return p.volume();
}

}  // namespace fsiam
