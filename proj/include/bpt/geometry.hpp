#ifndef BPT_GEOMETRY_HPP_
#define BPT_GEOMETRY_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace bpt {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2d = Vec2<double>;

/// Row-per-timestep trajectory of (x, y) points.
template <typename Scalar>
using Trajectory = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using Trajectoryd = Trajectory<double>;

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Left-hand normal of a direction (rotate +90 degrees).
template <typename Scalar>
Vec2<Scalar> left_normal(const Vec2<Scalar>& d) {
  return Vec2<Scalar>(-d.y(), d.x());
}

/// Wrap an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * kPi);
  if (a <= -kPi) a += Scalar(2) * kPi;
  return a;
}

template <typename Scalar>
Vec2<Scalar> rotate(const Vec2<Scalar>& v, Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  return Vec2<Scalar>(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

/// Closed-segment intersection test (touching counts).
template <typename Scalar>
bool segments_intersect(const Vec2<Scalar>& p1, const Vec2<Scalar>& p2,
                        const Vec2<Scalar>& q1, const Vec2<Scalar>& q2,
                        Scalar eps = Scalar(1e-9)) {
  const Vec2<Scalar> r = p2 - p1;
  const Vec2<Scalar> s = q2 - q1;
  const Scalar denom = cross2<Scalar>(r, s);
  const Vec2<Scalar> qp = q1 - p1;
  if (std::abs(denom) < eps) {
    if (std::abs(cross2<Scalar>(qp, r)) > eps) return false;
    // Collinear: overlap of projections onto r (or a point-point check).
    const Scalar rr = r.squaredNorm();
    if (rr < eps) {
      const Scalar ss = s.squaredNorm();
      if (ss < eps) return qp.norm() <= eps;
      const Scalar t = (p1 - q1).dot(s) / ss;
      return t >= -eps && t <= 1 + eps && cross2<Scalar>(p1 - q1, s) <= eps;
    }
    const Scalar t0 = qp.dot(r) / rr;
    const Scalar t1 = (q2 - p1).dot(r) / rr;
    return std::max(t0, t1) >= -eps && std::min(t0, t1) <= 1 + eps;
  }
  const Scalar t = cross2<Scalar>(qp, s) / denom;
  const Scalar u = cross2<Scalar>(qp, r) / denom;
  return t >= -eps && t <= 1 + eps && u >= -eps && u <= 1 + eps;
}

template <typename Scalar>
struct PolylineProjection {
  Scalar arc = 0;
  Scalar lateral = 0;
  std::size_t segment = 0;
  Vec2<Scalar> foot = Vec2<Scalar>::Zero();
  /// Signed distance past the last point along the final tangent (> 0 means
  /// the query lies beyond the end of the polyline).
  Scalar beyond_end = 0;
};

/// Arc-length parameterized polyline.
template <typename Scalar>
class Polyline {
 public:
  Polyline() = default;

  explicit Polyline(std::vector<Vec2<Scalar>> points)
      : points_(std::move(points)) {
    cumulative_.resize(points_.size(), Scalar(0));
    for (std::size_t i = 1; i < points_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
    }
  }

  const std::vector<Vec2<Scalar>>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  Scalar length() const { return cumulative_.empty() ? Scalar(0) : cumulative_.back(); }
  const Vec2<Scalar>& front() const { return points_.front(); }
  const Vec2<Scalar>& back() const { return points_.back(); }
  Scalar arc_at_vertex(std::size_t i) const { return cumulative_[i]; }

  std::size_t segment_at(Scalar s) const {
    if (points_.size() < 2) return 0;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t idx = it == cumulative_.begin()
                          ? 0
                          : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    return std::min(idx, points_.size() - 2);
  }

  Vec2<Scalar> segment_direction(std::size_t seg) const {
    return (points_[seg + 1] - points_[seg]).normalized();
  }

  /// Point at arc length s. Outside [0, length] the end segments are
  /// extended linearly.
  Vec2<Scalar> point_at(Scalar s) const {
    const std::size_t seg = segment_at(s);
    return points_[seg] + (s - cumulative_[seg]) * segment_direction(seg);
  }

  Vec2<Scalar> tangent_at(Scalar s) const { return segment_direction(segment_at(s)); }

  Scalar heading_at(Scalar s) const {
    const Vec2<Scalar> t = tangent_at(s);
    return std::atan2(t.y(), t.x());
  }

  /// Closest point on the polyline; arc clamped to [0, length]. Lateral is
  /// positive to the left of the direction of travel.
  PolylineProjection<Scalar> project(const Vec2<Scalar>& p) const {
    PolylineProjection<Scalar> best;
    Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const Vec2<Scalar> a = points_[i];
      const Vec2<Scalar> ab = points_[i + 1] - a;
      const Scalar len2 = ab.squaredNorm();
      Scalar t = (p - a).dot(ab) / len2;
      t = std::clamp(t, Scalar(0), Scalar(1));
      const Vec2<Scalar> foot = a + t * ab;
      const Scalar d2 = (p - foot).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best.segment = i;
        best.foot = foot;
        best.arc = cumulative_[i] + t * std::sqrt(len2);
      }
    }
    const Vec2<Scalar> dir = segment_direction(best.segment);
    best.lateral = cross2<Scalar>(dir, p - best.foot);
    const Vec2<Scalar> end_dir = segment_direction(points_.size() - 2);
    best.beyond_end = (p - points_.back()).dot(end_dir);
    return best;
  }

 private:
  std::vector<Vec2<Scalar>> points_;
  std::vector<Scalar> cumulative_;
};

using Polyline2d = Polyline<double>;

}  // namespace bpt

#endif  // BPT_GEOMETRY_HPP_
