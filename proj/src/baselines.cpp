#include <cmath>
#include <numbers>

#include "bpt/error.hpp"
#include "bpt/predictor.hpp"

namespace bpt {

Vec2d estimate_velocity(const HistoryMatrix& history, double dt, std::size_t window) {
  const Eigen::Index n = std::min<Eigen::Index>(history.rows(), static_cast<Eigen::Index>(window));
  if (n < 2) return Vec2d::Zero();
  const auto pts = history.bottomRows(n).leftCols<2>();
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) * dt;
  const Eigen::VectorXd tc = t.array() - t.mean();
  const Eigen::RowVector2d mean = pts.colwise().mean();
  const Eigen::RowVector2d num = tc.transpose() * (pts.rowwise() - mean);
  return num.transpose() / tc.squaredNorm();
}

PredictionSet builtin_constant_velocity(const HistoryMatrix& history, std::size_t k,
                                        std::size_t horizon, double dt) {
  if (history.rows() == 0) throw InvalidArgument("empty history");
  const Vec2d last = history.bottomRows<1>().leftCols<2>().transpose();
  const Vec2d v = estimate_velocity(history, dt);
  PredictionSet out;
  for (std::size_t i = 0; i < k; ++i) {
    const double deg = 5.0 * static_cast<double>((i + 1) / 2) * (i % 2 == 1 ? 1.0 : -1.0);
    const Vec2d vi = rotate<double>(v, deg * std::numbers::pi / 180.0);
    Trajectoryd c(static_cast<Eigen::Index>(horizon), 2);
    for (std::size_t h = 0; h < horizon; ++h) {
      c.row(static_cast<Eigen::Index>(h)) = (last + vi * (dt * static_cast<double>(h + 1))).transpose();
    }
    out.candidates.push_back(std::move(c));
  }
  return out;
}

namespace {

using Route = std::vector<const Lane*>;

void enumerate_routes(const RoadNetwork& map, Route& prefix, double remaining, std::size_t limit,
                      std::vector<Route>& out) {
  const Lane* last = prefix.back();
  if (remaining <= 0.0 || last->successors.empty()) {
    out.push_back(prefix);
    return;
  }
  for (const auto& id : last->successors) {
    if (out.size() >= limit) return;
    const Lane& next = map.lane(id);
    prefix.push_back(&next);
    enumerate_routes(map, prefix, remaining - next.length(), limit, out);
    prefix.pop_back();
  }
}

Vec2d point_along(const Route& route, double u) {
  for (std::size_t i = 0; i < route.size(); ++i) {
    const double len = route[i]->length();
    if (u <= len || i + 1 == route.size()) return route[i]->centerline.point_at(u);
    u -= len;
  }
  return Vec2d::Zero();
}

}  // namespace

PredictionSet builtin_lane_follow(const HistoryMatrix& history, const RoadNetwork& map,
                                  std::size_t k, std::size_t horizon, double dt,
                                  const std::string& scenario_id) {
  if (history.rows() == 0) throw InvalidArgument("empty history");
  const Vec2d pos = history.bottomRows<1>().leftCols<2>().transpose();
  const double heading = history(history.rows() - 1, 2);
  const double speed = estimate_velocity(history, dt).norm();

  const Lane* best = nullptr;
  double best_arc = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& [id, lane] : map.lanes()) {
    const auto proj = lane.centerline.project(pos);
    if (proj.beyond_end > 0.0) continue;
    const double dist = (pos - proj.foot).norm();
    if (dist > 2.0 * lane.width) continue;
    const double dh = std::abs(normalize_angle(lane.centerline.heading_at(proj.arc) - heading));
    if (dh > std::numbers::pi / 2) continue;
    const double score = dist + 2.0 * dh;
    if (score < best_score) {
      best_score = score;
      best = &lane;
      best_arc = proj.arc;
    }
  }
  if (best == nullptr) {
    throw PredictorError(PredictorError::Kind::kInvalidInput, scenario_id,
                         "no lane within projection tolerance of the target");
  }

  const double reach = 1.2 * speed * dt * static_cast<double>(horizon);
  std::vector<Route> routes;
  Route prefix{best};
  enumerate_routes(map, prefix, reach - (best->length() - best_arc), k, routes);

  PredictionSet out;
  for (std::size_t i = 0; i < k; ++i) {
    const Route* route = &routes[i % routes.size()];
    double scale = 1.0;
    if (i >= routes.size()) {
      const std::size_t j = i - routes.size();
      scale = j % 2 == 0 ? 0.8 : 1.2;
      route = &routes[(j / 2) % routes.size()];
    }
    Trajectoryd c(static_cast<Eigen::Index>(horizon), 2);
    for (std::size_t h = 0; h < horizon; ++h) {
      const double u = best_arc + scale * speed * dt * static_cast<double>(h + 1);
      c.row(static_cast<Eigen::Index>(h)) = point_along(*route, u).transpose();
    }
    out.candidates.push_back(std::move(c));
  }
  return out;
}

}  // namespace bpt
