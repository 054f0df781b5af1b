#include "bpt/road_model.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "bpt/error.hpp"

namespace bpt {
namespace {

constexpr double kSuccessorGap = 0.1;
constexpr double kMaxArcSpacing = 1.0;
constexpr double kMinPointSpacing = 0.01;

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero in canonical output
}

struct Arm {
  const char* name;
  Vec2d outward;
};

std::vector<Arm> arms_for(int count) {
  if (count == 4) {
    return {{"south", {0, -1}}, {"east", {1, 0}}, {"north", {0, 1}}, {"west", {-1, 0}}};
  }
  return {{"south", {0, -1}}, {"east", {1, 0}}, {"west", {-1, 0}}};
}

Vec2d right_of(const Vec2d& d) { return Vec2d(d.y(), -d.x()); }

std::vector<Vec2d> sample_segment(const Vec2d& a, const Vec2d& b) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / kMaxArcSpacing)));
  std::vector<Vec2d> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    pts.push_back(i == n ? b : a + (b - a) * (static_cast<double>(i) / n));
  }
  return pts;
}

// Quarter-circle arc from p (heading d_in) to q, turning towards `side`.
std::vector<Vec2d> sample_quarter_arc(const Vec2d& p, const Vec2d& d_in,
                                      const Vec2d& q, const Vec2d& side) {
  const double radius = (q - p).dot(d_in);
  const Vec2d center = p + side * radius;
  const Vec2d from = p - center;
  const double start = std::atan2(from.y(), from.x());
  const double sweep = cross2<double>(from, q - center) > 0 ? std::numbers::pi / 2
                                                             : -std::numbers::pi / 2;
  const double arc_len = radius * std::numbers::pi / 2;
  const int n = std::max(2, static_cast<int>(std::ceil(arc_len / kMaxArcSpacing)));
  std::vector<Vec2d> pts;
  pts.reserve(n + 1);
  pts.push_back(p);
  for (int i = 1; i < n; ++i) {
    const double a = start + sweep * static_cast<double>(i) / n;
    pts.push_back(center + radius * Vec2d(std::cos(a), std::sin(a)));
  }
  pts.push_back(q);
  return pts;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive");
  }
}

}  // namespace

const char* to_string(Maneuver m) {
  switch (m) {
    case Maneuver::kStraight: return "straight";
    case Maneuver::kLeft: return "left";
    case Maneuver::kRight: return "right";
  }
  return "straight";
}

std::optional<Maneuver> maneuver_from_string(const std::string& s) {
  if (s == "straight") return Maneuver::kStraight;
  if (s == "left") return Maneuver::kLeft;
  if (s == "right") return Maneuver::kRight;
  return std::nullopt;
}

RoadNetwork::RoadNetwork(std::map<LaneId, Lane> lanes,
                         std::map<std::string, std::vector<LaneId>> named_routes)
    : lanes_(std::move(lanes)), named_routes_(std::move(named_routes)) {}

const Lane& RoadNetwork::lane(const LaneId& id) const {
  auto it = lanes_.find(id);
  if (it == lanes_.end()) throw InvalidArgument("unknown lane '" + id + "'");
  return it->second;
}

void RoadNetwork::validate() const {
  for (const auto& [id, lane] : lanes_) {
    if (lane.id != id) throw InvalidArgument("lane key/id mismatch for '" + id + "'");
    if (lane.centerline.size() < 2 || !(lane.length() > 0.0)) {
      throw InvalidArgument("lane '" + id + "' has a degenerate centerline");
    }
    if (!(lane.width > 0.0)) throw InvalidArgument("lane '" + id + "' has non-positive width");
    const auto& pts = lane.centerline.points();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if ((pts[i] - pts[i - 1]).norm() < kMinPointSpacing) {
        throw InvalidArgument("lane '" + id + "' has points closer than 0.01 m");
      }
    }
    for (const auto& succ : lane.successors) {
      auto it = lanes_.find(succ);
      if (it == lanes_.end()) {
        throw InvalidArgument("lane '" + id + "' has unknown successor '" + succ + "'");
      }
      if ((it->second.centerline.front() - lane.centerline.back()).norm() > kSuccessorGap) {
        throw InvalidArgument("successor '" + succ + "' does not continue lane '" + id + "'");
      }
    }
    if (lane.left_adjacent) {
      auto it = lanes_.find(*lane.left_adjacent);
      if (it == lanes_.end() || it->second.right_adjacent != id) {
        throw InvalidArgument("left adjacency of '" + id + "' is not symmetric");
      }
    }
    if (lane.right_adjacent) {
      auto it = lanes_.find(*lane.right_adjacent);
      if (it == lanes_.end() || it->second.left_adjacent != id) {
        throw InvalidArgument("right adjacency of '" + id + "' is not symmetric");
      }
    }
  }
  for (const auto& [name, route] : named_routes_) {
    if (route.empty()) throw InvalidArgument("route '" + name + "' is empty");
    for (std::size_t i = 0; i < route.size(); ++i) {
      const Lane& l = lane(route[i]);
      if (i + 1 < route.size() &&
          std::find(l.successors.begin(), l.successors.end(), route[i + 1]) ==
              l.successors.end()) {
        throw InvalidArgument("route '" + name + "' is not a successor chain");
      }
    }
  }
}

bool RoadNetwork::operator==(const RoadNetwork& other) const {
  if (named_routes_ != other.named_routes_ || lanes_.size() != other.lanes_.size()) {
    return false;
  }
  for (const auto& [id, a] : lanes_) {
    auto it = other.lanes_.find(id);
    if (it == other.lanes_.end()) return false;
    const Lane& b = it->second;
    if (a.width != b.width || a.successors != b.successors ||
        a.left_adjacent != b.left_adjacent || a.right_adjacent != b.right_adjacent ||
        a.centerline.points() != b.centerline.points()) {
      return false;
    }
  }
  return true;
}

RoadNetwork build_straight_road(int n_lanes, double length, double lane_width) {
  if (n_lanes < 1) throw InvalidArgument("n_lanes must be at least 1");
  require_positive(length, "length");
  require_positive(lane_width, "lane_width");

  std::map<LaneId, Lane> lanes;
  std::map<std::string, std::vector<LaneId>> routes;
  for (int i = 0; i < n_lanes; ++i) {
    Lane lane;
    lane.id = "lane" + std::to_string(i);
    const double y = i * lane_width;
    lane.centerline = Polyline2d(sample_segment(Vec2d(0, y), Vec2d(length, y)));
    lane.width = lane_width;
    if (i + 1 < n_lanes) lane.left_adjacent = "lane" + std::to_string(i + 1);
    if (i > 0) lane.right_adjacent = "lane" + std::to_string(i - 1);
    routes[lane.id] = {lane.id};
    lanes.emplace(lane.id, std::move(lane));
  }
  return RoadNetwork(std::move(lanes), std::move(routes));
}

RoadNetwork build_intersection(int arms, double arm_length, double lane_width) {
  if (arms != 3 && arms != 4) throw InvalidArgument("arms must be 3 or 4");
  require_positive(arm_length, "arm_length");
  require_positive(lane_width, "lane_width");

  // Two lanes per arm, so the box edge sits one lane width from the center.
  const double half = lane_width;
  const double w2 = lane_width / 2;
  const auto arm_list = arms_for(arms);

  std::map<LaneId, Lane> lanes;
  std::map<std::string, std::vector<LaneId>> routes;

  for (const Arm& arm : arm_list) {
    const Vec2d a = arm.outward;
    const Vec2d r_in = right_of(Vec2d(-a));
    const Vec2d r_out = right_of(a);

    Lane in;
    in.id = std::string(arm.name) + "_in";
    in.centerline = Polyline2d(sample_segment(a * (half + arm_length) + r_in * w2,
                                              a * half + r_in * w2));
    in.width = lane_width;
    lanes.emplace(in.id, std::move(in));

    Lane out;
    out.id = std::string(arm.name) + "_out";
    out.centerline = Polyline2d(sample_segment(a * half + r_out * w2,
                                               a * (half + arm_length) + r_out * w2));
    out.width = lane_width;
    lanes.emplace(out.id, std::move(out));
  }

  for (const Arm& from : arm_list) {
    const Vec2d d_in = -from.outward;
    const LaneId in_id = std::string(from.name) + "_in";
    // Successor order is straight, left, right.
    const std::array<std::pair<Maneuver, Vec2d>, 3> exits = {{
        {Maneuver::kStraight, d_in},
        {Maneuver::kLeft, left_normal<double>(d_in)},
        {Maneuver::kRight, right_of(d_in)},
    }};
    for (const auto& [maneuver, out_dir] : exits) {
      const Arm* to = nullptr;
      for (const Arm& cand : arm_list) {
        if ((cand.outward - out_dir).norm() < 1e-9) to = &cand;
      }
      if (to == nullptr) continue;
      const LaneId out_id = std::string(to->name) + "_out";
      const Vec2d p = lanes.at(in_id).centerline.back();
      const Vec2d q = lanes.at(out_id).centerline.front();
      Lane conn;
      conn.id = in_id + "->" + out_id;
      conn.width = lane_width;
      if (maneuver == Maneuver::kStraight) {
        conn.centerline = Polyline2d(sample_segment(p, q));
      } else {
        const Vec2d side = maneuver == Maneuver::kLeft ? left_normal<double>(d_in)
                                                       : right_of(d_in);
        conn.centerline = Polyline2d(sample_quarter_arc(p, d_in, q, side));
      }
      conn.successors = {out_id};
      lanes.at(in_id).successors.push_back(conn.id);
      routes[conn.id] = {in_id, conn.id, out_id};
      lanes.emplace(conn.id, std::move(conn));
    }
  }
  return RoadNetwork(std::move(lanes), std::move(routes));
}

LaneProjection project_to_lane(const RoadNetwork& network, const LaneId& lane_id,
                               const Vec2d& point) {
  const auto proj = network.lane(lane_id).centerline.project(point);
  return {proj.arc, proj.lateral};
}

Maneuver classify_turn(const Lane& lane) {
  const double h0 = lane.centerline.heading_at(0.0);
  const double h1 = lane.centerline.heading_at(lane.length());
  const double delta = normalize_angle(h1 - h0);
  if (delta > std::numbers::pi / 4) return Maneuver::kLeft;
  if (delta < -std::numbers::pi / 4) return Maneuver::kRight;
  return Maneuver::kStraight;
}

nlohmann::json to_json(const RoadNetwork& network) {
  nlohmann::json lanes = nlohmann::json::array();
  for (const auto& [id, lane] : network.lanes()) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : lane.centerline.points()) {
      pts.push_back({round6(p.x()), round6(p.y())});
    }
    nlohmann::json j = {
        {"id", id},
        {"centerline", std::move(pts)},
        {"width", round6(lane.width)},
        {"successors", lane.successors},
        {"left_adjacent", lane.left_adjacent ? nlohmann::json(*lane.left_adjacent)
                                             : nlohmann::json(nullptr)},
        {"right_adjacent", lane.right_adjacent ? nlohmann::json(*lane.right_adjacent)
                                               : nlohmann::json(nullptr)},
    };
    lanes.push_back(std::move(j));
  }
  nlohmann::json routes = nlohmann::json::object();
  for (const auto& [name, route] : network.named_routes()) routes[name] = route;
  return {{"lanes", std::move(lanes)}, {"routes", std::move(routes)}};
}

RoadNetwork road_network_from_json(const nlohmann::json& j) {
  try {
    std::map<LaneId, Lane> lanes;
    for (const auto& lj : j.at("lanes")) {
      Lane lane;
      lane.id = lj.at("id").get<std::string>();
      std::vector<Vec2d> pts;
      for (const auto& p : lj.at("centerline")) {
        pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
      lane.centerline = Polyline2d(std::move(pts));
      lane.width = lj.at("width").get<double>();
      lane.successors = lj.value("successors", std::vector<LaneId>{});
      if (lj.contains("left_adjacent") && lj["left_adjacent"].is_string()) {
        lane.left_adjacent = lj["left_adjacent"].get<std::string>();
      }
      if (lj.contains("right_adjacent") && lj["right_adjacent"].is_string()) {
        lane.right_adjacent = lj["right_adjacent"].get<std::string>();
      }
      const LaneId id = lane.id;
      if (!lanes.emplace(id, std::move(lane)).second) {
        throw InvalidArgument("duplicate lane id '" + id + "'");
      }
    }
    std::map<std::string, std::vector<LaneId>> routes;
    if (j.contains("routes")) {
      for (const auto& [name, r] : j["routes"].items()) routes[name] = r.get<std::vector<LaneId>>();
    }
    RoadNetwork net(std::move(lanes), std::move(routes));
    net.validate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed road network JSON: ") + e.what());
  }
}

}  // namespace bpt
