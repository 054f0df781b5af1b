#ifndef BPT_ROAD_MODEL_HPP_
#define BPT_ROAD_MODEL_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpt/geometry.hpp"

namespace bpt {

using LaneId = std::string;

struct Lane {
  LaneId id;
  Polyline2d centerline;
  double width = 0.0;
  std::vector<LaneId> successors;
  std::optional<LaneId> left_adjacent;
  std::optional<LaneId> right_adjacent;

  double length() const { return centerline.length(); }
};

enum class Maneuver { kStraight, kLeft, kRight };

const char* to_string(Maneuver m);
std::optional<Maneuver> maneuver_from_string(const std::string& s);

/// Immutable after construction; share freely across threads.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::map<LaneId, Lane> lanes,
              std::map<std::string, std::vector<LaneId>> named_routes);

  const std::map<LaneId, Lane>& lanes() const { return lanes_; }
  const std::map<std::string, std::vector<LaneId>>& named_routes() const {
    return named_routes_;
  }

  bool has_lane(const LaneId& id) const { return lanes_.count(id) != 0; }
  /// Throws InvalidArgument for unknown ids.
  const Lane& lane(const LaneId& id) const;

  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;

  bool operator==(const RoadNetwork&) const;

 private:
  std::map<LaneId, Lane> lanes_;
  std::map<std::string, std::vector<LaneId>> named_routes_;
};

/// n parallel lanes along +x; lane i centered at y = i * lane_width, ids
/// "lane0".."lane<n-1>". Each lane is also a named route of the same id.
RoadNetwork build_straight_road(int n_lanes, double length, double lane_width);

/// Single-lane-per-approach intersection centered at the origin. Arms are
/// south/east/north/west (3 arms drops north). Lane ids: "<arm>_in",
/// "<arm>_out" and connectors "<from>_in-><to>_out", which are also the
/// route names ("<from>_in-><to>_out" => [in, connector, out]).
RoadNetwork build_intersection(int arms, double arm_length, double lane_width);

struct LaneProjection {
  double arc_offset = 0.0;
  double lateral_offset = 0.0;
};

LaneProjection project_to_lane(const RoadNetwork& network, const LaneId& lane_id,
                               const Vec2d& point);

/// Classifies a lane by its end-to-end heading change.
Maneuver classify_turn(const Lane& lane);

/// Canonical JSON: lanes sorted by id, coordinates rounded to 6 decimals.
nlohmann::json to_json(const RoadNetwork& network);

/// Inverse of to_json; "routes" is optional. Throws InvalidArgument on a
/// malformed document and validates the result.
RoadNetwork road_network_from_json(const nlohmann::json& j);

}  // namespace bpt

#endif  // BPT_ROAD_MODEL_HPP_
