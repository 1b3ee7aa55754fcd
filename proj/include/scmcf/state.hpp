#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "scmcf/density.hpp"
#include "scmcf/meshgeom.hpp"

namespace scmcf {

/// The pair (geometry, concentration) at one instant, with the density driving it.
struct FlowState {
  Geometry geometry;
  EnergyDensity density = EnergyDensity::constant(1.0);
  double time = 0.0;
  long step_count = 0;
  /// Node indices that remeshing must keep in place (caps, tracked points).
  std::vector<std::size_t> anchors;
  /// Named anchors, e.g. "z_l" -> index. Every value also appears in `anchors`.
  std::map<std::string, std::size_t> markers;

  [[nodiscard]] bool is_curve() const { return std::holds_alternative<CurveMesh>(geometry); }
  [[nodiscard]] const std::vector<double>& concentration() const;
  std::vector<double>& concentration();
  [[nodiscard]] std::size_t size() const { return concentration().size(); }
};

/// Something that happened during a run. Payload keys are event specific.
struct Event {
  std::string type;
  double t_event = 0.0;
  std::map<std::string, double> payload;
};

namespace event_type {
inline constexpr const char* kConvexityLost = "convexity_lost";
inline constexpr const char* kSelfIntersection = "self_intersection";
inline constexpr const char* kExtinction = "extinction";
inline constexpr const char* kPinchOff = "pinch_off";
inline constexpr const char* kDomainViolation = "domain_violation";
}  // namespace event_type

}  // namespace scmcf
