#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scmcf/state.hpp"

namespace scmcf {

/// Sampled diagnostics of one state. dissipation_lhs is filled in once the
/// neighbouring rows are known (see finalize_dissipation).
struct DiagnosticsRow {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double area = 0.0;
  double min_H = 0.0;
  double max_H = 0.0;
  double min_c = 0.0;
  double dissipation_lhs = 0.0;
  double dissipation_rhs = 0.0;
  /// Number of remeshes performed before this row was sampled.
  long remeshes = 0;
  std::vector<std::string> events;
};

struct RunSeries {
  std::vector<DiagnosticsRow> rows;
};

double mass(const FlowState& state);
double energy(const FlowState& state);
double area(const FlowState& state);
double min_mean_curvature(const FlowState& state);
double max_mean_curvature(const FlowState& state);
double min_concentration(const FlowState& state);

/// Normal velocity V = g(c) H per node.
std::vector<double> normal_velocity(const FlowState& state);

/// -( sum_seg k (G'(c_b) - G'(c_a))^2 + sum_i V_i^2 A_i ), the discrete right-hand side of
/// dE/dt = -int |grad G'(c)|^2 + V^2 dA.
double dissipation_rhs(const FlowState& state);

DiagnosticsRow diagnose(const FlowState& state);

/// Fills dissipation_lhs with a finite-difference estimate of dE/dt: centred in the
/// interior, one-sided at the first and last row. Spacing may be non-uniform.
void finalize_dissipation(std::vector<DiagnosticsRow>& rows);

inline constexpr double kDissipationFloor = 1e-14;

/// max over interior rows of |dE/dt - rhs| / max(|rhs|, 1e-14), with the centred estimate.
/// Windows that straddle a remesh are skipped because the energy jump there is not flow.
/// Throws InvalidArgument for fewer than 3 rows.
double dissipation_residual(const std::vector<DiagnosticsRow>& rows);

struct ConvexityWitness {
  double x_mid = 0.0;
  double y_end = 0.0;
  double gap = 0.0;
};

struct ConvexityReport {
  bool convex = true;
  std::optional<ConvexityWitness> witness;
  /// Sign changes of kappa_1 = -x_ss . nu along the profile, ignoring |kappa_1| below 1e-8.
  int curvature_sign_changes = 0;
};

/// Plateau layout for the witness search: mid plateau [mid_lo, mid_hi], end plateaus
/// [end_left_lo, end_left_hi] and [end_right_lo, end_right_hi] in x.
struct PlateauLayout {
  double end_left_lo = 1.0;
  double end_left_hi = 2.0;
  double mid_lo = 3.0;
  double mid_hi = 4.0;
  double end_right_lo = 5.0;
  double end_right_hi = 6.0;
};

inline constexpr double kConvexityEventThreshold = 1e-6;

/// Convex unless some end-plateau node is higher than some mid-plateau node by more than
/// `threshold`. Without a layout the whole profile is scanned for a sag: any node lower than
/// both the highest node to its left and the highest node to its right.
ConvexityReport convexity_monitor(const RevolutionProfile& profile,
                                  const std::optional<PlateauLayout>& layout = std::nullopt,
                                  double threshold = kConvexityEventThreshold);
ConvexityReport convexity_monitor(const FlowState& state,
                                  const std::optional<PlateauLayout>& layout = std::nullopt,
                                  double threshold = kConvexityEventThreshold);

struct SegmentPair {
  std::size_t first = 0;
  std::size_t second = 0;
  Vec2 point{};
};

/// Intersection of non-adjacent segments of a closed polygon, using a uniform spatial hash
/// with cell size twice the longest segment. Returns the lexicographically smallest pair.
std::optional<SegmentPair> detect_self_intersection(const std::vector<Vec2>& nodes);
std::optional<SegmentPair> detect_self_intersection(const CurveMesh& mesh);
std::optional<SegmentPair> detect_self_intersection(const FlowState& state);

/// Column header of the series CSV.
std::string series_csv_header();
/// One CSV line (no newline) with 17 significant digits; events joined by ';'.
std::string series_csv_row(const DiagnosticsRow& row);

}  // namespace scmcf
