#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "scmcf/vec2.hpp"

namespace scmcf {

/// Which side of the traversal direction the unit normal points to.
///
/// For a counter-clockwise loop NormalRightOfTangent is the outward normal, and the
/// mean curvature H = -div nu of a circle of radius R is then -1/R.
enum class Orientation { NormalLeftOfTangent, NormalRightOfTangent };

/// Per-node reference data used to track heights rho with x = F(z) + rho * nu_ref(z).
struct ReferenceFrame {
  std::vector<Vec2> point;
  std::vector<Vec2> normal;
};

/// Closed polygonal plane curve; node i connects to node (i + 1) mod N.
struct CurveMesh {
  std::vector<Vec2> nodes;
  Orientation orientation = Orientation::NormalRightOfTangent;
  std::vector<double> concentration;
  std::optional<ReferenceFrame> reference;
  double h_min = 0.0;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

enum class Closure {
  /// w = 0 at both end nodes; the profile closes on the rotation axis.
  CappedEnds,
  /// Profile repeats with period `period` in x (node N is node 0 shifted by period).
  Periodic,
};

/// Axisymmetric surface {(x, w cos phi, w sin phi)} described by its profile nodes (x_i, w_i).
///
/// Nodes are ordered by increasing x; the normal is the outward one (left of the
/// traversal direction), so a cylinder of radius w has H = -1/w.
struct RevolutionProfile {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> concentration;
  Closure closure = Closure::CappedEnds;
  double period = 0.0;
  double h_min = 0.0;

  [[nodiscard]] std::size_t size() const { return x.size(); }
};

using Geometry = std::variant<CurveMesh, RevolutionProfile>;

struct GeometryFields {
  std::vector<double> H;
  std::vector<Vec2> normal;
  /// Lumped measure per node: half the adjacent segment lengths for curves; for surfaces of
  /// revolution the part of each adjacent frustum between the node and the segment midpoint.
  std::vector<double> area_element;
};

/// Minimum number of nodes for a usable mesh.
inline constexpr std::size_t kMinNodes = 8;

/// Checks the mesh invariants (node count, distinct nodes, h_min, field sizes).
/// Throws MeshQualityError on violation.
void validate(const CurveMesh& mesh);
void validate(const RevolutionProfile& profile);

GeometryFields curve_geometry(const CurveMesh& mesh);

/// Geometry fields of the surface of revolution, with the outward normal.
/// Interior nodes use the axisymmetric formula H = kappa_profile - n_r / w; nodes on the
/// axis use H = 2 kappa_profile (both principal curvatures coincide there).
GeometryFields revolution_geometry(const RevolutionProfile& profile);

GeometryFields geometry_fields(const Geometry& g);

/// Graph form of the mean curvature of a surface of revolution,
///   H = (1 / sqrt(1 + w_x^2)) * (w_xx / (1 + w_x^2) - 1 / w),
/// evaluated with three-point differences in x. Entries at capped end nodes are NaN.
std::vector<double> graph_mean_curvature(const RevolutionProfile& profile);

/// V = dw_dt / sqrt(1 + w_x^2), pointwise.
std::vector<double> normal_velocity_revolution(std::span<const double> dw_dt,
                                               std::span<const double> w_x);

std::vector<double> laplace_beltrami(std::span<const double> field, const CurveMesh& mesh);
std::vector<double> laplace_beltrami(std::span<const double> field,
                                     const RevolutionProfile& profile);
std::vector<double> laplace_beltrami(std::span<const double> field, const Geometry& g);

double surface_integral(std::span<const double> field, const CurveMesh& mesh);
double surface_integral(std::span<const double> field, const RevolutionProfile& profile);
double surface_integral(std::span<const double> field, const Geometry& g);

/// Total length (curves) or lateral area (surfaces of revolution).
double total_area(const Geometry& g);

/// Segment-based gradient pairing sum_seg k_s (f_b - f_a)(h_b - h_a), the discrete
/// counterpart of the integral of grad f . grad h.
double dirichlet_pairing(std::span<const double> f, std::span<const double> h, const Geometry& g);

/// Polyline view shared by the solvers.
namespace polyline {

enum class Topology { ClosedLoop, AxisCapped, AxisPeriodic };

struct Segment {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;
  /// Flux coefficient: 1/length for plane curves, 2 pi r_mid / length on revolution surfaces.
  double conductance = 0.0;
  /// Measure of the segment: length, or the frustum area.
  double measure = 0.0;
  /// Parts of the measure on either side of the segment midpoint, lumped onto a and b.
  double measure_a = 0.0;
  double measure_b = 0.0;
};

struct View {
  std::vector<Vec2> points;
  Topology topology = Topology::ClosedLoop;
  Vec2 shift{};
  bool left_normal = true;
  bool axisymmetric = false;
};

View make_view(const CurveMesh& mesh);
View make_view(const RevolutionProfile& profile);
View make_view(const Geometry& g);

Vec2 previous_point(const View& v, std::size_t i);
Vec2 next_point(const View& v, std::size_t i);
std::vector<Segment> segments(const View& v);

struct NodeStencil {
  double h_minus = 0.0;
  double h_plus = 0.0;
  /// Weights of the three-point second derivative d^2 x / ds^2.
  double w_minus = 0.0;
  double w_center = 0.0;
  double w_plus = 0.0;
  Vec2 tangent{};
  Vec2 normal{};
  /// x_ss . normal.
  double profile_curvature = 0.0;
  bool on_axis = false;
};

std::vector<NodeStencil> stencils(const View& v);
GeometryFields fields(const View& v);

}  // namespace polyline

}  // namespace scmcf
