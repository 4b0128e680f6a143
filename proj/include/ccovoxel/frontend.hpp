#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ccovoxel/violation_model.hpp"

namespace ccv {

/// Double-integrator state.
struct KinoState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

/// Constant acceleration u held for duration tau.
struct MotionPrimitive {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  double tau = 0.0;
};

/// The (2r + 1)^3 controls with per-axis values k * u_max / r, k in [-r, r].
std::vector<Eigen::Vector3d> generate_controls(double u_max, int r);

/// Closed-form propagation: p + v tau + u tau^2 / 2, v + u tau.
KinoState propagate(const KinoState& s, const MotionPrimitive& m);

/// Lower bound on the time-energy cost of reaching `goal` from `s`:
/// min over T > 0 of the optimal double-integrator cost plus rho T.
/// Writes the minimizing T when `optimal_time` is given (0 if none).
double heuristic(const KinoState& s, const KinoState& goal, double rho, double* optimal_time = nullptr);

/// (|u|^2 + rho) tau + w_mmd (mmd_child - mmd_parent), clamped at zero when
/// `clamp` is set.
double edge_cost(const MotionPrimitive& m, double rho, double w_mmd, double mmd_parent, double mmd_child,
                 bool clamp = true);

struct SearchConfig {
  double u_max = 3.0;
  int resolution_r = 2;
  double tau = 0.5;
  double rho = 1.0;
  /// Per-axis speed limit on every node.
  double v_max = 2.0;
  /// Weight on MMD increments; 0 disables MMD evaluation entirely.
  double w_mmd = 10.0;
  bool clamp_edge_cost = true;
  /// Primitives along which the measured distance drops below this are
  /// rejected. The deterministic baseline sets it to r_safe.
  double hard_clearance = 0.0;
  int collision_checks = 6;
  /// Cell size of the pruning lattice; one retained node per cell.
  double prune_resolution = 0.2;
  /// Velocity bin width added to the pruning key; 0 prunes on position only.
  double prune_velocity_resolution = 0.0;
  double goal_tolerance = 1.0;
  /// A rest-to-rest closing segment is attempted from nodes this close.
  double shot_radius = 5.0;
  /// Closing segments whose per-point MMD exceeds this are rejected.
  double shot_mmd_threshold = 1e-3;
  std::size_t max_expansions = 20000;
  double heuristic_weight = 5.0;
  /// When set, the RBF bandwidth is resolved from the violation samples of
  /// the first expansion batch and frozen; otherwise the model's kernel is used.
  std::optional<BandwidthPolicy> bandwidth;
  std::uint64_t seed = 0;
};

/// Closing segment to the goal, stored as per-axis polynomial coefficients in t.
struct ClosingSegment {
  Eigen::Matrix<double, 4, 3> poly = Eigen::Matrix<double, 4, 3>::Zero();
  double duration = 0.0;

  Eigen::Vector3d position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  Eigen::Vector3d acceleration(double t) const;
};

/// Energy-optimal double-integrator segment (cubic in t) from (p0, v0) to
/// (p1, v1) over T. Its integral of |a|^2 plus rho T is what heuristic()
/// minimizes over T.
ClosingSegment closing_segment(const Eigen::Vector3d& p0, const Eigen::Vector3d& v0, const Eigen::Vector3d& p1,
                               const Eigen::Vector3d& v1, double duration);

/// Integral of |a|^2 over the segment.
double control_energy(const ClosingSegment& seg);

struct PathNode {
  KinoState state;
  /// Primitive that led here from the previous node; tau == 0 for the start.
  MotionPrimitive primitive;
  double g = 0.0;
  double h = 0.0;
  double mmd = 0.0;
};

struct SearchResult {
  std::vector<PathNode> nodes;
  std::optional<ClosingSegment> closing;
  std::size_t expansions = 0;
  double cost = 0.0;
  /// Kernel the node MMDs were computed with.
  KernelSpec kernel = KernelSpec::rbf(kBandwidthFloor);

  double duration() const;
  Eigen::Vector3d position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  /// Positions every dt over the whole path, endpoint included.
  std::vector<Eigen::Vector3d> sample_positions(double dt) const;
  /// MMD value of every retained path node, start first.
  std::vector<double> mmd_trace() const;
};

/// Fields reported for every expanded node.
struct ExpansionRecord {
  std::size_t order = 0;
  KinoState state;
  double g = 0.0;
  double h = 0.0;
  double mmd = 0.0;
};

using ExpansionSink = std::function<void(const ExpansionRecord&)>;

/// Seed of the violation-sample stream for a node, keyed by its pruning cell.
std::uint64_t node_stream(std::uint64_t seed, const Eigen::Vector3i& cell);

/// Kinodynamic A* on the measured field. Throws InvalidQuery when start or goal
/// is occupied or outside the map and SearchFailure (with the expansion count
/// in the message) when the open list empties or the budget runs out.
SearchResult search(const KinoState& start, const Eigen::Vector3d& goal, const ViolationModel& model,
                    const SearchConfig& cfg, const ExpansionSink& sink = {});

}  // namespace ccv
