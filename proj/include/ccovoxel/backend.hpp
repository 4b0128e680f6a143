#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ccovoxel/error.hpp"
#include "ccovoxel/trajectory.hpp"
#include "ccovoxel/violation_model.hpp"

namespace ccv {

struct CemConfig {
  int samples = 50;
  int iterations = 5;
  int elites = 10;
  /// Fraction of the elites carried into the next pool.
  double memory_fraction = 0.3;
  double w_mmd = 10.0;
  double lambda_smooth = 1.0;
  double lambda_limit = 1.0;
  /// Optional control-point regularizer; off by default.
  double lambda_second_difference = 0.0;
  /// Points along the trajectory at which the MMD term is evaluated.
  int eval_points = 60;
  double initial_sigma = 0.3;
  double sigma_min = 1e-4;
  LimitSpec limits;
  /// Points closer than this to a measured obstacle are penalized in
  /// proportion to the shortfall; 0 disables the check.
  double hard_clearance = 0.0;
  double clearance_penalty = 1e3;
  /// Added per evaluation point outside the map.
  double out_of_bounds_penalty = 1e6;
  /// Bandwidth resolved once from the initial mean; nullopt keeps the model kernel.
  std::optional<BandwidthPolicy> bandwidth = BandwidthPolicy{};
  /// Threads used to score a pool; results do not depend on it.
  int workers = 1;
  std::uint64_t seed = 0;
};

struct CostBreakdown {
  double smoothness = 0.0;
  double limit = 0.0;
  double mmd = 0.0;
  double second_difference = 0.0;
  /// Clearance and out-of-bounds penalties.
  double penalty = 0.0;
  int out_of_bounds_points = 0;
  double total = 0.0;
};

/// Evaluation times k / (eval_points - 1) * duration.
std::vector<double> eval_times(const TrajectoryCoefficients& coeffs, int eval_points);

/// Seed of the violation-sample stream for the k-th evaluation point. Fixed
/// across samples and iterations so costs are compared on common noise.
std::uint64_t eval_stream(std::uint64_t seed, int k);

/// lambda_s smoothness + lambda_a limit + w mmd (+ regularizer + penalties).
/// With w_mmd == 0 the MMD term is not evaluated.
CostBreakdown total_cost(const TrajectoryCoefficients& coeffs, const ViolationModel& model, const CemConfig& cfg);

/// Violation samples pooled over the evaluation points.
std::vector<double> trajectory_violations(const TrajectoryCoefficients& coeffs, const ViolationModel& model,
                                          const CemConfig& cfg);

/// Indices of the q lowest costs; ties go to the lower index.
std::vector<std::size_t> select_elites(std::span<const double> costs, int q);

struct PoolMember {
  Eigen::VectorXd x;
  double cost = 0.0;
};

/// Fresh samples followed by the best ceil(memory_fraction * q) elites.
std::vector<PoolMember> update_samples(std::vector<PoolMember> fresh, std::span<const PoolMember> elites,
                                       double memory_fraction);

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::VectorXd sigma;
};

/// Diagonal Gaussian from the elites; population standard deviation floored
/// at sigma_min where floor_mask is set (coordinates with no spread allowed
/// stay at zero).
GaussianFit refit_gaussian(std::span<const Eigen::VectorXd> elites, double sigma_min,
                           const std::vector<bool>& floor_mask = {});

struct CemIteration {
  int iteration = 0;
  /// Cost of the mean trajectory at the start of this iteration.
  CostBreakdown mean_cost;
  double best_cost = 0.0;
  double covariance_trace = 0.0;
  /// Fraction of violation samples along the mean that are exactly zero.
  double zero_mass = 0.0;
  std::vector<double> violations;
};

struct CemResult {
  TrajectoryCoefficients coefficients;
  TrajectoryCoefficients best_elite;
  double best_elite_cost = 0.0;
  /// iterations + 1 entries: the state before each iteration and the final mean.
  std::vector<CemIteration> trace;
  KernelSpec kernel = KernelSpec::rbf(kBandwidthFloor);
};

class RefinementError : public Error {
 public:
  RefinementError(const std::string& what, std::vector<CemIteration> trace)
      : Error(ErrorCode::RefinementFailure, what), trace_(std::move(trace)) {}
  const std::vector<CemIteration>& trace() const { return trace_; }

 private:
  std::vector<CemIteration> trace_;
};

/// Cross-entropy refinement of the Bernstein coefficients. The boundary
/// conditions are enforced on the input and on every sample; the returned
/// coefficients are the final mean.
CemResult cem_refine(const TrajectoryCoefficients& initial, const BoundaryConditions& boundary,
                     const ViolationModel& model, const CemConfig& cfg);

}  // namespace ccv
