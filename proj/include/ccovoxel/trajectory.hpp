#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ccv {

inline constexpr int kDefaultDegree = 10;

struct BoundaryConditions {
  Eigen::Vector3d start_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d start_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d start_acceleration = Eigen::Vector3d::Zero();
  Eigen::Vector3d end_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d end_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d end_acceleration = Eigen::Vector3d::Zero();
};

struct LimitSpec {
  double v_max = 2.0;
  double a_min = -3.0;
  double a_max = 3.0;
};

/// Basis values and analytic time derivatives at T sample times; one row per time.
struct BasisMatrices {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Pdot;
  Eigen::MatrixXd Pddot;
  std::vector<double> times;
  double duration = 0.0;
  int degree = 0;
};

/// Bernstein control points, one column per axis.
struct TrajectoryCoefficients {
  Eigen::MatrixX3d control;
  int degree = kDefaultDegree;
  double duration = 1.0;

  auto cx() const { return control.col(0); }
  auto cy() const { return control.col(1); }
  auto cz() const { return control.col(2); }

  /// Column-major flattening (all x, then y, then z); length 3 (degree + 1).
  Eigen::VectorXd flat() const;
  static TrajectoryCoefficients from_flat(const Eigen::VectorXd& flat, int degree, double duration);
};

struct TrajectoryPoint {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
  Eigen::Vector3d acceleration;
};

/// b_i^n(s) = C(n, i) s^i (1 - s)^(n - i) for s in [0, 1].
Eigen::VectorXd bernstein_basis(int degree, double s);

/// Row of the order-th time derivative at normalized time s for a curve of
/// the given duration (chain rule applies 1 / duration^order).
Eigen::VectorXd bernstein_derivative_row(int degree, double s, int order, double duration);

BasisMatrices build_basis_matrices(std::span<const double> times, int degree, double duration);

struct FitReport {
  TrajectoryCoefficients coefficients;
  /// 1 / rcond of the KKT matrix.
  double condition_estimate = 0.0;
  /// max |M sol - rhs| over the three axes.
  double kkt_residual = 0.0;
};

/// Equality-constrained least squares via the KKT system
/// [[P^T P, A^T], [A, 0]] [c; lambda] = [P^T x; b], solved per axis.
FitReport fit_polynomial_report(const Eigen::MatrixX3d& waypoints, std::span<const double> times,
                                const BoundaryConditions& boundary, int degree, double duration);
TrajectoryCoefficients fit_polynomial(const Eigen::MatrixX3d& waypoints, std::span<const double> times,
                                      const BoundaryConditions& boundary, int degree, double duration);
/// Waypoints taken to be uniformly spaced over [0, duration].
TrajectoryCoefficients fit_polynomial(const Eigen::MatrixX3d& waypoints, const BoundaryConditions& boundary,
                                      int degree, double duration);

TrajectoryPoint evaluate(const TrajectoryCoefficients& coeffs, double t);
Eigen::Vector3d evaluate_jerk(const TrajectoryCoefficients& coeffs, double t);

/// Integral of |jerk|^2 over the duration, Gauss-Legendre exact for the degree.
double smoothness_cost(const TrajectoryCoefficients& coeffs);

inline constexpr int kLimitSamples = 50;

/// Per axis and sample: max(0, (a - a_min)(a - a_max)) + max(0, (v + v_max)(v - v_max)).
double limit_penalty(const TrajectoryCoefficients& coeffs, const LimitSpec& limits, int samples = kLimitSamples);

/// Sum over interior control points of |c_{i-1} - 2 c_i + c_{i+1}|.
double second_difference_cost(const TrajectoryCoefficients& coeffs);

/// Orthogonal projection onto the six boundary constraints. For degree >= 5
/// they pin exactly the first and last three control points per axis.
void project_boundary(TrajectoryCoefficients& coeffs, const BoundaryConditions& boundary);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights);

/// CSV rows t,x,y,z,vx,vy,vz,ax,ay,az sampled every dt.
void write_trajectory_csv(const TrajectoryCoefficients& coeffs, const std::string& path, double dt = 0.05);

}  // namespace ccv
