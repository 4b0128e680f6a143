#include "ccovoxel/trajectory.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ccovoxel/error.hpp"
#include "ccovoxel/log.hpp"

namespace ccv {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double falling_factorial(int n, int r) {
  double f = 1.0;
  for (int i = 0; i < r; ++i) f *= (n - i);
  return f;
}

void check_unit(double s) {
  if (!(s >= 0.0 && s <= 1.0)) fail(ErrorCode::Domain, "normalized time outside [0, 1]");
}

double normalized(double t, double duration) {
  const double slack = 1e-9 * std::max(1.0, duration);
  if (!(t >= -slack && t <= duration + slack)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << duration << "]";
    fail(ErrorCode::Domain, os.str());
  }
  return std::clamp(t / duration, 0.0, 1.0);
}

}  // namespace

Eigen::VectorXd TrajectoryCoefficients::flat() const {
  return Eigen::Map<const Eigen::VectorXd>(control.data(), control.size());
}

TrajectoryCoefficients TrajectoryCoefficients::from_flat(const Eigen::VectorXd& flat, int degree, double duration) {
  if (flat.size() != 3 * (degree + 1)) fail(ErrorCode::DimensionMismatch, "flat coefficient length mismatch");
  TrajectoryCoefficients c;
  c.control = Eigen::Map<const Eigen::MatrixX3d>(flat.data(), degree + 1, 3);
  c.degree = degree;
  c.duration = duration;
  return c;
}

Eigen::VectorXd bernstein_basis(int degree, double s) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "degree must be >= 0");
  check_unit(s);
  Eigen::VectorXd b(degree + 1);
  for (int i = 0; i <= degree; ++i) b(i) = binomial(degree, i) * std::pow(s, i) * std::pow(1.0 - s, degree - i);
  return b;
}

Eigen::VectorXd bernstein_derivative_row(int degree, double s, int order, double duration) {
  if (order == 0) return bernstein_basis(degree, s);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(degree + 1);
  if (order > degree) return row;
  const Eigen::VectorXd low = bernstein_basis(degree - order, s);
  const double scale = falling_factorial(degree, order) / std::pow(duration, order);
  // d^r/ds^r sum c_j b_j^n = n!/(n-r)! sum_i (forward difference^r c)_i b_i^(n-r)
  for (int i = 0; i <= degree - order; ++i) {
    for (int k = 0; k <= order; ++k) {
      const double sign = ((order - k) % 2 == 0) ? 1.0 : -1.0;
      row(i + k) += scale * sign * binomial(order, k) * low(i);
    }
  }
  return row;
}

BasisMatrices build_basis_matrices(std::span<const double> times, int degree, double duration) {
  if (times.empty()) fail(ErrorCode::InvalidArgument, "need at least one sample time");
  if (!(duration > 0.0)) fail(ErrorCode::InvalidArgument, "duration must be > 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) fail(ErrorCode::InvalidArgument, "sample times must be ascending");
  BasisMatrices m;
  const auto rows = static_cast<Eigen::Index>(times.size());
  m.P.resize(rows, degree + 1);
  m.Pdot.resize(rows, degree + 1);
  m.Pddot.resize(rows, degree + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double s = normalized(times[static_cast<std::size_t>(r)], duration);
    m.P.row(r) = bernstein_basis(degree, s).transpose();
    m.Pdot.row(r) = bernstein_derivative_row(degree, s, 1, duration).transpose();
    m.Pddot.row(r) = bernstein_derivative_row(degree, s, 2, duration).transpose();
  }
  m.times.assign(times.begin(), times.end());
  m.duration = duration;
  m.degree = degree;
  return m;
}

FitReport fit_polynomial_report(const Eigen::MatrixX3d& waypoints, std::span<const double> times,
                                const BoundaryConditions& boundary, int degree, double duration) {
  if (waypoints.rows() < 2) fail(ErrorCode::InvalidArgument, "need at least two waypoints");
  if (static_cast<std::size_t>(waypoints.rows()) != times.size())
    fail(ErrorCode::DimensionMismatch, "one time per waypoint required");
  if (degree < 5) fail(ErrorCode::InvalidArgument, "degree must be >= 5 to meet six boundary constraints");
  if (!waypoints.allFinite()) fail(ErrorCode::InvalidArgument, "waypoints must be finite");

  const BasisMatrices basis = build_basis_matrices(times, degree, duration);
  const int nc = degree + 1;
  Eigen::MatrixXd a(6, nc);
  a.row(0) = bernstein_derivative_row(degree, 0.0, 0, duration).transpose();
  a.row(1) = bernstein_derivative_row(degree, 0.0, 1, duration).transpose();
  a.row(2) = bernstein_derivative_row(degree, 0.0, 2, duration).transpose();
  a.row(3) = bernstein_derivative_row(degree, 1.0, 0, duration).transpose();
  a.row(4) = bernstein_derivative_row(degree, 1.0, 1, duration).transpose();
  a.row(5) = bernstein_derivative_row(degree, 1.0, 2, duration).transpose();

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nc + 6, nc + 6);
  kkt.topLeftCorner(nc, nc) = basis.P.transpose() * basis.P;
  kkt.topRightCorner(nc, 6) = a.transpose();
  kkt.bottomLeftCorner(6, nc) = a;

  Eigen::MatrixXd rhs(nc + 6, 3);
  rhs.topRows(nc) = basis.P.transpose() * waypoints;
  rhs.row(nc + 0) = boundary.start_position.transpose();
  rhs.row(nc + 1) = boundary.start_velocity.transpose();
  rhs.row(nc + 2) = boundary.start_acceleration.transpose();
  rhs.row(nc + 3) = boundary.end_position.transpose();
  rhs.row(nc + 4) = boundary.end_velocity.transpose();
  rhs.row(nc + 5) = boundary.end_acceleration.transpose();

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd sol = lu.solve(rhs);
  if (!(rcond > 1e-14) || !sol.allFinite()) {
    std::ostringstream os;
    os << "KKT matrix is singular (condition estimate " << cond << ")";
    fail(ErrorCode::DegenerateFit, os.str());
  }
  if (cond > 1e10) {
    std::ostringstream os;
    os << "ill-conditioned KKT system, condition estimate " << cond;
    log_warning(os.str());
  }

  FitReport report;
  report.coefficients.control = sol.topRows(nc);
  report.coefficients.degree = degree;
  report.coefficients.duration = duration;
  report.condition_estimate = cond;
  report.kkt_residual = (kkt * sol - rhs).cwiseAbs().maxCoeff();
  return report;
}

TrajectoryCoefficients fit_polynomial(const Eigen::MatrixX3d& waypoints, std::span<const double> times,
                                      const BoundaryConditions& boundary, int degree, double duration) {
  return fit_polynomial_report(waypoints, times, boundary, degree, duration).coefficients;
}

TrajectoryCoefficients fit_polynomial(const Eigen::MatrixX3d& waypoints, const BoundaryConditions& boundary,
                                      int degree, double duration) {
  std::vector<double> times(static_cast<std::size_t>(waypoints.rows()));
  for (std::size_t i = 0; i < times.size(); ++i)
    times[i] = times.size() == 1 ? 0.0 : duration * static_cast<double>(i) / static_cast<double>(times.size() - 1);
  return fit_polynomial(waypoints, times, boundary, degree, duration);
}

TrajectoryPoint evaluate(const TrajectoryCoefficients& coeffs, double t) {
  const double s = normalized(t, coeffs.duration);
  TrajectoryPoint p;
  p.position = coeffs.control.transpose() * bernstein_basis(coeffs.degree, s);
  p.velocity = coeffs.control.transpose() * bernstein_derivative_row(coeffs.degree, s, 1, coeffs.duration);
  p.acceleration = coeffs.control.transpose() * bernstein_derivative_row(coeffs.degree, s, 2, coeffs.duration);
  return p;
}

Eigen::Vector3d evaluate_jerk(const TrajectoryCoefficients& coeffs, double t) {
  const double s = normalized(t, coeffs.duration);
  return coeffs.control.transpose() * bernstein_derivative_row(coeffs.degree, s, 3, coeffs.duration);
}

void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights) {
  if (points < 1) fail(ErrorCode::InvalidArgument, "need at least one quadrature point");
  nodes.assign(static_cast<std::size_t>(points), 0.0);
  weights.assign(static_cast<std::size_t>(points), 0.0);
  for (int i = 0; i < (points + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= points; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = points * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1, 1] to [0, 1].
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    nodes[static_cast<std::size_t>(points - 1 - i)] = 0.5 * (1.0 + x);
    weights[static_cast<std::size_t>(i)] = 0.5 * w;
    weights[static_cast<std::size_t>(points - 1 - i)] = 0.5 * w;
  }
}

double smoothness_cost(const TrajectoryCoefficients& coeffs) {
  if (coeffs.degree < 3) return 0.0;
  // |jerk|^2 has degree 2n - 6 in s; n - 2 nodes integrate 2n - 5 exactly.
  const int points = std::max(1, coeffs.degree - 2);
  thread_local std::vector<double> nodes, weights;
  thread_local int cached = -1;
  if (cached != points) {
    gauss_legendre(points, nodes, weights);
    cached = points;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Eigen::Vector3d j =
        coeffs.control.transpose() * bernstein_derivative_row(coeffs.degree, nodes[i], 3, coeffs.duration);
    acc += weights[i] * j.squaredNorm();
  }
  return acc * coeffs.duration;
}

double limit_penalty(const TrajectoryCoefficients& coeffs, const LimitSpec& limits, int samples) {
  if (samples < 2) fail(ErrorCode::InvalidArgument, "need at least two limit samples");
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / (samples - 1);
    const TrajectoryPoint p = evaluate(coeffs, s * coeffs.duration);
    for (int a = 0; a < 3; ++a) {
      const double acc = p.acceleration[a];
      const double vel = p.velocity[a];
      total += std::max(0.0, (acc - limits.a_min) * (acc - limits.a_max));
      total += std::max(0.0, (vel + limits.v_max) * (vel - limits.v_max));
    }
  }
  return total;
}

double second_difference_cost(const TrajectoryCoefficients& coeffs) {
  double total = 0.0;
  for (Eigen::Index i = 1; i + 1 < coeffs.control.rows(); ++i)
    total += (coeffs.control.row(i - 1) - 2.0 * coeffs.control.row(i) + coeffs.control.row(i + 1)).norm();
  return total;
}

void project_boundary(TrajectoryCoefficients& coeffs, const BoundaryConditions& b) {
  const int n = coeffs.degree;
  if (n < 5) fail(ErrorCode::InvalidArgument, "boundary projection needs degree >= 5");
  const double t = coeffs.duration;
  const double k1 = t / n;
  const double k2 = t * t / (static_cast<double>(n) * (n - 1));
  auto& c = coeffs.control;
  c.row(0) = b.start_position.transpose();
  c.row(1) = c.row(0) + k1 * b.start_velocity.transpose();
  c.row(2) = k2 * b.start_acceleration.transpose() + 2.0 * c.row(1) - c.row(0);
  c.row(n) = b.end_position.transpose();
  c.row(n - 1) = c.row(n) - k1 * b.end_velocity.transpose();
  c.row(n - 2) = k2 * b.end_acceleration.transpose() + 2.0 * c.row(n - 1) - c.row(n);
}

void write_trajectory_csv(const TrajectoryCoefficients& coeffs, const std::string& path, double dt) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  os << "t,x,y,z,vx,vy,vz,ax,ay,az\n" << std::setprecision(10);
  const int steps = std::max(1, static_cast<int>(std::ceil(coeffs.duration / dt)));
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(coeffs.duration, k * dt);
    const TrajectoryPoint p = evaluate(coeffs, t);
    os << t;
    for (int a = 0; a < 3; ++a) os << ',' << p.position[a];
    for (int a = 0; a < 3; ++a) os << ',' << p.velocity[a];
    for (int a = 0; a < 3; ++a) os << ',' << p.acceleration[a];
    os << '\n';
  }
}

}  // namespace ccv
