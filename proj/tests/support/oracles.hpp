#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of them call into the code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ccovoxel/rng.hpp"
#include "ccovoxel/world.hpp"

namespace oracle {

inline ccv::VoxelGrid random_grid(const Eigen::Vector3i& dims, double density, std::uint64_t seed,
                                  double resolution = 1.0) {
  ccv::VoxelGrid g(dims, resolution);
  ccv::CounterRng rng(seed);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (rng.uniform() < density) g.set_occupied(g.unlinear(i), true);
  return g;
}

// All-pairs nearest occupied voxel center, clamped.
inline std::vector<double> brute_force_edt(const ccv::VoxelGrid& g, double clamp) {
  std::vector<Eigen::Vector3i> occ;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.occupancy()[i]) occ.push_back(g.unlinear(i));
  std::vector<double> out(g.size(), clamp);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Eigen::Vector3i v = g.unlinear(i);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : occ) {
      const Eigen::Vector3i d = v - o;
      best = std::min(best, static_cast<double>(d.squaredNorm()));
    }
    if (std::isfinite(best)) out[i] = std::min(std::sqrt(best) * g.resolution(), clamp);
  }
  return out;
}

inline double rbf(double x, double y, double sigma) {
  return std::exp(-(x - y) * (x - y) / (2.0 * sigma * sigma));
}

// Literal triple double sum of the squared MMD against the Dirac at zero.
inline double mmd_double_sum(const std::vector<double>& f, const std::vector<double>& a, const std::vector<double>& b,
                             double sigma) {
  double ff = 0.0, f0 = 0.0, z = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) {
      ff += a[i] * a[j] * rbf(f[i], f[j], sigma);
      f0 += a[i] * b[j] * rbf(f[i], 0.0, sigma);
      z += b[i] * b[j] * rbf(0.0, 0.0, sigma);
    }
  return ff - 2.0 * f0 + z;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline Eigen::RowVectorXd bernstein_row(int n, double s) {
  Eigen::RowVectorXd r(n + 1);
  for (int i = 0; i <= n; ++i) r(i) = binomial(n, i) * std::pow(s, i) * std::pow(1.0 - s, n - i);
  return r;
}

// Endpoint position, velocity and acceleration rows of a Bernstein curve.
inline Eigen::MatrixXd boundary_rows(int n, double duration) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, n + 1);
  const double d1 = n / duration;
  const double d2 = n * (n - 1) / (duration * duration);
  a(0, 0) = 1.0;
  a(1, 0) = -d1, a(1, 1) = d1;
  a(2, 0) = d2, a(2, 1) = -2.0 * d2, a(2, 2) = d2;
  a(3, n) = 1.0;
  a(4, n - 1) = -d1, a(4, n) = d1;
  a(5, n - 2) = d2, a(5, n - 1) = -2.0 * d2, a(5, n) = d2;
  return a;
}

// min |P c - x|^2 subject to A c = b by the null-space method: c = c_p + Z y
// with A Z = 0, then unconstrained least squares in y.
inline Eigen::VectorXd null_space_lsq(const Eigen::MatrixXd& P, const Eigen::VectorXd& x, const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& b) {
  const Eigen::Index m = A.rows(), n = A.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Q1 = Q.leftCols(m), Z = Q.rightCols(n - m);
  const Eigen::VectorXd cp = Q1 * R.transpose().triangularView<Eigen::Lower>().solve(b);
  const Eigen::VectorXd y = (P * Z).colPivHouseholderQr().solve(x - P * cp);
  return cp + Z * y;
}

// Classic RK4 on the double integrator with constant control.
inline void rk4_double_integrator(Eigen::Vector3d& p, Eigen::Vector3d& v, const Eigen::Vector3d& u, double tau,
                                  int steps) {
  const double h = tau / steps;
  for (int s = 0; s < steps; ++s) {
    const Eigen::Vector3d k1p = v, k1v = u;
    const Eigen::Vector3d k2p = v + 0.5 * h * k1v, k2v = u;
    const Eigen::Vector3d k3p = v + 0.5 * h * k2v, k3v = u;
    const Eigen::Vector3d k4p = v + h * k3v, k4v = u;
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace oracle
