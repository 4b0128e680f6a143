#pragma once

#include <cmath>
#include <span>
#include <variant>

#include <Eigen/Core>

#include "ccovoxel/uncertainty.hpp"

namespace ccv {

struct RbfKernel {
  double sigma = 1.0;
};

struct PolynomialKernel {
  int degree = 2;
  double offset = 1.0;
};

class KernelSpec {
 public:
  static KernelSpec rbf(double sigma);
  static KernelSpec polynomial(int degree, double offset);

  const std::variant<RbfKernel, PolynomialKernel>& kind() const { return kind_; }
  bool is_rbf() const { return std::holds_alternative<RbfKernel>(kind_); }
  /// RBF bandwidth; throws for non-RBF kernels.
  double sigma() const;

  double operator()(double x, double y) const {
    if (const auto* r = std::get_if<RbfKernel>(&kind_)) {
      const double d = x - y;
      return std::exp(-d * d / (2.0 * r->sigma * r->sigma));
    }
    const auto& p = std::get<PolynomialKernel>(kind_);
    return std::pow(x * y + p.offset, p.degree);
  }

  /// Multivariate form: exp(-|x - y|^2 / 2 sigma^2) or (x.y + c)^d.
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const {
    if (const auto* r = std::get_if<RbfKernel>(&kind_))
      return std::exp(-(x - y).squaredNorm() / (2.0 * r->sigma * r->sigma));
    const auto& p = std::get<PolynomialKernel>(kind_);
    return std::pow(x.dot(y) + p.offset, p.degree);
  }

 private:
  explicit KernelSpec(std::variant<RbfKernel, PolynomialKernel> k) : kind_(k) {}
  std::variant<RbfKernel, PolynomialKernel> kind_;
};

inline double kernel_eval(const KernelSpec& spec, double x, double y) { return spec(x, y); }

/// Embedding weights C_alpha (violation samples) and C_beta (Dirac samples).
struct WeightVectors {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  static WeightVectors uniform(std::size_t n);
  /// Throws unless both sum to 1 within 1e-9 and have equal length.
  void validate() const;
};

/// Run-time constant part of the matrix-form MMD. K_00 is k(0,0) everywhere,
/// so C_beta K_00 C_beta^T collapses to k(0,0) (sum beta)^2.
class MmdWorkspace {
 public:
  MmdWorkspace(const KernelSpec& spec, const WeightVectors& weights);

  std::size_t n() const { return n_; }
  const KernelSpec& spec() const { return spec_; }
  double dirac_term() const { return dirac_term_; }
  double beta_sum() const { return beta_sum_; }

 private:
  KernelSpec spec_;
  std::size_t n_;
  double beta_sum_;
  double dirac_term_;
};

/// Symmetric Gram matrix; evaluates only i <= j and mirrors, so exactly
/// n(n+1)/2 calls to `kernel`.
template <class Kernel>
Eigen::MatrixXd build_gram(std::span<const double> v, Kernel&& kernel) {
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double val = kernel(v[i], v[j]);
      k(i, j) = val;
      k(j, i) = val;
    }
  }
  return k;
}

Eigen::MatrixXd build_kff(const ViolationSamples& v, const KernelSpec& spec);

/// C_a K_ff C_a^T - 2 C_a K_f0 C_b^T + C_b K_00 C_b^T, clamped at zero.
double mmd_squared(const ViolationSamples& v, const WeightVectors& w, const MmdWorkspace& ws);

/// Literal double sums over the three inner products. Test oracle.
double mmd_squared_naive(const ViolationSamples& v, const WeightVectors& w, const KernelSpec& spec);

/// Uniform-weight MMD against the Dirac at zero. Zero samples are grouped, so
/// only the strictly positive violations cost kernel evaluations; the result
/// equals mmd_squared with uniform weights.
double mmd_to_dirac(std::span<const double> v, const KernelSpec& spec);

inline constexpr double kBandwidthFloor = 1e-3;

/// Median pairwise absolute difference over the pooled samples, floored.
/// Pools larger than max_points are thinned with a fixed stride.
double median_bandwidth(std::span<const double> pooled, double floor = kBandwidthFloor,
                        std::size_t max_points = 2000);

}  // namespace ccv
