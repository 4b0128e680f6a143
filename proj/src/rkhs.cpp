#include "ccovoxel/rkhs.hpp"

#include <algorithm>
#include <vector>

#include "ccovoxel/error.hpp"

namespace ccv {

namespace {

// The three terms cancel exactly only in exact arithmetic; residue below
// the tolerance is rounding, not discrepancy.
constexpr double kZeroTolerance = 1e-12;

double clamp_rounding(double v) { return v < kZeroTolerance ? 0.0 : v; }

}  // namespace

KernelSpec KernelSpec::rbf(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "rbf sigma must be > 0");
  return KernelSpec(RbfKernel{sigma});
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  if (degree < 1) fail(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
  if (!(offset >= 0.0)) fail(ErrorCode::InvalidArgument, "polynomial offset must be >= 0");
  return KernelSpec(PolynomialKernel{degree, offset});
}

double KernelSpec::sigma() const {
  if (const auto* r = std::get_if<RbfKernel>(&kind_)) return r->sigma;
  fail(ErrorCode::InvalidArgument, "kernel has no bandwidth");
}

WeightVectors WeightVectors::uniform(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "weight vectors need n >= 1");
  const auto len = static_cast<Eigen::Index>(n);
  const double w = 1.0 / static_cast<double>(n);
  return {Eigen::VectorXd::Constant(len, w), Eigen::VectorXd::Constant(len, w)};
}

void WeightVectors::validate() const {
  if (alpha.size() != beta.size()) fail(ErrorCode::DimensionMismatch, "alpha and beta lengths differ");
  if (std::abs(alpha.sum() - 1.0) > 1e-9 || std::abs(beta.sum() - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "weight vectors must each sum to 1");
}

MmdWorkspace::MmdWorkspace(const KernelSpec& spec, const WeightVectors& weights)
    : spec_(spec), n_(static_cast<std::size_t>(weights.beta.size())) {
  weights.validate();
  beta_sum_ = weights.beta.sum();
  dirac_term_ = spec_(0.0, 0.0) * beta_sum_ * beta_sum_;
}

Eigen::MatrixXd build_kff(const ViolationSamples& v, const KernelSpec& spec) {
  if (v.values.empty()) fail(ErrorCode::InvalidArgument, "need at least one violation sample");
  return build_gram(v.values, spec);
}

double mmd_squared(const ViolationSamples& v, const WeightVectors& w, const MmdWorkspace& ws) {
  const auto n = static_cast<Eigen::Index>(v.values.size());
  if (n == 0 || w.alpha.size() != n || w.beta.size() != n || ws.n() != v.values.size())
    fail(ErrorCode::DimensionMismatch, "violation samples, weights and workspace must share length n");

  const Eigen::MatrixXd kff = build_kff(v, ws.spec());
  // K_f0 has identical columns, so it is stored as a single vector.
  Eigen::VectorXd kf0(n);
  for (Eigen::Index i = 0; i < n; ++i) kf0(i) = ws.spec()(v.values[static_cast<std::size_t>(i)], 0.0);

  const double self = w.alpha.dot(kff * w.alpha);
  const double cross = w.alpha.dot(kf0) * ws.beta_sum();
  return clamp_rounding(self - 2.0 * cross + ws.dirac_term());
}

double mmd_squared_naive(const ViolationSamples& v, const WeightVectors& w, const KernelSpec& spec) {
  const std::size_t n = v.values.size();
  if (static_cast<std::size_t>(w.alpha.size()) != n || static_cast<std::size_t>(w.beta.size()) != n)
    fail(ErrorCode::DimensionMismatch, "weights must match sample count");
  double ff = 0.0, fd = 0.0, dd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      ff += w.alpha(ii) * w.alpha(jj) * spec(v.values[i], v.values[j]);
      fd += w.alpha(ii) * w.beta(jj) * spec(v.values[i], 0.0);
      dd += w.beta(ii) * w.beta(jj) * spec(0.0, 0.0);
    }
  }
  return clamp_rounding(ff - 2.0 * fd + dd);
}

double mmd_to_dirac(std::span<const double> v, const KernelSpec& spec) {
  if (v.empty()) fail(ErrorCode::InvalidArgument, "need at least one violation sample");
  thread_local std::vector<double> positive;
  positive.clear();
  for (double x : v)
    if (x != 0.0) positive.push_back(x);
  if (positive.empty()) return 0.0;

  const double n = static_cast<double>(v.size());
  const double zeros = n - static_cast<double>(positive.size());
  const double k00 = spec(0.0, 0.0);

  double cross_pos = 0.0;  // sum_u k(u, 0)
  double pos_pos = 0.0;    // sum_{u, u'} k(u, u')
  if (spec.is_rbf()) {
    // Past this gap the RBF term underflows to exactly zero, so sorted pairs
    // beyond it can be skipped without changing the result.
    std::sort(positive.begin(), positive.end());
    const double cutoff = spec.sigma() * std::sqrt(2.0 * 750.0);
    for (std::size_t i = 0; i < positive.size(); ++i) {
      cross_pos += spec(positive[i], 0.0);
      pos_pos += 1.0;
      for (std::size_t j = i + 1; j < positive.size() && positive[j] - positive[i] < cutoff; ++j)
        pos_pos += 2.0 * spec(positive[i], positive[j]);
    }
  } else {
    for (std::size_t i = 0; i < positive.size(); ++i) {
      cross_pos += spec(positive[i], 0.0);
      pos_pos += spec(positive[i], positive[i]);
      for (std::size_t j = i + 1; j < positive.size(); ++j) pos_pos += 2.0 * spec(positive[i], positive[j]);
    }
  }
  const double self = (zeros * zeros * k00 + 2.0 * zeros * cross_pos + pos_pos) / (n * n);
  const double cross = (zeros * k00 + cross_pos) / n;
  return clamp_rounding(self - 2.0 * cross + k00);
}

double median_bandwidth(std::span<const double> pooled, double floor, std::size_t max_points) {
  if (pooled.size() < 2) return floor;
  std::vector<double> pts;
  const std::size_t stride = (pooled.size() + max_points - 1) / max_points;
  for (std::size_t i = 0; i < pooled.size(); i += stride) pts.push_back(pooled[i]);
  std::vector<double> diffs;
  diffs.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) diffs.push_back(std::abs(pts[i] - pts[j]));
  if (diffs.empty()) return floor;
  auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  return std::max(*mid, floor);
}

}  // namespace ccv
