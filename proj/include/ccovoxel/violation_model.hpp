#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>
#include <optional>

#include <Eigen/Core>

#include "ccovoxel/embedding.hpp"
#include "ccovoxel/rkhs.hpp"
#include "ccovoxel/uncertainty.hpp"
#include "ccovoxel/world.hpp"

namespace ccv {

/// How the RBF bandwidth is chosen for a planning run.
struct BandwidthPolicy {
  /// Median heuristic over the first batch a planner evaluates, then frozen.
  bool median = true;
  /// Used directly when median is false; otherwise the floor.
  double value = kBandwidthFloor;
};

/// Optional low-dimensional path: sort the violation samples (they are
/// i.i.d., so the order carries no information), encode, and compare against
/// the encoded Dirac (zero) in the latent space.
struct LatentEmbedding {
  std::shared_ptr<const Autoencoder> encoder;
  KernelSpec kernel = KernelSpec::rbf(1.0);
  LatentMode mode = LatentMode::CoordinatesAsSamples;
};

/// Everything a planner may know about collision risk at a point: the
/// measured (noisy) field, the additive distance-noise model, and the MMD
/// surrogate built on top. Never holds ground truth.
class ViolationModel {
 public:
  ViolationModel(const DistanceField& measured, NoiseModel noise, double r_safe,
                 std::size_t samples_per_point = kDefaultSamplesPerPoint, KernelSpec kernel = KernelSpec::rbf(kBandwidthFloor));

  const DistanceField& field() const { return *field_; }
  const NoiseModel& noise() const { return noise_; }
  double r_safe() const { return r_safe_; }
  std::size_t samples_per_point() const { return samples_; }
  const KernelSpec& kernel() const { return kernel_; }

  ViolationModel with_kernel(KernelSpec kernel) const;
  ViolationModel with_embedding(LatentEmbedding embedding) const;

  bool queryable(const Eigen::Vector3d& p) const { return field_->queryable(p); }
  double measured_distance(const Eigen::Vector3d& p) const { return field_->query(p); }

  /// Violation samples at p drawn from the stream identified by `stream`.
  ViolationSamples violations(const Eigen::Vector3d& p, std::uint64_t stream) const;
  /// MMD^2 between the violation distribution at p and the Dirac at zero.
  double mmd(const Eigen::Vector3d& p, std::uint64_t stream) const;
  /// Noise draws of a stream; they do not depend on the query point, so
  /// callers may cache them and pass them to the overloads below.
  std::vector<double> noise_offsets(std::uint64_t stream) const;
  ViolationSamples violations(const Eigen::Vector3d& p, std::span<const double> offsets) const;
  double mmd(const Eigen::Vector3d& p, std::span<const double> offsets) const;
  double mmd_of(const ViolationSamples& v) const;

 private:
  const DistanceField* field_;
  NoiseModel noise_;
  double r_safe_;
  std::size_t samples_;
  KernelSpec kernel_;
  std::optional<LatentEmbedding> embedding_;
};

/// Resolves a bandwidth policy against a pooled batch of violation values.
KernelSpec resolve_kernel(const BandwidthPolicy& policy, std::span<const double> pooled);

}  // namespace ccv
