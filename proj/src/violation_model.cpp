#include "ccovoxel/violation_model.hpp"

#include <algorithm>
#include <functional>

#include "ccovoxel/error.hpp"

namespace ccv {

ViolationModel::ViolationModel(const DistanceField& measured, NoiseModel noise, double r_safe,
                               std::size_t samples_per_point, KernelSpec kernel)
    : field_(&measured), noise_(std::move(noise)), r_safe_(r_safe), samples_(samples_per_point), kernel_(kernel) {
  if (!(r_safe > 0.0)) fail(ErrorCode::InvalidArgument, "r_safe must be > 0");
  if (samples_per_point == 0) fail(ErrorCode::InvalidArgument, "samples per point must be >= 1");
}

ViolationModel ViolationModel::with_kernel(KernelSpec kernel) const {
  ViolationModel copy = *this;
  copy.kernel_ = kernel;
  return copy;
}

ViolationModel ViolationModel::with_embedding(LatentEmbedding embedding) const {
  if (!embedding.encoder) fail(ErrorCode::InvalidArgument, "embedding needs an encoder");
  if (static_cast<std::size_t>(embedding.encoder->input_dim()) != samples_)
    fail(ErrorCode::DimensionMismatch, "encoder input dim must equal samples per point");
  ViolationModel copy = *this;
  copy.embedding_ = std::move(embedding);
  return copy;
}

ViolationSamples ViolationModel::violations(const Eigen::Vector3d& p, std::uint64_t stream) const {
  CounterRng rng(stream);
  return to_violations(sample_distances(*field_, p, noise_, samples_, rng), r_safe_);
}

double ViolationModel::mmd_of(const ViolationSamples& v) const {
  if (!embedding_) return mmd_to_dirac(v.values, kernel_);
  thread_local Eigen::VectorXd sorted;
  sorted = Eigen::Map<const Eigen::VectorXd>(v.values.data(), static_cast<Eigen::Index>(v.values.size()));
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
  const Eigen::VectorXd z = embedding_->encoder->encode(sorted);
  return mmd_latent(z, Eigen::VectorXd::Zero(z.size()), embedding_->kernel, embedding_->mode);
}

double ViolationModel::mmd(const Eigen::Vector3d& p, std::uint64_t stream) const {
  return mmd_of(violations(p, stream));
}

std::vector<double> ViolationModel::noise_offsets(std::uint64_t stream) const {
  CounterRng rng(stream);
  return sample_noise(noise_, samples_, rng);
}

ViolationSamples ViolationModel::violations(const Eigen::Vector3d& p, std::span<const double> offsets) const {
  if (offsets.size() != samples_) fail(ErrorCode::DimensionMismatch, "offset count differs from samples per point");
  const double measured = field_->query(p);
  DistanceSamples d;
  d.source = p;
  d.values.reserve(offsets.size());
  for (double o : offsets) d.values.push_back(measured + o);
  return to_violations(d, r_safe_);
}

double ViolationModel::mmd(const Eigen::Vector3d& p, std::span<const double> offsets) const {
  return mmd_of(violations(p, offsets));
}

KernelSpec resolve_kernel(const BandwidthPolicy& policy, std::span<const double> pooled) {
  if (!policy.median) return KernelSpec::rbf(policy.value);
  return KernelSpec::rbf(median_bandwidth(pooled, policy.value));
}

}  // namespace ccv
