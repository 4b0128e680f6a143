#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ccovoxel/rng.hpp"
#include "ccovoxel/world.hpp"

namespace ccv {

struct GaussianNoise {
  double sigma = 0.0;
};

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 0.0;
};

struct MixtureNoise {
  std::vector<MixtureComponent> components;
};

/// Resampled pool of additive distance errors, e.g. a measured histogram.
struct EmpiricalNoise {
  std::vector<double> pool;
};

/// Additive noise on the measured closest-obstacle distance. Immutable once
/// built; sampling consumes only the caller's generator.
class NoiseModel {
 public:
  using Kind = std::variant<GaussianNoise, MixtureNoise, EmpiricalNoise>;

  static NoiseModel gaussian(double sigma);
  static NoiseModel mixture(std::vector<MixtureComponent> components);
  static NoiseModel empirical(std::vector<double> pool);
  /// Plain text, one value in meters per line; blank lines and '#' comments skipped.
  static NoiseModel load_empirical(const std::string& path);

  const Kind& kind() const { return kind_; }

  double sample(CounterRng& rng) const;
  /// Standard deviation of the noise.
  double stddev() const;

 private:
  explicit NoiseModel(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

struct DistanceSamples {
  std::vector<double> values;
  Eigen::Vector3d source = Eigen::Vector3d::Zero();
};

struct ViolationSamples {
  std::vector<double> values;
  double r_safe = 0.0;
};

inline constexpr std::size_t kDefaultSamplesPerPoint = 100;

DistanceSamples sample_distances(const DistanceField& field, const Eigen::Vector3d& point,
                                 const NoiseModel& model, std::size_t n, CounterRng& rng);

/// n additive noise draws; sample_distances_at adds them to the measured value.
std::vector<double> sample_noise(const NoiseModel& model, std::size_t n, CounterRng& rng);

/// Same as sample_distances but around an already-measured distance.
DistanceSamples sample_distances_at(double measured, const Eigen::Vector3d& point,
                                    const NoiseModel& model, std::size_t n, CounterRng& rng);

/// max(0, r_safe - max(0, d)) per sample.
ViolationSamples to_violations(const DistanceSamples& d, double r_safe);

/// Fraction of strictly positive violations.
double empirical_violation_probability(const ViolationSamples& v);

}  // namespace ccv
