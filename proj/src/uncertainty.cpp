#include "ccovoxel/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ccovoxel/error.hpp"

namespace ccv {

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "gaussian sigma must be >= 0");
  return NoiseModel(GaussianNoise{sigma});
}

NoiseModel NoiseModel::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) fail(ErrorCode::InvalidArgument, "mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0) || !(c.sigma >= 0.0) || !std::isfinite(c.mean))
      fail(ErrorCode::InvalidArgument, "mixture component has invalid weight, mean or sigma");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
  return NoiseModel(MixtureNoise{std::move(components)});
}

NoiseModel NoiseModel::empirical(std::vector<double> pool) {
  if (pool.empty()) fail(ErrorCode::InvalidArgument, "empirical noise pool is empty");
  for (double v : pool)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "empirical noise pool has a non-finite value");
  return NoiseModel(EmpiricalNoise{std::move(pool)});
}

NoiseModel NoiseModel::load_empirical(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open noise sample file " + path);
  std::vector<double> pool;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": expected a number");
    pool.push_back(v);
  }
  return empirical(std::move(pool));
}

double NoiseModel::sample(CounterRng& rng) const {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (k.sigma == 0.0) return 0.0;
          return std::normal_distribution<double>(0.0, k.sigma)(rng);
        } else if constexpr (std::is_same_v<T, MixtureNoise>) {
          const double u = rng.uniform();
          double acc = 0.0;
          const MixtureComponent* pick = &k.components.back();
          for (const auto& c : k.components) {
            acc += c.weight;
            if (u < acc) {
              pick = &c;
              break;
            }
          }
          if (pick->sigma == 0.0) return pick->mean;
          return std::normal_distribution<double>(pick->mean, pick->sigma)(rng);
        } else {
          const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k.pool.size()));
          return k.pool[std::min(idx, k.pool.size() - 1)];
        }
      },
      kind_);
}

double NoiseModel::stddev() const {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          return k.sigma;
        } else if constexpr (std::is_same_v<T, MixtureNoise>) {
          double mean = 0.0;
          for (const auto& c : k.components) mean += c.weight * c.mean;
          double var = 0.0;
          for (const auto& c : k.components) var += c.weight * (c.sigma * c.sigma + (c.mean - mean) * (c.mean - mean));
          return std::sqrt(var);
        } else {
          const double n = static_cast<double>(k.pool.size());
          const double mean = std::accumulate(k.pool.begin(), k.pool.end(), 0.0) / n;
          double var = 0.0;
          for (double v : k.pool) var += (v - mean) * (v - mean);
          return std::sqrt(var / n);
        }
      },
      kind_);
}

std::vector<double> sample_noise(const NoiseModel& model, std::size_t n, CounterRng& rng) {
  std::vector<double> out(n);
  // Gaussian fast path keeps one distribution object so paired draws are used.
  if (const auto* g = std::get_if<GaussianNoise>(&model.kind()); g && g->sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, g->sigma);
    for (double& v : out) v = noise(rng);
  } else {
    for (double& v : out) v = model.sample(rng);
  }
  return out;
}

DistanceSamples sample_distances_at(double measured, const Eigen::Vector3d& point, const NoiseModel& model,
                                    std::size_t n, CounterRng& rng) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be >= 1");
  DistanceSamples out;
  out.source = point;
  out.values = sample_noise(model, n, rng);
  for (double& v : out.values) v = measured + v;
  return out;
}

DistanceSamples sample_distances(const DistanceField& field, const Eigen::Vector3d& point,
                                 const NoiseModel& model, std::size_t n, CounterRng& rng) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be >= 1");
  return sample_distances_at(field.query(point), point, model, n, rng);
}

ViolationSamples to_violations(const DistanceSamples& d, double r_safe) {
  if (!(r_safe > 0.0)) fail(ErrorCode::InvalidArgument, "r_safe must be > 0");
  ViolationSamples v;
  v.r_safe = r_safe;
  v.values.resize(d.values.size());
  std::transform(d.values.begin(), d.values.end(), v.values.begin(),
                 [r_safe](double dist) { return std::max(0.0, r_safe - std::max(0.0, dist)); });
  return v;
}

double empirical_violation_probability(const ViolationSamples& v) {
  if (v.values.empty()) return 0.0;
  const auto positive = std::count_if(v.values.begin(), v.values.end(), [](double x) { return x > 0.0; });
  return static_cast<double>(positive) / static_cast<double>(v.values.size());
}

}  // namespace ccv
