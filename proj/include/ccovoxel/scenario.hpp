#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "ccovoxel/backend.hpp"
#include "ccovoxel/frontend.hpp"
#include "ccovoxel/uncertainty.hpp"
#include "ccovoxel/world.hpp"

namespace ccv {

/// Fit of the frontend path to the backend's polynomial.
struct FitConfig {
  int degree = kDefaultDegree;
  /// Spacing of the waypoints sampled from the frontend path.
  double waypoint_dt = 0.1;
};

struct PlannerConfig {
  SearchConfig frontend;
  CemConfig backend;
  FitConfig fit;
  BandwidthPolicy bandwidth;
  std::size_t samples_per_point = kDefaultSamplesPerPoint;
  /// Inflation multiplier of the bounding-volume baseline.
  double bounding_volume_k = 2.0;
  /// Optional autoencoder file used for the latent MMD path.
  std::string encoder_path;
  double latent_bandwidth = 0.1;
};

struct Scenario {
  std::string name;
  WorldSpec world;
  double distance_clamp = kDefaultDistanceClamp;
  /// Standard deviation of the point jitter applied when sensing the map.
  double map_noise_sigma = 0.2;
  NoiseModel noise = NoiseModel::gaussian(0.2);
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d goal = Eigen::Vector3d::Zero();
  double r_safe = 0.6;
  /// Ground-truth clearance below which a trial counts as a collision.
  double robot_radius = 0.6;
  int trials = 50;
  std::uint64_t seed = 0;
  PlannerConfig planner;
  /// Directory relative paths in the file resolve against.
  std::string base_dir = ".";
};

/// Parses a YAML scenario. Unknown keys are rejected so typos surface.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");

/// Checks the cross-field invariants; throws InvalidSpec.
void validate(const Scenario& s);

}  // namespace ccv
