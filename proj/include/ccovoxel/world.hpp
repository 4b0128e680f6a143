#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ccv {

/// Dense boolean occupancy over an axis-aligned box. Voxel (i, j, k) covers
/// [origin + (i, j, k) * resolution, origin + (i + 1, j + 1, k + 1) * resolution)
/// and its center sits half a voxel inside that corner. x varies fastest.
class VoxelGrid {
 public:
  VoxelGrid(const Eigen::Vector3i& dims, double resolution,
            const Eigen::Vector3d& origin = Eigen::Vector3d::Zero());

  const Eigen::Vector3i& dims() const { return dims_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  std::size_t size() const { return occupancy_.size(); }

  /// Upper corner of the grid in meters.
  Eigen::Vector3d max_corner() const { return origin_ + dims_.cast<double>() * resolution_; }

  bool contains(const Eigen::Vector3i& v) const {
    return (v.array() >= 0).all() && (v.array() < dims_.array()).all();
  }
  std::size_t linear(const Eigen::Vector3i& v) const {
    return static_cast<std::size_t>(v.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(v.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(v.z()));
  }
  Eigen::Vector3i unlinear(std::size_t idx) const;

  bool occupied(const Eigen::Vector3i& v) const { return occupancy_[linear(v)] != 0; }
  void set_occupied(const Eigen::Vector3i& v, bool value) { occupancy_[linear(v)] = value ? 1 : 0; }

  Eigen::Vector3d center(const Eigen::Vector3i& v) const {
    return origin_ + (v.cast<double>().array() + 0.5).matrix() * resolution_;
  }
  /// Voxel containing a point (may lie outside the grid).
  Eigen::Vector3i voxel_of(const Eigen::Vector3d& p) const;

  std::span<const std::uint8_t> occupancy() const { return occupancy_; }
  std::size_t occupied_count() const;

  bool operator==(const VoxelGrid& other) const = default;

 private:
  Eigen::Vector3i dims_;
  double resolution_;
  Eigen::Vector3d origin_;
  std::vector<std::uint8_t> occupancy_;
};

/// Closest-obstacle distance per voxel center, in meters, clamped at d_max.
class DistanceField {
 public:
  DistanceField(const VoxelGrid& grid, std::vector<double> distance, double d_max_clamp);

  const Eigen::Vector3i& dims() const { return dims_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  double d_max_clamp() const { return d_max_clamp_; }
  std::span<const double> values() const { return distance_; }

  double at(const Eigen::Vector3i& v) const;

  /// True if the point lies within the grid box inflated by one voxel.
  bool queryable(const Eigen::Vector3d& p) const;
  /// True if the point lies within the grid box itself.
  bool inside(const Eigen::Vector3d& p) const;
  Eigen::Vector3i voxel_of(const Eigen::Vector3d& p) const;

  /// Trilinear interpolation of the eight surrounding voxel-center values.
  /// Points up to one voxel outside the box are clamped onto it; anything
  /// farther throws ErrorCode::OutOfBounds.
  double query(const Eigen::Vector3d& p) const;

 private:
  std::size_t linear(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(z));
  }

  Eigen::Vector3i dims_;
  double resolution_;
  Eigen::Vector3d origin_;
  std::vector<double> distance_;
  double d_max_clamp_;
};

inline constexpr double kDefaultDistanceClamp = 10.0;

enum class Archetype { BoxCylinder, WallGrid, Custom };

struct BoxObstacle {
  Eigen::Vector3d min_corner;
  Eigen::Vector3d max_corner;
};

/// Vertical cylinder spanning [z_min, z_max].
struct CylinderObstacle {
  Eigen::Vector2d center;
  double radius = 0.5;
  double z_min = 0.0;
  double z_max = 0.0;
};

struct WorldSpec {
  Archetype archetype = Archetype::BoxCylinder;
  Eigen::Vector3d extent{30.0, 30.0, 7.0};
  double resolution = 0.5;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double density = 0.1;
  /// Side of the square opening cut into every wall (wall-grid only).
  double opening = 2.0;
  std::uint64_t seed = 0;
  /// Points around which a free sphere is carved (start and goal).
  std::vector<Eigen::Vector3d> keep_free;
  double keep_free_radius = 1.5;
  /// Explicit obstacles; the only source of occupancy for Custom, added on
  /// top of the generated layout otherwise.
  std::vector<BoxObstacle> boxes;
  std::vector<CylinderObstacle> cylinders;
};

VoxelGrid generate_world(const WorldSpec& spec);

DistanceField compute_edt(const VoxelGrid& grid, double d_max_clamp = kDefaultDistanceClamp);

double query_distance(const DistanceField& field, const Eigen::Vector3d& point);

/// Simulated sensing: every surface voxel emits its center as a point, the
/// point is displaced by isotropic N(0, sigma^2) noise and rasterized back.
/// Interior voxels are kept. sigma == 0 returns the input unchanged.
VoxelGrid corrupt_grid(const VoxelGrid& grid, double noise_sigma, std::uint64_t seed);

/// Versioned little-endian binary layout: "CCVG", u32 version, i32 dims[3],
/// f64 resolution, f64 origin[3], then bit-packed occupancy (LSB first,
/// linear voxel order).
void save_grid(const VoxelGrid& grid, const std::string& path);
VoxelGrid load_grid(const std::string& path);

}  // namespace ccv
