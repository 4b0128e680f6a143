#include "ccovoxel/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ccovoxel/error.hpp"
#include "ccovoxel/rng.hpp"

namespace ccv {

VoxelGrid::VoxelGrid(const Eigen::Vector3i& dims, double resolution, const Eigen::Vector3d& origin)
    : dims_(dims), resolution_(resolution), origin_(origin) {
  if ((dims.array() < 1).any()) fail(ErrorCode::InvalidSpec, "grid dims must be >= 1 per axis");
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    fail(ErrorCode::InvalidSpec, "grid resolution must be > 0");
  if (!origin.allFinite()) fail(ErrorCode::InvalidSpec, "grid origin must be finite");
  occupancy_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
}

Eigen::Vector3i VoxelGrid::unlinear(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims_.x());
  const auto ny = static_cast<std::size_t>(dims_.y());
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

Eigen::Vector3i VoxelGrid::voxel_of(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / resolution_;
  return {static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
          static_cast<int>(std::floor(u.z()))};
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------

DistanceField::DistanceField(const VoxelGrid& grid, std::vector<double> distance, double d_max_clamp)
    : dims_(grid.dims()),
      resolution_(grid.resolution()),
      origin_(grid.origin()),
      distance_(std::move(distance)),
      d_max_clamp_(d_max_clamp) {
  if (distance_.size() != grid.size())
    fail(ErrorCode::DimensionMismatch, "distance array does not match grid size");
}

double DistanceField::at(const Eigen::Vector3i& v) const {
  if ((v.array() < 0).any() || (v.array() >= dims_.array()).any())
    fail(ErrorCode::OutOfBounds, "voxel index outside distance field");
  return distance_[linear(v.x(), v.y(), v.z())];
}

bool DistanceField::queryable(const Eigen::Vector3d& p) const {
  if (!p.allFinite()) return false;
  const Eigen::Vector3d lo = origin_.array() - resolution_;
  const Eigen::Vector3d hi = (origin_ + dims_.cast<double>() * resolution_).array() + resolution_;
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

bool DistanceField::inside(const Eigen::Vector3d& p) const {
  if (!p.allFinite()) return false;
  const Eigen::Vector3d hi = origin_ + dims_.cast<double>() * resolution_;
  return (p.array() >= origin_.array()).all() && (p.array() < hi.array()).all();
}

Eigen::Vector3i DistanceField::voxel_of(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / resolution_;
  return {static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
          static_cast<int>(std::floor(u.z()))};
}

double DistanceField::query(const Eigen::Vector3d& p) const {
  if (!queryable(p)) {
    std::ostringstream os;
    os << "query point (" << p.x() << ", " << p.y() << ", " << p.z() << ") outside distance field";
    fail(ErrorCode::OutOfBounds, os.str());
  }
  // Continuous index in voxel-center coordinates.
  const Eigen::Vector3d u = (p - origin_) / resolution_ - Eigen::Vector3d::Constant(0.5);
  int i0[3];
  double f[3];
  for (int a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(dims_[a] - 1);
    const double c = std::clamp(u[a], 0.0, hi);
    int base = static_cast<int>(std::floor(c));
    if (base >= dims_[a] - 1) base = std::max(dims_[a] - 2, 0);
    i0[a] = base;
    f[a] = dims_[a] == 1 ? 0.0 : c - base;
  }
  auto val = [&](int dx, int dy, int dz) {
    const int x = std::min(i0[0] + dx, dims_.x() - 1);
    const int y = std::min(i0[1] + dy, dims_.y() - 1);
    const int z = std::min(i0[2] + dz, dims_.z() - 1);
    return distance_[linear(x, y, z)];
  };
  const double c00 = val(0, 0, 0) * (1 - f[0]) + val(1, 0, 0) * f[0];
  const double c10 = val(0, 1, 0) * (1 - f[0]) + val(1, 1, 0) * f[0];
  const double c01 = val(0, 0, 1) * (1 - f[0]) + val(1, 0, 1) * f[0];
  const double c11 = val(0, 1, 1) * (1 - f[0]) + val(1, 1, 1) * f[0];
  const double c0 = c00 * (1 - f[1]) + c10 * f[1];
  const double c1 = c01 * (1 - f[1]) + c11 * f[1];
  return c0 * (1 - f[2]) + c1 * f[2];
}

double query_distance(const DistanceField& field, const Eigen::Vector3d& point) {
  return field.query(point);
}

// ---------------------------------------------------------------------------
// Exact separable squared EDT (lower envelope of parabolas per 1-D line).

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f holds squared distances along one line (inf = no site). Writes the 1-D
// transform into out. v and z are scratch buffers sized >= n and n + 1.
void edt_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    // z[0] is -inf, so k never drops below zero.
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out, out + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = static_cast<double>(q - v[j]);
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

DistanceField compute_edt(const VoxelGrid& grid, double d_max_clamp) {
  if (!(d_max_clamp > 0.0)) fail(ErrorCode::InvalidArgument, "d_max_clamp must be > 0");
  const Eigen::Vector3i& dims = grid.dims();
  const std::size_t total = grid.size();
  std::vector<double> sq(total);
  for (std::size_t i = 0; i < total; ++i) sq[i] = grid.occupancy()[i] ? 0.0 : kInf;

  const int max_dim = dims.maxCoeff();
  std::vector<double> line(max_dim), out(max_dim);
  std::vector<int> v(max_dim);
  std::vector<double> z(max_dim + 1);

  const std::size_t sx = 1;
  const std::size_t sy = static_cast<std::size_t>(dims.x());
  const std::size_t sz = sy * static_cast<std::size_t>(dims.y());
  const std::size_t strides[3] = {sx, sy, sz};

  for (int axis = 0; axis < 3; ++axis) {
    const int n = dims[axis];
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (int i = 0; i < dims[a1]; ++i) {
      for (int j = 0; j < dims[a2]; ++j) {
        const std::size_t base = static_cast<std::size_t>(i) * strides[a1] +
                                 static_cast<std::size_t>(j) * strides[a2];
        for (int q = 0; q < n; ++q) line[q] = sq[base + q * strides[axis]];
        edt_1d(line.data(), out.data(), n, v, z);
        for (int q = 0; q < n; ++q) sq[base + q * strides[axis]] = out[q];
      }
    }
  }

  std::vector<double> dist(total);
  for (std::size_t i = 0; i < total; ++i) {
    dist[i] = sq[i] == kInf ? d_max_clamp : std::min(std::sqrt(sq[i]) * grid.resolution(), d_max_clamp);
  }
  return DistanceField(grid, std::move(dist), d_max_clamp);
}

// ---------------------------------------------------------------------------
// World generation.

namespace {

void fill_box(VoxelGrid& grid, const BoxObstacle& box) {
  const Eigen::Vector3i lo = grid.voxel_of(box.min_corner).cwiseMax(0);
  const Eigen::Vector3i hi = grid.voxel_of(box.max_corner).cwiseMin(grid.dims() - Eigen::Vector3i::Ones());
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        const Eigen::Vector3d c = grid.center(v);
        if ((c.array() >= box.min_corner.array()).all() && (c.array() <= box.max_corner.array()).all())
          grid.set_occupied(v, true);
      }
}

void fill_cylinder(VoxelGrid& grid, const CylinderObstacle& cyl) {
  const Eigen::Vector3d lo3(cyl.center.x() - cyl.radius, cyl.center.y() - cyl.radius, cyl.z_min);
  const Eigen::Vector3d hi3(cyl.center.x() + cyl.radius, cyl.center.y() + cyl.radius, cyl.z_max);
  const Eigen::Vector3i lo = grid.voxel_of(lo3).cwiseMax(0);
  const Eigen::Vector3i hi = grid.voxel_of(hi3).cwiseMin(grid.dims() - Eigen::Vector3i::Ones());
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Eigen::Vector3i v(x, y, z);
        const Eigen::Vector3d c = grid.center(v);
        if (c.z() < cyl.z_min || c.z() > cyl.z_max) continue;
        if ((c.head<2>() - cyl.center).squaredNorm() <= cyl.radius * cyl.radius) grid.set_occupied(v, true);
      }
}

// Full-height pillars until the xy footprint fraction reaches the density.
void populate_box_cylinder(VoxelGrid& grid, const WorldSpec& spec, CounterRng& rng) {
  if (spec.density <= 0.0) return;
  const double area = spec.extent.x() * spec.extent.y();
  const double z_top = spec.origin.z() + spec.extent.z();
  double covered = 0.0;
  for (int attempt = 0; attempt < 10000 && covered < spec.density * area; ++attempt) {
    const double cx = spec.origin.x() + rng.uniform() * spec.extent.x();
    const double cy = spec.origin.y() + rng.uniform() * spec.extent.y();
    if (rng.uniform() < 0.5) {
      const double r = 0.5 + rng.uniform() * 0.75;
      fill_cylinder(grid, {{cx, cy}, r, spec.origin.z(), z_top});
      covered += M_PI * r * r;
    } else {
      const double hx = 0.5 + rng.uniform() * 0.75;
      const double hy = 0.5 + rng.uniform() * 0.75;
      fill_box(grid, {{cx - hx, cy - hy, spec.origin.z()}, {cx + hx, cy + hy, z_top}});
      covered += 4.0 * hx * hy;
    }
  }
}

// Walls across x, spaced along y, built from 1 m panels that are solid with
// probability `density`. Each wall then gets one square opening, snapped to
// the voxel lattice.
void populate_wall_grid(VoxelGrid& grid, const WorldSpec& spec, CounterRng& rng) {
  if (spec.density <= 0.0) return;
  constexpr double kSpacing = 6.0;
  constexpr double kThickness = 1.5;
  constexpr double kPanel = 1.0;
  const int nx = std::max(1, static_cast<int>(std::floor(spec.extent.x() / kPanel)));
  const int nz = std::max(1, static_cast<int>(std::floor(spec.extent.z() / kPanel)));
  const double res = spec.resolution;
  auto snap = [&](double v) { return std::round(v / res) * res; };
  for (double wy = spec.origin.y() + kSpacing; wy + kThickness < spec.origin.y() + spec.extent.y() - 2.0;
       wy += kSpacing) {
    for (int px = 0; px < nx; ++px) {
      for (int pz = 0; pz < nz; ++pz) {
        if (rng.uniform() >= spec.density) continue;
        const Eigen::Vector3d lo(spec.origin.x() + px * kPanel, wy, spec.origin.z() + pz * kPanel);
        fill_box(grid, {lo, lo + Eigen::Vector3d(kPanel, kThickness, kPanel)});
      }
    }
    const double ox = snap(rng.uniform() * std::max(0.0, spec.extent.x() - spec.opening));
    const double oz = snap(rng.uniform() * std::max(0.0, spec.extent.z() - spec.opening));
    const Eigen::Vector3i lo = grid.voxel_of(spec.origin + Eigen::Vector3d(ox + 0.5 * res, 0.0, oz + 0.5 * res));
    const int side = std::max(1, static_cast<int>(std::lround(spec.opening / res)));
    const int y0 = grid.voxel_of({spec.origin.x(), wy, spec.origin.z()}).y();
    const int y1 = grid.voxel_of({spec.origin.x(), wy + kThickness, spec.origin.z()}).y();
    for (int z = lo.z(); z < lo.z() + side; ++z)
      for (int y = y0 - 1; y <= y1; ++y)
        for (int x = lo.x(); x < lo.x() + side; ++x)
          if (grid.contains({x, y, z})) grid.set_occupied({x, y, z}, false);
  }
}

}  // namespace

VoxelGrid generate_world(const WorldSpec& spec) {
  if (!spec.extent.allFinite() || (spec.extent.array() <= 0.0).any())
    fail(ErrorCode::InvalidSpec, "world extent must be > 0 per axis");
  if (!(spec.resolution > 0.0)) fail(ErrorCode::InvalidSpec, "world resolution must be > 0");
  if (!(spec.density >= 0.0 && spec.density <= 1.0))
    fail(ErrorCode::InvalidSpec, "world density must lie in [0, 1]");
  if (!(spec.opening > 0.0)) fail(ErrorCode::InvalidSpec, "wall opening must be > 0");
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(std::lround(spec.extent[a] / spec.resolution));
  if ((dims.array() < 3).any()) fail(ErrorCode::InvalidSpec, "world extent must span at least 3 voxels per axis");

  VoxelGrid grid(dims, spec.resolution, spec.origin);
  CounterRng rng(derive_seed({spec.seed, 0x776f726c64ULL}));
  switch (spec.archetype) {
    case Archetype::BoxCylinder: populate_box_cylinder(grid, spec, rng); break;
    case Archetype::WallGrid: populate_wall_grid(grid, spec, rng); break;
    case Archetype::Custom: break;
  }
  for (const auto& b : spec.boxes) fill_box(grid, b);
  for (const auto& c : spec.cylinders) fill_cylinder(grid, c);

  const double r2 = spec.keep_free_radius * spec.keep_free_radius;
  for (const Eigen::Vector3d& p : spec.keep_free) {
    const int reach = static_cast<int>(std::ceil(spec.keep_free_radius / spec.resolution)) + 1;
    const Eigen::Vector3i c = grid.voxel_of(p);
    for (int z = c.z() - reach; z <= c.z() + reach; ++z)
      for (int y = c.y() - reach; y <= c.y() + reach; ++y)
        for (int x = c.x() - reach; x <= c.x() + reach; ++x) {
          const Eigen::Vector3i v(x, y, z);
          if (grid.contains(v) && (grid.center(v) - p).squaredNorm() <= r2) grid.set_occupied(v, false);
        }
  }
  return grid;
}

VoxelGrid corrupt_grid(const VoxelGrid& grid, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  if (noise_sigma == 0.0) return grid;

  const Eigen::Vector3i& dims = grid.dims();
  const Eigen::Vector3i steps[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  auto is_surface = [&](const Eigen::Vector3i& v) {
    for (const auto& s : steps) {
      const Eigen::Vector3i n = v + s;
      // Grid faces are not observable surfaces.
      if (grid.contains(n) && !grid.occupied(n)) return true;
    }
    return false;
  };

  VoxelGrid out(dims, grid.resolution(), grid.origin());
  std::vector<Eigen::Vector3i> surface;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.occupancy()[i]) continue;
    const Eigen::Vector3i v = grid.unlinear(i);
    if (is_surface(v))
      surface.push_back(v);
    else
      out.set_occupied(v, true);
  }
  CounterRng rng(derive_seed({seed, 0x6e6f697365ULL}));
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (const Eigen::Vector3i& v : surface) {
    const Eigen::Vector3d p = grid.center(v) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    const Eigen::Vector3i w = grid.voxel_of(p);
    if (grid.contains(w)) out.set_occupied(w, true);
  }
  return out;
}

}  // namespace ccv
