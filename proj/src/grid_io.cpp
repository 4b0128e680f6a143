#include <cstring>
#include <fstream>

#include "ccovoxel/error.hpp"
#include "ccovoxel/world.hpp"

namespace ccv {

namespace {

constexpr char kMagic[4] = {'C', 'C', 'V', 'G'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  // Host is assumed little-endian; the format is little-endian.
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) fail(ErrorCode::Parse, "truncated grid file header");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_grid(const VoxelGrid& grid, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  for (int a = 0; a < 3; ++a) put<std::int32_t>(os, grid.dims()[a]);
  put<double>(os, grid.resolution());
  for (int a = 0; a < 3; ++a) put<double>(os, grid.origin()[a]);

  std::vector<char> packed((grid.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.occupancy()[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1u << (i % 8)));
  os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!os) fail(ErrorCode::Io, "failed writing " + path);
}

VoxelGrid load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::Parse, path + ": not a grid file");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) fail(ErrorCode::Parse, path + ": unsupported grid version " + std::to_string(version));
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a) dims[a] = get<std::int32_t>(is);
  const double res = get<double>(is);
  Eigen::Vector3d origin;
  for (int a = 0; a < 3; ++a) origin[a] = get<double>(is);
  VoxelGrid grid(dims, res, origin);

  std::vector<char> packed((grid.size() + 7) / 8);
  is.read(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!is) fail(ErrorCode::Parse, path + ": truncated occupancy body");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if ((static_cast<unsigned char>(packed[i / 8]) >> (i % 8)) & 1u) grid.set_occupied(grid.unlinear(i), true);
  return grid;
}

}  // namespace ccv
