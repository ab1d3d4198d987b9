#include "scenegrasp/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"

namespace scenegrasp {

VoxelGrid::VoxelGrid(const Vec3& origin, double voxel_size, const CellIndex& dims,
                     std::size_t cell_budget)
    : origin_(origin), voxel_size_(voxel_size), dims_(dims) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw ConfigError("voxel size must be positive");
  if (!origin.allFinite()) throw ConfigError("voxel grid origin must be finite");
  for (int d : dims)
    if (d <= 0) throw ConfigError("voxel grid dimensions must be positive");
  const double total = static_cast<double>(dims[0]) * dims[1] * dims[2];
  if (total > static_cast<double>(cell_budget))
    throw ConfigError("voxel grid of " + std::to_string(static_cast<long long>(total)) +
                      " cells exceeds the budget of " + std::to_string(cell_budget) +
                      "; increase the voxel size");
  cells_.assign(static_cast<std::size_t>(total), 0);
}

VoxelGrid VoxelGrid::covering(const Aabb& region, double voxel_size, std::size_t cell_budget) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  if (!(region.volume() > 0.0)) throw ConfigError("voxelization region has zero volume");
  CellIndex dims{};
  for (int a = 0; a < 3; ++a) {
    const double n = std::ceil(region.extent()[a] / voxel_size);
    if (n > static_cast<double>(cell_budget))
      throw ConfigError("voxel grid exceeds the cell budget; increase the voxel size");
    dims[a] = std::max(1, static_cast<int>(n));
  }
  return VoxelGrid(region.min, voxel_size, dims, cell_budget);
}

CellIndex VoxelGrid::raw_cell_of(const Vec3& p) const {
  CellIndex c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - origin_[a]) / voxel_size_);
    c[a] = static_cast<int>(std::clamp(f, -1.0e9, 1.0e9));
  }
  return c;
}

std::optional<CellIndex> VoxelGrid::cell_of(const Vec3& p) const {
  if (!p.allFinite()) return std::nullopt;
  const CellIndex c = raw_cell_of(p);
  if (!in_range(c[0], c[1], c[2])) return std::nullopt;
  return c;
}

bool VoxelGrid::occupied_at(const Vec3& p) const {
  const auto c = cell_of(p);
  return c && occupied((*c)[0], (*c)[1], (*c)[2]);
}

Aabb VoxelGrid::cell_bounds(int i, int j, int k) const {
  // Both ends from the origin, so neighbouring cells share exact faces.
  return {origin_ + voxel_size_ * Vec3(i, j, k), origin_ + voxel_size_ * Vec3(i + 1, j + 1, k + 1)};
}

Aabb VoxelGrid::bounds() const {
  return {origin_, origin_ + voxel_size_ * Vec3(dims_[0], dims_[1], dims_[2])};
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool VoxelGrid::same_occupancy(const VoxelGrid& o) const {
  return origin_ == o.origin_ && voxel_size_ == o.voxel_size_ && dims_ == o.dims_ &&
         cells_ == o.cells_;
}

namespace {
constexpr char kMagic[8] = {'S', 'G', 'V', 'O', 'X', 'E', 'L', '1'};

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw FormatError("truncated voxel grid", pos);
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace

std::string encode_grid(const VoxelGrid& g) {
  std::string out(kMagic, sizeof(kMagic));
  for (int a = 0; a < 3; ++a) put<double>(out, g.origin()[a]);
  put<double>(out, g.voxel_size());
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims()[a]));
  put<std::uint8_t>(out, g.filled() ? 1 : 0);
  const auto& cells = g.cells();
  std::string bits((cells.size() + 7) / 8, '\0');
  for (std::size_t n = 0; n < cells.size(); ++n)
    if (cells[n]) bits[n >> 3] = static_cast<char>(bits[n >> 3] | (1u << (n & 7)));
  out += bits;
  return out;
}

VoxelGrid decode_grid(const std::string& in) {
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a voxel grid file (bad magic)", 0);
  std::size_t pos = sizeof(kMagic);
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = get<double>(in, pos);
  const double size = get<double>(in, pos);
  CellIndex dims{};
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(get<std::uint32_t>(in, pos));
  const bool filled = get<std::uint8_t>(in, pos) != 0;
  VoxelGrid g(origin, size, dims);
  g.set_filled(filled);
  auto& cells = g.cells();
  if (in.size() - pos != (cells.size() + 7) / 8)
    throw FormatError("voxel payload size does not match dims", pos);
  for (std::size_t n = 0; n < cells.size(); ++n)
    cells[n] = (static_cast<unsigned char>(in[pos + (n >> 3)]) >> (n & 7)) & 1u;
  return g;
}

void write_grid(const std::filesystem::path& path, const VoxelGrid& grid) {
  write_atomically(path, encode_grid(grid));
}

VoxelGrid read_grid(const std::filesystem::path& path) { return decode_grid(read_file(path)); }

nlohmann::json grid_to_json(const VoxelGrid& g) {
  if (g.cell_count() > 32u * 32u * 32u)
    throw ConfigError("JSON grid dump is limited to 32^3 cells");
  nlohmann::json occ = nlohmann::json::array();
  const auto& d = g.dims();
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i)
        if (g.occupied(i, j, k)) occ.push_back({i, j, k});
  return {{"origin", {g.origin().x(), g.origin().y(), g.origin().z()}},
          {"voxel_size", g.voxel_size()},
          {"dims", {d[0], d[1], d[2]}},
          {"filled", g.filled()},
          {"occupied", occ}};
}

// Akenine-Möller separating-axis test, closed (touching counts as overlap).
bool triangle_box_overlap(const Aabb& box, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Projections use raw coordinates and the box corners directly, so a
  // triangle lying exactly on a box face projects exactly onto it.
  const Vec3 e0 = b - a, e1 = c - b, e2 = a - c;
  auto separated = [&](const Vec3& axis) {
    double box_lo = 0.0, box_hi = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double p = axis[i] * box.min[i], q = axis[i] * box.max[i];
      box_lo += std::min(p, q);
      box_hi += std::max(p, q);
    }
    const double p0 = axis.dot(a), p1 = axis.dot(b), p2 = axis.dot(c);
    return std::max({p0, p1, p2}) < box_lo || std::min({p0, p1, p2}) > box_hi;
  };

  // Box face normals.
  for (int i = 0; i < 3; ++i)
    if (std::max({a[i], b[i], c[i]}) < box.min[i] || std::min({a[i], b[i], c[i]}) > box.max[i])
      return false;
  // Edge cross products.
  const Vec3 units[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& e : {e0, e1, e2})
    for (const Vec3& u : units)
      if (separated(u.cross(e))) return false;
  // Triangle normal.
  return !separated(e0.cross(e1));
}

bool triangle_box_overlap(const Vec3& center, const Vec3& h, const Vec3& a, const Vec3& b,
                          const Vec3& c) {
  return triangle_box_overlap(Aabb{center - h, center + h}, a, b, c);
}

}  // namespace scenegrasp
