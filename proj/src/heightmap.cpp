#include "hgr/heightmap.hpp"

#include <bit>
#include <string>

#include "hgr/parallel.hpp"

namespace hgr {

bool identical(const HeightMap& a, const HeightMap& b) {
  if (!(a.spec == b.spec) || (a.valid != b.valid).any()) return false;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    if (a.valid.data()[i] &&
        std::bit_cast<std::uint64_t>(a.values.data()[i]) !=
            std::bit_cast<std::uint64_t>(b.values.data()[i])) {
      return false;
    }
  }
  return true;
}

SemanticVoxelGrid::SemanticVoxelGrid(VoxelGridSpec spec, int num_classes, std::uint8_t free_class)
    : spec_(spec), num_classes_(num_classes), free_(free_class),
      labels_(spec.voxels(), free_class) {
  if (num_classes < 0 || num_classes > 255) throw ConfigError("semantic grid: bad class count");
  if (free_class < num_classes) {
    throw ConfigError("semantic grid: free class collides with an object class");
  }
}

void SemanticVoxelGrid::set(const VoxelIndex& v, std::uint8_t label) {
  if (!known(label)) throw ConfigError("semantic grid: unknown label " + std::to_string(label));
  labels_[spec_.voxel_linear(v)] = label;
}

void SemanticVoxelGrid::assign(std::vector<std::uint8_t> labels) {
  if (labels.size() != spec_.voxels()) throw ShapeError("semantic grid: label count mismatch");
  for (auto l : labels) {
    if (!known(l)) throw ConfigError("semantic grid: unknown label " + std::to_string(l));
  }
  labels_ = std::move(labels);
}

BinaryOccupancyGrid build_occupancy(const PointCloud& points, const VoxelGridSpec& spec) {
  BinaryOccupancyGrid grid(spec);
  for (const auto& p : points) {
    if (auto idx = voxel_index(p, spec)) grid.set(*idx);
  }
  return grid;
}

namespace {

template <typename Occupied>
HeightMap collapse(const VoxelGridSpec& spec, Occupied&& occupied) {
  HeightMap h(spec);
  const int nz = spec.nz();
  parallel_for(spec.bev_cells(), [&](std::size_t cell) {
    const int ix = static_cast<int>(cell / spec.ny());
    const int iy = static_cast<int>(cell % spec.ny());
    const std::size_t base = cell * nz;
    for (int iz = nz - 1; iz >= 0; --iz) {
      if (occupied(base + iz)) {
        h.set(ix, iy, spec.z_edge(iz + 1));
        return;
      }
    }
  });
  return h;
}

}  // namespace

HeightMap collapse_height(const BinaryOccupancyGrid& grid) {
  const auto& bits = grid.bits();
  return collapse(grid.spec(), [&](std::size_t i) { return bits[i] != 0; });
}

HeightMap heightmap_from_points(const PointCloud& points, const VoxelGridSpec& spec) {
  return collapse_height(build_occupancy(points, spec));
}

HeightMap heightmap_from_semantic(const SemanticVoxelGrid& gt) {
  const auto& labels = gt.labels();
  const auto free = gt.free_class();
  return collapse(gt.spec(), [&](std::size_t i) { return labels[i] != free; });
}

}  // namespace hgr
