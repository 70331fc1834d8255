#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hgr/grid.hpp"

namespace hgr {

/// X x Y grid in BEV linearization (row = ix, column = iy).
template <typename T>
using BevArray = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// X x Y x Z occupancy bits, one byte per voxel, voxel linearization of the spec.
class BinaryOccupancyGrid {
 public:
  explicit BinaryOccupancyGrid(VoxelGridSpec spec)
      : spec_(spec), bits_(spec.voxels(), 0) {}

  const VoxelGridSpec& spec() const { return spec_; }

  bool at(const VoxelIndex& v) const { return bits_[spec_.voxel_linear(v)] != 0; }
  void set(const VoxelIndex& v) { bits_[spec_.voxel_linear(v)] = 1; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const BinaryOccupancyGrid&, const BinaryOccupancyGrid&) = default;

 private:
  VoxelGridSpec spec_;
  std::vector<std::uint8_t> bits_;
};

/// Per-pillar metric height with an explicit validity mask.
///
/// Values of invalid cells are unspecified in memory (kept as NaN) and are
/// never read by any consumer.
struct HeightMap {
  explicit HeightMap(VoxelGridSpec s)
      : spec(s),
        values(BevArray<double>::Constant(s.nx(), s.ny(), std::numeric_limits<double>::quiet_NaN())),
        valid(BevArray<bool>::Constant(s.nx(), s.ny(), false)) {}

  VoxelGridSpec spec;
  BevArray<double> values;
  BevArray<bool> valid;

  void set(int ix, int iy, double height) {
    values(ix, iy) = height;
    valid(ix, iy) = true;
  }
  void invalidate(int ix, int iy) {
    values(ix, iy) = std::numeric_limits<double>::quiet_NaN();
    valid(ix, iy) = false;
  }
  std::size_t valid_count() const { return static_cast<std::size_t>(valid.count()); }
};

/// Bit-identical comparison: same spec, same mask, same bits on valid cells.
bool identical(const HeightMap& a, const HeightMap& b);

/// Dense voxel labels; `free_class` marks empty space.
///
/// Known object classes are 0 .. num_classes-1.
class SemanticVoxelGrid {
 public:
  static constexpr std::uint8_t kDefaultFree = 255;

  SemanticVoxelGrid(VoxelGridSpec spec, int num_classes, std::uint8_t free_class = kDefaultFree);

  const VoxelGridSpec& spec() const { return spec_; }
  int num_classes() const { return num_classes_; }
  std::uint8_t free_class() const { return free_; }

  std::uint8_t at(const VoxelIndex& v) const { return labels_[spec_.voxel_linear(v)]; }
  /// Throws ConfigError for a label that is neither a known class nor free.
  void set(const VoxelIndex& v, std::uint8_t label);

  bool occupied(const VoxelIndex& v) const { return at(v) != free_; }

  const std::vector<std::uint8_t>& labels() const { return labels_; }
  /// Replaces all labels. Throws ShapeError on size mismatch, ConfigError on unknown labels.
  void assign(std::vector<std::uint8_t> labels);

  friend bool operator==(const SemanticVoxelGrid&, const SemanticVoxelGrid&) = default;

 private:
  bool known(std::uint8_t label) const { return label == free_ || label < num_classes_; }

  VoxelGridSpec spec_;
  int num_classes_;
  std::uint8_t free_;
  std::vector<std::uint8_t> labels_;
};

BinaryOccupancyGrid build_occupancy(const PointCloud& points, const VoxelGridSpec& spec);

/// Highest occupied voxel per pillar, reported as that voxel's upper boundary:
/// z_min + (iz* + 1) * delta_z. Empty pillars are invalid.
HeightMap collapse_height(const BinaryOccupancyGrid& grid);

HeightMap heightmap_from_points(const PointCloud& points, const VoxelGridSpec& spec);

/// Same extraction rule with "occupied" meaning label != free_class.
HeightMap heightmap_from_semantic(const SemanticVoxelGrid& gt);

}  // namespace hgr
