#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hgr/errors.hpp"

namespace hgr {

template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;

using Point3d = Point3<double>;

/// Ego-frame point cloud. Only geometry is kept; extra LiDAR channels are dropped at load.
using PointCloud = std::vector<Point3d>;

struct VoxelIndex {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// Axis-aligned region of interest and its discretization.
///
/// Cell counts are always derived from bounds and resolutions. Construction
/// fails if a quotient is not an integer to within 1e-9.
class VoxelGridSpec {
 public:
  VoxelGridSpec(double x_min, double x_max, double y_min, double y_max, double z_min,
                double z_max, double delta_xy, double delta_z);

  /// The Occ3D-nuScenes layout: [-40,40)^2 x [-1,5.4) at 0.4 m, 200x200x16.
  static VoxelGridSpec occ3d();

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  double delta_xy() const { return delta_xy_; }
  double delta_z() const { return delta_z_; }

  /// z_min + k * delta_z. When both are short decimals (at most 9 places) the sum is
  /// formed in that decimal lattice and rounded once, so edge 7 of the Occ3D spec is
  /// the double nearest 1.8 rather than -1 + 7 * 0.4.
  double z_edge(int k) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  std::size_t bev_cells() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t voxels() const { return bev_cells() * nz_; }

  /// BEV linearization: ix * Y + iy.
  std::size_t bev_linear(int ix, int iy) const {
    return static_cast<std::size_t>(ix) * ny_ + iy;
  }
  /// Voxel linearization: (ix * Y + iy) * Z + iz.
  std::size_t voxel_linear(const VoxelIndex& v) const {
    return bev_linear(v.ix, v.iy) * nz_ + v.iz;
  }
  VoxelIndex voxel_from_linear(std::size_t linear) const;

  bool contains(const VoxelIndex& v) const {
    return v.ix >= 0 && v.ix < nx_ && v.iy >= 0 && v.iy < ny_ && v.iz >= 0 && v.iz < nz_;
  }

  /// Center of BEV cell (ix, iy) in the x-y plane.
  Eigen::Vector2d bev_center(int ix, int iy) const {
    return {x_min_ + (ix + 0.5) * delta_xy_, y_min_ + (iy + 0.5) * delta_xy_};
  }

  friend bool operator==(const VoxelGridSpec& a, const VoxelGridSpec& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.y_min_ == b.y_min_ &&
           a.y_max_ == b.y_max_ && a.z_min_ == b.z_min_ && a.z_max_ == b.z_max_ &&
           a.delta_xy_ == b.delta_xy_ && a.delta_z_ == b.delta_z_;
  }

 private:
  double x_min_, x_max_, y_min_, y_max_, z_min_, z_max_;
  double delta_xy_, delta_z_;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  int z_places_ = -1;
};

namespace detail {

template <typename Scalar>
std::optional<int> axis_cell(Scalar value, double lo, double hi, double step, int count) {
  if (!(value >= lo && value < hi)) return std::nullopt;
  const auto cell = static_cast<int>(std::floor((static_cast<double>(value) - lo) / step));
  // The quotient can round up to `count` for values a few ulps below `hi`.
  return cell < count ? cell : count - 1;
}

}  // namespace detail

/// Voxel containing `p`, or nothing if `p` lies outside the half-open box.
template <typename Scalar>
std::optional<VoxelIndex> voxel_index(const Point3<Scalar>& p, const VoxelGridSpec& spec) {
  const auto ix = detail::axis_cell(p.x(), spec.x_min(), spec.x_max(), spec.delta_xy(), spec.nx());
  const auto iy = detail::axis_cell(p.y(), spec.y_min(), spec.y_max(), spec.delta_xy(), spec.ny());
  const auto iz = detail::axis_cell(p.z(), spec.z_min(), spec.z_max(), spec.delta_z(), spec.nz());
  if (!ix || !iy || !iz) return std::nullopt;
  return VoxelIndex{*ix, *iy, *iz};
}

/// Center of voxel `idx`. Throws std::out_of_range when idx is outside the grid.
Point3d voxel_center(const VoxelIndex& idx, const VoxelGridSpec& spec);

}  // namespace hgr
