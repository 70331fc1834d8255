#include "hgr/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hgr {
namespace {

int derive_count(double lo, double hi, double step, const char* axis) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step))) {
    throw ConfigError(std::string("grid spec: non-finite bounds on ") + axis);
  }
  if (!(lo < hi)) throw ConfigError(std::string("grid spec: empty range on ") + axis);
  if (!(step > 0)) throw ConfigError(std::string("grid spec: non-positive resolution on ") + axis);
  const double quotient = (hi - lo) / step;
  const double rounded = std::round(quotient);
  if (std::abs(rounded - quotient) > 1e-9) {
    throw ConfigError(std::string("grid spec: extent on ") + axis +
                      " is not a whole number of cells");
  }
  if (rounded < 1 || rounded > 1 << 20) {
    throw ConfigError(std::string("grid spec: unsupported cell count on ") + axis);
  }
  return static_cast<int>(rounded);
}

constexpr std::array<double, 10> kPow10{1, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};

// Smallest p with v * 10^p integral, or -1.
int decimal_places(double v) {
  for (int p = 0; p < static_cast<int>(kPow10.size()); ++p) {
    const double s = v * kPow10[p];
    if (std::abs(s) > 0x1p52) return -1;
    if (std::abs(s - std::round(s)) <= 8 * std::numeric_limits<double>::epsilon() * std::abs(s)) return p;
  }
  return -1;
}

}  // namespace

VoxelGridSpec::VoxelGridSpec(double x_min, double x_max, double y_min, double y_max, double z_min,
                             double z_max, double delta_xy, double delta_z)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), z_min_(z_min), z_max_(z_max),
      delta_xy_(delta_xy), delta_z_(delta_z) {
  nx_ = derive_count(x_min, x_max, delta_xy, "x");
  ny_ = derive_count(y_min, y_max, delta_xy, "y");
  nz_ = derive_count(z_min, z_max, delta_z, "z");
  const int a = decimal_places(z_min), b = decimal_places(delta_z);
  if (a >= 0 && b >= 0) z_places_ = std::max(a, b);
}

double VoxelGridSpec::z_edge(int k) const {
  if (z_places_ < 0) return std::fma(k, delta_z_, z_min_);
  const double scale = kPow10[z_places_];
  return (std::round(z_min_ * scale) + k * std::round(delta_z_ * scale)) / scale;
}

VoxelGridSpec VoxelGridSpec::occ3d() { return {-40.0, 40.0, -40.0, 40.0, -1.0, 5.4, 0.4, 0.4}; }

VoxelIndex VoxelGridSpec::voxel_from_linear(std::size_t linear) const {
  const auto iz = static_cast<int>(linear % nz_);
  const std::size_t bev = linear / nz_;
  return {static_cast<int>(bev / ny_), static_cast<int>(bev % ny_), iz};
}

Point3d voxel_center(const VoxelIndex& idx, const VoxelGridSpec& spec) {
  if (!spec.contains(idx)) throw std::out_of_range("voxel_center: index outside the grid");
  return {spec.x_min() + (idx.ix + 0.5) * spec.delta_xy(),
          spec.y_min() + (idx.iy + 0.5) * spec.delta_xy(),
          spec.z_min() + (idx.iz + 0.5) * spec.delta_z()};
}

}  // namespace hgr
