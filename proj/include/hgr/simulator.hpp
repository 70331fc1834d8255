#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hgr/heightmap.hpp"
#include "hgr/projection.hpp"

namespace hgr {

struct Ground {
  double z_top = 0.0;
  std::uint8_t class_id = 0;
};

/// Box of size (length along local x, width along local y, height), rotated by yaw about +z.
struct SceneObject {
  Point3d center = Point3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double yaw = 0.0;
  std::uint8_t class_id = 0;

  Eigen::Vector3d to_local(const Point3d& p) const;
  bool contains(const Point3d& p) const;
  /// Eight corners in the ego frame.
  std::vector<Point3d> corners() const;
};

struct SceneSpec {
  Ground ground;
  std::vector<SceneObject> objects;

  /// Throws ConfigError for non-positive sizes or a class id equal to `free_class`.
  void validate(std::uint8_t free_class = SemanticVoxelGrid::kDefaultFree) const;
};

struct LidarSpec {
  Point3d origin = Point3d::Zero();
  double azimuth_min = 0.0, azimuth_max = 0.0;  // radians
  int azimuth_count = 1;
  double elevation_min = 0.0, elevation_max = 0.0;  // radians
  int elevation_count = 1;
  double max_range = 100.0;
  double noise_sigma_z = 0.0;
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Unit direction of ray (azimuth index, elevation index). Angles are inclusive linspaces.
  Eigen::Vector3d direction(int azimuth, int elevation) const;
};

struct SurfaceHit {
  Point3d point;
  double distance;
  std::uint8_t class_id;
};

/// Nearest hit on the ground plane or any box, within max_range.
std::optional<SurfaceHit> raycast_scene(const SceneSpec& scene, const Point3d& origin,
                                        const Eigen::Vector3d& direction,
                                        double max_range = std::numeric_limits<double>::infinity());

/// One ray per (azimuth, elevation). Hits are emitted in (azimuth, elevation) order,
/// z-perturbed by N(0, noise_sigma_z) and dropped with probability dropout_prob.
PointCloud simulate_lidar(const SceneSpec& scene, const LidarSpec& lidar);

/// Center-sampled labels: later objects win overlaps, then ground below z_top, else free.
SemanticVoxelGrid rasterize_gt(const SceneSpec& scene, const VoxelGridSpec& spec, int num_classes);

enum class SamplingMode { kUniform, kHeightGuided };

struct HitRecord {
  int ix, iy, j;
  double z;
  Point3d point;
  Eigen::Vector2d pixel;
  bool in_frustum;
  bool hit;
};

struct HitRateResult {
  double hit_rate = 0.0;
  std::size_t hits = 0;
  std::size_t total = 0;
  std::vector<HitRecord> records;
};

/// Projects reference points of every footprint cell into `camera`.
///
/// A footprint cell has its BEV center inside some object's rotated rectangle. A
/// point is a hit when it is in the frustum and inside the convex hull of that
/// object's projected corners. Uniform mode ignores `height_source`.
/// Throws DomainError when no BEV cell center falls inside any footprint.
HitRateResult hitrate_experiment(const SceneSpec& scene, const CameraModel& camera,
                                 const VoxelGridSpec& spec, const SamplingConfig& cfg,
                                 SamplingMode mode, const HeightMap& height_source);

struct HeightErrorStats {
  double mean_abs = 0.0;
  double mean = 0.0;
  std::size_t cells = 0;
  double bin_width = 0.0;
  int first_bin = 0;  // bin b covers [(first_bin + b - 0.5) * w, (first_bin + b + 0.5) * w)
  std::vector<std::size_t> histogram;
};

/// Statistics of h_lidar - h_gt over cells valid in both maps. Bins are delta_z wide.
HeightErrorStats height_error_stats(const HeightMap& h_lidar, const HeightMap& h_gt);

/// Convex hull (counter-clockwise, Andrew's monotone chain) and point-in-hull test.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts);
bool hull_contains(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p,
                   double eps = 1e-9);

/// Desk-scale reference setup on the Occ3D grid: one vehicle whose roof is at
/// z = 1.8 m, standing on the region floor z = -1 (ground class 0, vehicle class 1).
namespace canonical {

SceneSpec scene();
/// Side view from y = -12 m at z = 1 m, looking along +y at the vehicle.
CameraModel camera();
/// Mast-mounted sensor at (0, 0, 3) sweeping the vehicle roof and near face.
LidarSpec lidar(double noise_sigma_z = 0.0, std::uint64_t seed = 0);

}  // namespace canonical

}  // namespace hgr
