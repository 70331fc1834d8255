#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hgr/heightmap.hpp"

namespace hgr {

struct ClassCounts {
  std::uint64_t intersection = 0;
  std::uint64_t predicted = 0;
  std::uint64_t ground_truth = 0;
};

/// Per-class voxel tallies, indexed by class id. The free class is never tallied.
struct ConfusionCounts {
  std::vector<ClassCounts> classes;
};

/// With ignore_free, voxels whose ground truth is free are skipped entirely.
ConfusionCounts confusion(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt,
                          bool ignore_free = false);

struct MiouResult {
  double miou = 0.0;
  std::vector<std::optional<double>> per_class;  // nullopt when the class union is empty
};

/// IoU per class and their mean over classes with a non-empty union.
/// Throws UndefinedMetricError when every union is empty.
MiouResult miou(const ConfusionCounts& counts);

struct RayQuery {
  Point3d origin;
  Eigen::Vector3d direction;  // unit length
};

struct RayHit {
  std::uint8_t label;
  double depth;  // origin to the entry point of the hit voxel
  VoxelIndex voxel;
};

/// Incremental voxel traversal (Amanatides-Woo) from the ray origin, returning the
/// first non-free voxel. Rays starting outside the grid are clipped to its box first.
/// Throws DomainError for a non-finite origin or a direction that is not unit length.
std::optional<RayHit> ray_first_hit(const SemanticVoxelGrid& grid, const RayQuery& ray);

/// Voxels visited in order, up to and including the first occupied one.
std::vector<VoxelIndex> ray_traverse(const SemanticVoxelGrid& grid, const RayQuery& ray);

struct RayIouResult {
  std::vector<double> thresholds;
  std::vector<double> per_threshold;  // mean over classes with TP + FP + FN > 0
  double mean = 0.0;
};

/// First-hit class agreement with depth tolerance.
///
/// Per ray and threshold tau: a TP for class c when both grids hit class c and the
/// depths differ by at most tau. Otherwise a pred hit of class c is a FP for c
/// and a gt hit of class c is a FN for c.
/// Throws DomainError for an empty ray list, UndefinedMetricError when no ray hits anything.
RayIouResult rayiou(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt,
                    const std::vector<RayQuery>& rays,
                    const std::vector<double>& thresholds = {1.0, 2.0, 4.0});

/// Default ray set: one ray per (azimuth, elevation) pair from `origin`.
/// Azimuths cover [0, 2pi) evenly; elevations span [elev_min, elev_max] inclusive (radians).
std::vector<RayQuery> ray_fan(const Point3d& origin, int azimuths, int elevations,
                              double elev_min, double elev_max);

}  // namespace hgr
