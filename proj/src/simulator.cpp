#include "hgr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hgr/hash.hpp"
#include "hgr/parallel.hpp"

namespace hgr {
namespace {

Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

double linspace_at(double lo, double hi, int count, int i) {
  return count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
}

// Entry distance of a ray into a box, or nothing on a miss. Origins inside the box hit at 0.
std::optional<double> intersect_box(const SceneObject& box, const Point3d& origin,
                                    const Eigen::Vector3d& dir) {
  const Eigen::Matrix3d rt = yaw_rotation(box.yaw).transpose();
  const Eigen::Vector3d o = rt * (origin - box.center);
  const Eigen::Vector3d d = rt * dir;
  const Eigen::Vector3d half = 0.5 * box.size;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::nullopt;
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return std::max(t_near, 0.0);
}

}  // namespace

Eigen::Vector3d SceneObject::to_local(const Point3d& p) const {
  return yaw_rotation(yaw).transpose() * (p - center);
}

bool SceneObject::contains(const Point3d& p) const {
  const Eigen::Vector3d local = to_local(p);
  return (local.cwiseAbs().array() <= 0.5 * size.array()).all();
}

std::vector<Point3d> SceneObject::corners() const {
  const Eigen::Matrix3d r = yaw_rotation(yaw);
  std::vector<Point3d> out;
  out.reserve(8);
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        const Eigen::Vector3d local(sx * 0.5 * size.x(), sy * 0.5 * size.y(), sz * 0.5 * size.z());
        out.emplace_back(center + r * local);
      }
    }
  }
  return out;
}

void SceneSpec::validate(std::uint8_t free_class) const {
  if (!std::isfinite(ground.z_top)) throw ConfigError("scene: ground height must be finite");
  if (ground.class_id == free_class) throw ConfigError("scene: ground uses the free class");
  for (const auto& o : objects) {
    if (!(o.size.array() > 0).all()) throw ConfigError("scene: object sizes must be positive");
    if (!o.center.allFinite() || !std::isfinite(o.yaw)) {
      throw ConfigError("scene: object pose must be finite");
    }
    if (o.class_id == free_class) throw ConfigError("scene: object uses the free class");
  }
}

void LidarSpec::validate() const {
  if (azimuth_count < 1 || elevation_count < 1) throw ConfigError("lidar: counts must be >= 1");
  if (!(max_range > 0)) throw ConfigError("lidar: max range must be positive");
  if (!(dropout_prob >= 0 && dropout_prob <= 1)) {
    throw ConfigError("lidar: dropout probability must lie in [0, 1]");
  }
  if (!(noise_sigma_z >= 0)) throw ConfigError("lidar: noise sigma must be non-negative");
  if (!origin.allFinite()) throw ConfigError("lidar: origin must be finite");
}

Eigen::Vector3d LidarSpec::direction(int azimuth, int elevation) const {
  const double az = linspace_at(azimuth_min, azimuth_max, azimuth_count, azimuth);
  const double el = linspace_at(elevation_min, elevation_max, elevation_count, elevation);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

std::optional<SurfaceHit> raycast_scene(const SceneSpec& scene, const Point3d& origin,
                                        const Eigen::Vector3d& direction, double max_range) {
  std::optional<SurfaceHit> best;
  auto consider = [&](double t, std::uint8_t cls, Point3d point) {
    if (t > max_range) return;
    if (!best || t < best->distance) best = SurfaceHit{point, t, cls};
  };

  // Everything at or below z_top is solid ground.
  if (origin.z() <= scene.ground.z_top) {
    consider(0.0, scene.ground.class_id, origin);
  } else if (direction.z() < 0.0) {
    const double t = (scene.ground.z_top - origin.z()) / direction.z();
    Point3d p = origin + t * direction;
    p.z() = scene.ground.z_top;
    consider(t, scene.ground.class_id, p);
  }
  for (const auto& obj : scene.objects) {
    if (auto t = intersect_box(obj, origin, direction)) {
      consider(*t, obj.class_id, origin + *t * direction);
    }
  }
  return best;
}

PointCloud simulate_lidar(const SceneSpec& scene, const LidarSpec& lidar) {
  lidar.validate();
  const std::size_t n = static_cast<std::size_t>(lidar.azimuth_count) * lidar.elevation_count;
  std::vector<std::optional<Point3d>> hits(n);
  parallel_for(n, [&](std::size_t r) {
    if (lidar.dropout_prob > 0.0 && to_unit(counter_hash(lidar.seed, r, 1)) < lidar.dropout_prob) {
      return;
    }
    const int a = static_cast<int>(r / lidar.elevation_count);
    const int e = static_cast<int>(r % lidar.elevation_count);
    const auto hit = raycast_scene(scene, lidar.origin, lidar.direction(a, e), lidar.max_range);
    if (!hit) return;
    Point3d p = hit->point;
    if (lidar.noise_sigma_z > 0.0) {
      p.z() += lidar.noise_sigma_z *
               to_normal(counter_hash(lidar.seed, r, 2), counter_hash(lidar.seed, r, 3));
    }
    hits[r] = p;
  });
  PointCloud cloud;
  for (auto& h : hits) {
    if (h) cloud.push_back(*h);
  }
  return cloud;
}

SemanticVoxelGrid rasterize_gt(const SceneSpec& scene, const VoxelGridSpec& spec, int num_classes) {
  SemanticVoxelGrid grid(spec, num_classes);
  scene.validate(grid.free_class());
  auto check = [&](std::uint8_t cls) {
    if (cls >= num_classes) {
      throw ConfigError("scene: class id " + std::to_string(cls) + " outside the vocabulary");
    }
  };
  check(scene.ground.class_id);
  for (const auto& o : scene.objects) check(o.class_id);

  std::vector<std::uint8_t> labels(spec.voxels(), grid.free_class());
  parallel_for(spec.voxels(), [&](std::size_t i) {
    const Point3d c = voxel_center(spec.voxel_from_linear(i), spec);
    for (auto it = scene.objects.rbegin(); it != scene.objects.rend(); ++it) {
      if (it->contains(c)) {
        labels[i] = it->class_id;
        return;
      }
    }
    if (c.z() <= scene.ground.z_top) labels[i] = scene.ground.class_id;
  });
  grid.assign(std::move(labels));
  return grid;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool hull_contains(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p, double eps) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d edge = b - a;
    const double cross = edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x());
    if (cross < -eps * edge.norm()) return false;
  }
  return true;
}

HitRateResult hitrate_experiment(const SceneSpec& scene, const CameraModel& camera,
                                 const VoxelGridSpec& spec, const SamplingConfig& cfg,
                                 SamplingMode mode, const HeightMap& height_source) {
  camera.validate();
  if (scene.objects.empty()) throw DomainError("hit rate: scene has no objects");
  if (mode == SamplingMode::kHeightGuided && !(height_source.spec == spec)) {
    throw ShapeError("hit rate: height map uses a different grid");
  }

  std::vector<std::vector<Eigen::Vector2d>> hulls;
  for (const auto& obj : scene.objects) {
    std::vector<Eigen::Vector2d> projected;
    for (const auto& c : obj.corners()) {
      const Eigen::Vector3d pc = camera.rotation * c + camera.translation;
      if (!(pc.z() > 0)) throw DomainError("hit rate: an object extends behind the camera");
      projected.push_back(project(camera, c).pixel);
    }
    hulls.push_back(convex_hull(std::move(projected)));
  }

  const auto uniform = sample_uniform(spec, cfg);
  HitRateResult result;
  bool any_footprint = false;
  for (int ix = 0; ix < spec.nx(); ++ix) {
    for (int iy = 0; iy < spec.ny(); ++iy) {
      const Eigen::Vector2d c = spec.bev_center(ix, iy);
      int owner = -1;
      for (int o = static_cast<int>(scene.objects.size()) - 1; o >= 0; --o) {
        const auto& obj = scene.objects[static_cast<std::size_t>(o)];
        const Eigen::Vector3d local = obj.to_local(Point3d(c.x(), c.y(), obj.center.z()));
        if (std::abs(local.x()) <= 0.5 * obj.size.x() && std::abs(local.y()) <= 0.5 * obj.size.y()) {
          owner = o;
          break;
        }
      }
      if (owner < 0) continue;
      any_footprint = true;

      std::vector<double> heights;
      if (mode == SamplingMode::kUniform) {
        heights = uniform;
      } else if (height_source.valid(ix, iy)) {
        heights = pillar_heights(spec.z_min(), height_source.values(ix, iy), cfg.n_z);
      }
      for (std::size_t j = 0; j < heights.size(); ++j) {
        const Point3d p(c.x(), c.y(), heights[j]);
        const auto proj = project(camera, p);
        const bool hit =
            proj.valid && hull_contains(hulls[static_cast<std::size_t>(owner)], proj.pixel);
        result.records.push_back({ix, iy, static_cast<int>(j), heights[j], p, proj.pixel,
                                  proj.valid, hit});
        result.hits += hit ? 1 : 0;
      }
    }
  }
  if (!any_footprint) throw DomainError("hit rate: no BEV cell lies inside an object footprint");
  result.total = result.records.size();
  result.hit_rate = result.total == 0 ? 0.0 : static_cast<double>(result.hits) / result.total;
  return result;
}

HeightErrorStats height_error_stats(const HeightMap& h_lidar, const HeightMap& h_gt) {
  if (!(h_lidar.spec == h_gt.spec)) throw ShapeError("height error: maps use different grids");
  std::vector<double> diffs;
  for (Eigen::Index i = 0; i < h_lidar.values.size(); ++i) {
    if (h_lidar.valid.data()[i] && h_gt.valid.data()[i]) {
      diffs.push_back(h_lidar.values.data()[i] - h_gt.values.data()[i]);
    }
  }
  if (diffs.empty()) throw DomainError("height error: no cell is valid in both maps");

  HeightErrorStats stats;
  stats.cells = diffs.size();
  stats.bin_width = h_lidar.spec.delta_z();
  std::vector<int> bins;
  bins.reserve(diffs.size());
  double sum = 0.0, sum_abs = 0.0;
  for (double d : diffs) {
    sum += d;
    sum_abs += std::abs(d);
    bins.push_back(static_cast<int>(std::lround(d / stats.bin_width)));
  }
  stats.mean = sum / static_cast<double>(diffs.size());
  stats.mean_abs = sum_abs / static_cast<double>(diffs.size());
  const auto [lo, hi] = std::minmax_element(bins.begin(), bins.end());
  stats.first_bin = *lo;
  stats.histogram.assign(static_cast<std::size_t>(*hi - *lo + 1), 0);
  for (int b : bins) ++stats.histogram[static_cast<std::size_t>(b - *lo)];
  return stats;
}

namespace canonical {

SceneSpec scene() {
  SceneSpec s;
  s.ground = {-1.0, 0};
  // x in [7.9, 12.3], y in [-0.9, 0.9], z in [-1, 1.8]: edges sit 0.1 m from BEV cell centers.
  s.objects.push_back({Point3d(10.1, 0.0, 0.4), Eigen::Vector3d(4.4, 1.8, 2.8), 0.0, 1});
  return s;
}

CameraModel camera() {
  CameraModel cam;
  cam.fx = cam.fy = 500;
  cam.cx = 320;
  cam.cy = 240;
  cam.width = 640;
  cam.height = 480;
  // Camera axes in ego terms: right = +x, down = -z, forward = +y.
  cam.rotation << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  const Point3d position(10.1, -12.0, 1.0);
  cam.translation = -cam.rotation * position;
  return cam;
}

LidarSpec lidar(double noise_sigma_z, std::uint64_t seed) {
  LidarSpec l;
  l.origin = Point3d(0, 0, 3.0);
  l.azimuth_min = -0.3;
  l.azimuth_max = 0.3;
  l.azimuth_count = 301;
  l.elevation_min = -0.4;
  l.elevation_max = -0.05;
  l.elevation_count = 176;
  l.max_range = 80.0;
  l.noise_sigma_z = noise_sigma_z;
  l.seed = seed;
  return l;
}

}  // namespace canonical

}  // namespace hgr
