#include "hgr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace hgr {

ConfusionCounts confusion(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt,
                          bool ignore_free) {
  if (!(pred.spec() == gt.spec())) throw ShapeError("confusion: grids use different specs");
  if (pred.num_classes() != gt.num_classes() || pred.free_class() != gt.free_class()) {
    throw ShapeError("confusion: grids use different class vocabularies");
  }
  ConfusionCounts counts{std::vector<ClassCounts>(static_cast<std::size_t>(gt.num_classes()))};
  const auto free = gt.free_class();
  const auto& p = pred.labels();
  const auto& g = gt.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (ignore_free && g[i] == free) continue;
    if (p[i] != free) ++counts.classes[p[i]].predicted;
    if (g[i] != free) ++counts.classes[g[i]].ground_truth;
    if (p[i] == g[i] && g[i] != free) ++counts.classes[g[i]].intersection;
  }
  return counts;
}

MiouResult miou(const ConfusionCounts& counts) {
  MiouResult result;
  result.per_class.reserve(counts.classes.size());
  double sum = 0.0;
  int included = 0;
  for (const auto& c : counts.classes) {
    const std::uint64_t uni = c.predicted + c.ground_truth - c.intersection;
    if (uni == 0) {
      result.per_class.emplace_back(std::nullopt);
      continue;
    }
    const double iou = static_cast<double>(c.intersection) / static_cast<double>(uni);
    result.per_class.emplace_back(iou);
    sum += iou;
    ++included;
  }
  if (included == 0) throw UndefinedMetricError("mIoU: every class has an empty union");
  result.miou = sum / included;
  return result;
}

namespace {

void check_ray(const RayQuery& ray) {
  if (!ray.origin.allFinite()) throw DomainError("ray: origin must be finite");
  if (!ray.direction.allFinite() || std::abs(ray.direction.norm() - 1.0) > 1e-9) {
    throw DomainError("ray: direction must be unit length");
  }
}

// Calls visit(voxel, entry_distance) for each voxel pierced by the ray, in order,
// until visit returns true or the ray leaves the grid.
template <typename Visit>
void traverse(const VoxelGridSpec& spec, const RayQuery& ray, Visit&& visit) {
  check_ray(ray);
  const std::array<double, 3> lo{spec.x_min(), spec.y_min(), spec.z_min()};
  const std::array<double, 3> hi{spec.x_max(), spec.y_max(), spec.z_max()};
  const std::array<double, 3> size{spec.delta_xy(), spec.delta_xy(), spec.delta_z()};
  const std::array<int, 3> count{spec.nx(), spec.ny(), spec.nz()};
  const auto& o = ray.origin;
  const auto& d = ray.direction;

  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (!(o[a] >= lo[a] && o[a] < hi[a])) return;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (!(t_enter < t_exit)) return;

  std::array<int, 3> cell{};
  std::array<int, 3> step{};
  std::array<double, 3> t_next{};
  for (int a = 0; a < 3; ++a) {
    const double p = o[a] + t_enter * d[a];
    cell[a] = std::clamp(static_cast<int>(std::floor((p - lo[a]) / size[a])), 0, count[a] - 1);
    step[a] = d[a] > 0 ? 1 : (d[a] < 0 ? -1 : 0);
  }
  auto boundary_t = [&](int a) {
    if (step[a] == 0) return std::numeric_limits<double>::infinity();
    const double plane = lo[a] + (cell[a] + (step[a] > 0 ? 1 : 0)) * size[a];
    return (plane - o[a]) / d[a];
  };
  for (int a = 0; a < 3; ++a) t_next[a] = boundary_t(a);

  double t = t_enter;
  for (;;) {
    if (visit(VoxelIndex{cell[0], cell[1], cell[2]}, t)) return;
    int a = 0;
    if (t_next[1] < t_next[a]) a = 1;
    if (t_next[2] < t_next[a]) a = 2;
    if (t_next[a] >= t_exit) return;
    t = std::max(t, t_next[a]);
    cell[a] += step[a];
    if (cell[a] < 0 || cell[a] >= count[a]) return;
    t_next[a] = boundary_t(a);
  }
}

}  // namespace

std::optional<RayHit> ray_first_hit(const SemanticVoxelGrid& grid, const RayQuery& ray) {
  std::optional<RayHit> hit;
  traverse(grid.spec(), ray, [&](const VoxelIndex& v, double t) {
    if (!grid.occupied(v)) return false;
    hit = RayHit{grid.at(v), t, v};
    return true;
  });
  return hit;
}

std::vector<VoxelIndex> ray_traverse(const SemanticVoxelGrid& grid, const RayQuery& ray) {
  std::vector<VoxelIndex> visited;
  traverse(grid.spec(), ray, [&](const VoxelIndex& v, double) {
    visited.push_back(v);
    return grid.occupied(v);
  });
  return visited;
}

RayIouResult rayiou(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt,
                    const std::vector<RayQuery>& rays, const std::vector<double>& thresholds) {
  if (!(pred.spec() == gt.spec())) throw ShapeError("rayiou: grids use different specs");
  if (pred.num_classes() != gt.num_classes()) {
    throw ShapeError("rayiou: grids use different class vocabularies");
  }
  if (rays.empty()) throw DomainError("rayiou: no rays");
  if (thresholds.empty()) throw DomainError("rayiou: no thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0) || (i > 0 && !(thresholds[i] > thresholds[i - 1]))) {
      throw DomainError("rayiou: thresholds must be positive and strictly increasing");
    }
  }

  std::vector<std::optional<RayHit>> gt_hits, pred_hits;
  gt_hits.reserve(rays.size());
  pred_hits.reserve(rays.size());
  for (const auto& r : rays) {
    gt_hits.push_back(ray_first_hit(gt, r));
    pred_hits.push_back(ray_first_hit(pred, r));
  }

  const auto n_classes = static_cast<std::size_t>(gt.num_classes());
  RayIouResult result{thresholds, {}, 0.0};
  for (double tau : thresholds) {
    std::vector<std::uint64_t> tp(n_classes), fp(n_classes), fn(n_classes);
    for (std::size_t r = 0; r < rays.size(); ++r) {
      const auto& g = gt_hits[r];
      const auto& p = pred_hits[r];
      if (g && p && g->label == p->label && std::abs(g->depth - p->depth) <= tau) {
        ++tp[g->label];
        continue;
      }
      if (p) ++fp[p->label];
      if (g) ++fn[g->label];
    }
    double sum = 0.0;
    int included = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const std::uint64_t denom = tp[c] + fp[c] + fn[c];
      if (denom == 0) continue;
      sum += static_cast<double>(tp[c]) / static_cast<double>(denom);
      ++included;
    }
    if (included == 0) throw UndefinedMetricError("rayiou: no ray hits an occupied voxel");
    result.per_threshold.push_back(sum / included);
  }
  double total = 0.0;
  for (double v : result.per_threshold) total += v;
  result.mean = total / static_cast<double>(result.per_threshold.size());
  return result;
}

std::vector<RayQuery> ray_fan(const Point3d& origin, int azimuths, int elevations, double elev_min,
                              double elev_max) {
  if (azimuths < 1 || elevations < 1) throw ConfigError("ray fan: counts must be >= 1");
  std::vector<RayQuery> rays;
  rays.reserve(static_cast<std::size_t>(azimuths) * elevations);
  for (int a = 0; a < azimuths; ++a) {
    const double az = 2.0 * std::numbers::pi * a / azimuths;
    for (int e = 0; e < elevations; ++e) {
      const double el =
          elevations == 1 ? elev_min : elev_min + (elev_max - elev_min) * e / (elevations - 1);
      Eigen::Vector3d dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      rays.push_back({origin, dir.normalized()});
    }
  }
  return rays;
}

}  // namespace hgr
