#include "hgr/projection.hpp"

#include <cmath>

#include "hgr/parallel.hpp"

namespace hgr {

ImageFeatureMap::ImageFeatureMap(int w, int h, int c, double s)
    : width(w), height(h), channels(c), scale(s) {
  if (w < 1 || h < 1 || c < 1) throw ShapeError("feature map: dimensions must be positive");
  if (!(s > 0.0)) throw ConfigError("feature map: scale must be positive");
  data.setZero(static_cast<Eigen::Index>(w) * h, c);
}

Eigen::VectorXd bilinear_sample(const ImageFeatureMap& fm, double u, double v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fm.channels);
  if (!(u >= 0.0 && u <= fm.width - 1 && v >= 0.0 && v <= fm.height - 1)) return out;

  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const int u1 = std::min(u0 + 1, fm.width - 1);
  const int v1 = std::min(v0 + 1, fm.height - 1);
  const double du = u - u0;
  const double dv = v - v0;

  out += (1 - du) * (1 - dv) * fm.at(u0, v0).transpose();
  if (du > 0) out += du * (1 - dv) * fm.at(u1, v0).transpose();
  if (dv > 0) out += (1 - du) * dv * fm.at(u0, v1).transpose();
  if (du > 0 && dv > 0) out += du * dv * fm.at(u1, v1).transpose();
  return out;
}

ValidityMask validity_mask(const HeightMap& h) { return h.valid; }

std::vector<double> pillar_heights(double bottom, double top, int n) {
  if (n < 2) throw ConfigError("sampling: n_z must be at least 2");
  std::vector<double> z(static_cast<std::size_t>(n));
  const double span = top - bottom;
  for (int j = 0; j < n - 1; ++j) {
    const double alpha = static_cast<double>(j) / (n - 1);
    z[static_cast<std::size_t>(j)] = bottom + alpha * span;
  }
  z.back() = top;
  return z;
}

std::vector<double> sample_uniform(const VoxelGridSpec& spec, const SamplingConfig& cfg) {
  return pillar_heights(spec.z_min(), spec.z_max(), cfg.n_z);
}

ReferencePointSet reference_points_uniform(const VoxelGridSpec& spec, const SamplingConfig& cfg) {
  const auto z = sample_uniform(spec, cfg);
  return {spec, cfg.n_z, BevArray<bool>::Constant(spec.nx(), spec.ny(), true),
          std::vector<std::vector<double>>(spec.bev_cells(), z)};
}

ReferencePointSet sample_height_guided(const HeightMap& h, const SamplingConfig& cfg) {
  if (cfg.n_z < 2) throw ConfigError("sampling: n_z must be at least 2");
  const auto& spec = h.spec;
  ReferencePointSet refs{spec, cfg.n_z, h.valid, std::vector<std::vector<double>>(spec.bev_cells())};
  for (int ix = 0; ix < spec.nx(); ++ix) {
    for (int iy = 0; iy < spec.ny(); ++iy) {
      if (!h.valid(ix, iy)) continue;
      refs.heights[spec.bev_linear(ix, iy)] = pillar_heights(spec.z_min(), h.values(ix, iy), cfg.n_z);
    }
  }
  return refs;
}

DeformableParams DeformableParams::zeros(const VoxelGridSpec& spec, int n_z, int points_per_sample) {
  const std::size_t n = spec.bev_cells() * static_cast<std::size_t>(n_z) * points_per_sample;
  return {n_z, points_per_sample, std::vector<Eigen::Vector2d>(n, Eigen::Vector2d::Zero()),
          std::vector<double>(n, 0.0)};
}

BEVQueryGrid aggregate(const BEVQueryGrid& q, const ReferencePointSet& refs,
                       const std::vector<CameraModel>& cameras,
                       const std::vector<ImageFeatureMap>& features, const DeformableParams& params,
                       const ValidityMask& mask) {
  const auto& spec = q.spec;
  if (!(refs.spec == spec)) throw ShapeError("aggregate: reference points use a different grid");
  if (mask.rows() != spec.nx() || mask.cols() != spec.ny()) {
    throw ShapeError("aggregate: mask dimensions differ from the query grid");
  }
  if (cameras.size() != features.size()) {
    throw ShapeError("aggregate: one feature map per camera is required");
  }
  for (const auto& fm : features) {
    if (fm.channels != q.channels) throw ShapeError("aggregate: channel count mismatch");
  }
  const std::size_t expected =
      spec.bev_cells() * static_cast<std::size_t>(refs.n_z) * params.points_per_sample;
  if (params.n_z != refs.n_z || params.points_per_sample < 0 || params.offsets.size() != expected ||
      params.weights.size() != expected) {
    throw ShapeError("aggregate: offsets/weights do not match (cells, n_z, points)");
  }
  for (double w : params.weights) {
    if (!std::isfinite(w)) throw DomainError("aggregate: non-finite weight");
  }

  BEVQueryGrid out = q;
  parallel_for(spec.bev_cells(), [&](std::size_t cell) {
    const int ix = static_cast<int>(cell / spec.ny());
    const int iy = static_cast<int>(cell % spec.ny());
    if (!mask(ix, iy)) return;

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(q.channels);
    const auto& heights = refs.heights[cell];
    for (std::size_t j = 0; j < heights.size(); ++j) {
      const Point3d ref = refs.point(ix, iy, static_cast<int>(j));
      for (std::size_t cam = 0; cam < cameras.size(); ++cam) {
        const auto proj = project(cameras[cam], ref);
        if (!proj.valid) continue;
        const Eigen::Vector2d base = features[cam].scale * proj.pixel;
        for (int k = 0; k < params.points_per_sample; ++k) {
          const std::size_t s = params.slot(cell, static_cast<int>(j), k);
          const Eigen::Vector2d at = base + params.offsets[s];
          acc += params.weights[s] * bilinear_sample(features[cam], at.x(), at.y());
        }
      }
    }
    out.data.row(static_cast<Eigen::Index>(cell)) = acc.transpose();
  });
  return out;
}

}  // namespace hgr
