#pragma once

#include <cstdint>

#include "hgr/heightmap.hpp"

namespace hgr {

enum class ScheduleKind { kCosine, kStep };
enum class MixMode { kReplace, kLerp };

struct ScheduleParams {
  int total_epochs = 24;
  ScheduleKind kind = ScheduleKind::kCosine;
  double step_fraction = 0.5;  // step kind only
};

struct MixConfig {
  MixMode mode = MixMode::kReplace;
  std::uint64_t seed = 0;
};

/// Mixing probability for epoch e in [0, E].
///
/// cosine: 0.5 * (1 + cos(pi * e / E)); step: 1 while e < step_fraction * E, then 0.
/// Throws std::out_of_range for e outside [0, E], ConfigError for bad params.
double schedule_rho(int epoch, const ScheduleParams& params);

/// Uniform [0,1) draw that decides replacement of cell (ix, iy).
double replace_draw(std::uint64_t seed, int ix, int iy);

/// Conditioning map for training.
///
/// The output mask is always h_lidar's mask. On cells valid in both maps,
/// replace mode takes h_gt's value when replace_draw(seed, ix, iy) < rho and
/// lerp mode blends rho * gt + (1 - rho) * lidar. Elsewhere h_lidar is kept.
HeightMap mix(const HeightMap& h_lidar, const HeightMap& h_gt, double rho, const MixConfig& cfg);

/// Inference-time conditioning: the LiDAR map as-is.
inline HeightMap condition_for_inference(const HeightMap& h_lidar) { return h_lidar; }

}  // namespace hgr
