#include "hgr/phc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hgr/hash.hpp"
#include "hgr/parallel.hpp"

namespace hgr {

double schedule_rho(int epoch, const ScheduleParams& params) {
  if (params.total_epochs < 1) throw ConfigError("schedule: total epochs must be >= 1");
  if (epoch < 0 || epoch > params.total_epochs) {
    throw std::out_of_range("schedule: epoch outside [0, E]");
  }
  switch (params.kind) {
    case ScheduleKind::kCosine:
      return 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / params.total_epochs));
    case ScheduleKind::kStep:
      if (!(params.step_fraction > 0.0 && params.step_fraction < 1.0)) {
        throw ConfigError("schedule: step fraction must lie in (0, 1)");
      }
      return epoch < params.step_fraction * params.total_epochs ? 1.0 : 0.0;
  }
  throw ConfigError("schedule: unknown kind");
}

double replace_draw(std::uint64_t seed, int ix, int iy) {
  return to_unit(counter_hash(seed, static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy)));
}

HeightMap mix(const HeightMap& h_lidar, const HeightMap& h_gt, double rho, const MixConfig& cfg) {
  if (!(h_lidar.spec == h_gt.spec)) throw ShapeError("mix: height maps use different grids");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("mix: rho must lie in [0, 1]");

  HeightMap out = h_lidar;
  const auto& spec = h_lidar.spec;
  parallel_for(spec.bev_cells(), [&](std::size_t cell) {
    const int ix = static_cast<int>(cell / spec.ny());
    const int iy = static_cast<int>(cell % spec.ny());
    if (!h_lidar.valid(ix, iy) || !h_gt.valid(ix, iy)) return;
    const double lidar = h_lidar.values(ix, iy);
    const double gt = h_gt.values(ix, iy);
    if (cfg.mode == MixMode::kReplace) {
      if (replace_draw(cfg.seed, ix, iy) < rho) out.values(ix, iy) = gt;
    } else if (rho > 0.0) {
      const double blended = rho * gt + (1.0 - rho) * lidar;
      out.values(ix, iy) = std::clamp(blended, std::min(gt, lidar), std::max(gt, lidar));
    }
  });
  return out;
}

}  // namespace hgr
