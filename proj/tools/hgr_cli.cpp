// Command-line front end: height maps, conditioning, sampling, projection,
// metrics and the synthetic-scene experiments.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hgr/heightmap.hpp"
#include "hgr/io.hpp"
#include "hgr/metrics.hpp"
#include "hgr/parallel.hpp"
#include "hgr/phc.hpp"
#include "hgr/projection.hpp"
#include "hgr/simulator.hpp"

namespace {

using nlohmann::json;
namespace io = hgr::io;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

hgr::VoxelGridSpec load_spec(const std::string& path) {
  return io::spec_from_json(io::read_json(path));
}

hgr::SamplingMode parse_sampling_mode(const std::string& mode) {
  return mode == "uniform" ? hgr::SamplingMode::kUniform : hgr::SamplingMode::kHeightGuided;
}

hgr::ReferencePointSet build_refs(const hgr::VoxelGridSpec& spec, const std::string& mode,
                                  const std::string& heights, int nz) {
  const hgr::SamplingConfig cfg{nz};
  if (mode == "uniform") return hgr::reference_points_uniform(spec, cfg);
  return hgr::sample_height_guided(io::read_heightmap(heights, spec), cfg);
}

std::string fmt(double v) { return io::format_number(v); }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text(path, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Height-guided projection toolkit for BEV occupancy geometry"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = auto)");

  std::string spec_path, out_path, points_path, voxels_path, heights_path;
  int classes = 17;

  // heightmap
  auto* hm = app.add_subcommand("heightmap", "LiDAR points -> BEV height map (.hprh)");
  hm->add_option("--points", points_path, "Point cloud (.hprp)")->required();
  hm->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  hm->add_option("--out", out_path, "Output height map (.hprh)")->required();

  // gtheight
  auto* gth = app.add_subcommand("gtheight", "Semantic voxels -> BEV height map (.hprh)");
  gth->add_option("--voxels", voxels_path, "Semantic voxel grid (.hprv)")->required();
  gth->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  gth->add_option("--classes", classes, "Number of object classes")->check(CLI::Range(0, 255));
  gth->add_option("--out", out_path, "Output height map (.hprh)")->required();

  // mix
  std::string lidar_path, gt_path, mode = "replace", schedule = "cosine";
  int epoch = 0, epochs = 24;
  std::uint64_t seed = 0;
  double step_fraction = 0.5;
  auto* mx = app.add_subcommand("mix", "Progressive height conditioning of LiDAR and GT maps");
  mx->add_option("--lidar", lidar_path, "LiDAR height map (.hprh)")->required();
  mx->add_option("--gt", gt_path, "Ground-truth height map (.hprh)")->required();
  mx->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  mx->add_option("--epoch", epoch, "Current epoch e")->required();
  mx->add_option("--epochs", epochs, "Total epochs E")->required();
  mx->add_option("--seed", seed, "Seed for per-cell replacement draws");
  mx->add_option("--mode", mode, "replace | lerp")->check(CLI::IsMember({"replace", "lerp"}));
  mx->add_option("--schedule", schedule, "cosine | step")->check(CLI::IsMember({"cosine", "step"}));
  mx->add_option("--step-fraction", step_fraction, "Switch point of the step schedule, as a fraction of E");
  mx->add_option("--out", out_path, "Output height map (.hprh)")->required();

  // sample
  std::string sample_mode = "guided";
  int nz = 4;
  auto* smp = app.add_subcommand("sample", "Vertical sampling locations -> CSV");
  smp->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  smp->add_option("--heights", heights_path, "Conditioning height map (.hprh), guided mode");
  smp->add_option("--nz", nz, "Samples per pillar")->check(CLI::Range(2, 1 << 16));
  smp->add_option("--mode", sample_mode, "uniform | guided")->check(CLI::IsMember({"uniform", "guided"}));
  smp->add_option("--out", out_path, "Output CSV (default stdout)");

  // project
  std::vector<std::string> calib_paths;
  auto* prj = app.add_subcommand("project", "Reference points projected into cameras -> CSV");
  prj->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  prj->add_option("--heights", heights_path, "Conditioning height map (.hprh), guided mode");
  prj->add_option("--nz", nz, "Samples per pillar")->check(CLI::Range(2, 1 << 16));
  prj->add_option("--mode", sample_mode, "uniform | guided")->check(CLI::IsMember({"uniform", "guided"}));
  prj->add_option("--calib", calib_paths, "Camera calibration (JSON), repeatable")->required();
  prj->add_option("--out", out_path, "Output CSV (default stdout)");

  // eval
  std::string pred_path, metric = "miou", rays_path, json_path;
  bool ignore_free = false;
  auto* ev = app.add_subcommand("eval", "mIoU / RayIoU between two semantic voxel grids");
  ev->add_option("--pred", pred_path, "Predicted voxels (.hprv)")->required();
  ev->add_option("--gt", gt_path, "Ground-truth voxels (.hprv)")->required();
  ev->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  ev->add_option("--classes", classes, "Number of object classes")->check(CLI::Range(0, 255));
  ev->add_option("--metric", metric, "miou | rayiou")->check(CLI::IsMember({"miou", "rayiou"}));
  ev->add_option("--rays", rays_path, "Ray set (JSON); default is an ego-origin fan");
  ev->add_flag("--ignore-free", ignore_free, "mIoU: skip voxels that are free in the ground truth");
  ev->add_option("--json", json_path, "Also write the JSON summary to this file");

  // sim
  std::string scene_path, lidar_spec_path, out_points, out_gt;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("sim", "Simulate LiDAR and rasterize GT for a synthetic scene");
  sim->add_option("--scene", scene_path, "Scene (JSON)")->required();
  sim->add_option("--lidar", lidar_spec_path, "LiDAR (JSON)")->required();
  sim->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  sim->add_option("--classes", classes, "Number of object classes")->check(CLI::Range(0, 255));
  sim->add_option("--seed", sim_seed, "Override the LiDAR seed");
  sim->add_option("--out-points", out_points, "Output point cloud (.hprp)")->required();
  sim->add_option("--out-gt", out_gt, "Output semantic voxels (.hprv)")->required();

  // exp-hitrate
  std::string csv_path, calib_path;
  auto* hr = app.add_subcommand("exp-hitrate", "Fraction of reference points landing on the object");
  hr->add_option("--scene", scene_path, "Scene (JSON)")->required();
  hr->add_option("--calib", calib_path, "Camera calibration (JSON)")->required();
  hr->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  hr->add_option("--nz", nz, "Samples per pillar")->check(CLI::Range(2, 1 << 16));
  hr->add_option("--mode", sample_mode, "uniform | guided")->check(CLI::IsMember({"uniform", "guided"}));
  hr->add_option("--heights", heights_path, "Height map (.hprh); default: GT heights of the scene");
  hr->add_option("--classes", classes, "Number of object classes")->check(CLI::Range(0, 255));
  hr->add_option("--csv", csv_path, "Per-point records (CSV)");
  hr->add_option("--json", json_path, "Summary (JSON, default stdout)");

  // exp-heighterr
  std::string lidar_heights_path, gt_heights_path;
  auto* he = app.add_subcommand("exp-heighterr", "LiDAR vs GT height error statistics");
  he->add_option("--spec", spec_path, "Grid spec (JSON)")->required();
  he->add_option("--lidar-heights", lidar_heights_path, "LiDAR height map (.hprh)");
  he->add_option("--gt-heights", gt_heights_path, "GT height map (.hprh)");
  he->add_option("--scene", scene_path, "Scene (JSON); simulate both maps instead");
  he->add_option("--lidar", lidar_spec_path, "LiDAR (JSON), with --scene");
  he->add_option("--classes", classes, "Number of object classes")->check(CLI::Range(0, 255));
  he->add_option("--json", json_path, "Summary (JSON, default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  hgr::set_thread_count(threads);

  try {
    if (*hm) {
      const auto spec = load_spec(spec_path);
      io::write_heightmap(out_path, hgr::heightmap_from_points(io::read_points(points_path), spec));
    } else if (*gth) {
      const auto spec = load_spec(spec_path);
      io::write_heightmap(out_path,
                          hgr::heightmap_from_semantic(io::read_voxels(voxels_path, spec, classes)));
    } else if (*mx) {
      const auto spec = load_spec(spec_path);
      const hgr::ScheduleParams params{
          epochs, schedule == "cosine" ? hgr::ScheduleKind::kCosine : hgr::ScheduleKind::kStep,
          step_fraction};
      const double rho = hgr::schedule_rho(epoch, params);
      const hgr::MixConfig cfg{mode == "replace" ? hgr::MixMode::kReplace : hgr::MixMode::kLerp, seed};
      io::write_heightmap(out_path, hgr::mix(io::read_heightmap(lidar_path, spec),
                                             io::read_heightmap(gt_path, spec), rho, cfg));
      std::cerr << "rho=" << fmt(rho) << "\n";
    } else if (*smp) {
      if (sample_mode == "guided" && heights_path.empty()) {
        std::cerr << "sample: --heights is required in guided mode\n";
        return kUsageError;
      }
      const auto spec = load_spec(spec_path);
      emit(out_path, io::reference_points_csv(build_refs(spec, sample_mode, heights_path, nz)));
    } else if (*prj) {
      if (sample_mode == "guided" && heights_path.empty()) {
        std::cerr << "project: --heights is required in guided mode\n";
        return kUsageError;
      }
      const auto spec = load_spec(spec_path);
      std::vector<hgr::CameraModel> cams;
      for (const auto& c : calib_paths) cams.push_back(io::camera_from_json(io::read_json(c)));
      emit(out_path,
           io::projected_points_csv(build_refs(spec, sample_mode, heights_path, nz), cams));
    } else if (*ev) {
      const auto spec = load_spec(spec_path);
      const auto pred = io::read_voxels(pred_path, spec, classes);
      const auto gt = io::read_voxels(gt_path, spec, classes);
      std::ostringstream table;
      json summary;
      if (metric == "miou") {
        const auto result = hgr::miou(hgr::confusion(pred, gt, ignore_free));
        table << "class  IoU\n";
        json per_class = json::object();
        for (std::size_t c = 0; c < result.per_class.size(); ++c) {
          if (!result.per_class[c]) continue;
          table << c << "  " << fmt(*result.per_class[c]) << "\n";
          per_class[std::to_string(c)] = *result.per_class[c];
        }
        table << "mIoU " << fmt(result.miou) << "\n";
        summary = {{"metric", "miou"}, {"miou", result.miou}, {"per_class", per_class}};
      } else {
        std::vector<hgr::RayQuery> rays;
        std::vector<double> thresholds{1.0, 2.0, 4.0};
        if (!rays_path.empty()) {
          const json doc = io::read_json(rays_path);
          rays = io::rays_from_json(doc);
          if (doc.contains("thresholds")) thresholds = doc.at("thresholds").get<std::vector<double>>();
        } else {
          rays = hgr::ray_fan(hgr::Point3d(0, 0, 1.0), 360, 16, -0.6, 0.2);
        }
        const auto result = hgr::rayiou(pred, gt, rays, thresholds);
        table << "threshold  RayIoU\n";
        json per = json::object();
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
          table << fmt(thresholds[i]) << "m  " << fmt(result.per_threshold[i]) << "\n";
          per[fmt(thresholds[i])] = result.per_threshold[i];
        }
        table << "RayIoU " << fmt(result.mean) << "\n";
        summary = {{"metric", "rayiou"}, {"rayiou", result.mean}, {"per_threshold", per},
                   {"rays", rays.size()}};
      }
      std::cout << table.str() << summary.dump() << "\n";
      if (!json_path.empty()) io::write_text(json_path, dump(summary));
    } else if (*sim) {
      const auto spec = load_spec(spec_path);
      const auto scene = io::scene_from_json(io::read_json(scene_path));
      auto lidar = io::lidar_from_json(io::read_json(lidar_spec_path));
      if (sim_seed) lidar.seed = *sim_seed;
      const auto points = hgr::simulate_lidar(scene, lidar);
      io::write_points(out_points, points);
      io::write_voxels(out_gt, hgr::rasterize_gt(scene, spec, classes));
      std::cerr << "points=" << points.size() << "\n";
    } else if (*hr) {
      if (sample_mode == "guided" && heights_path.empty()) {
        std::cerr << "exp-hitrate: using GT heights rasterized from the scene\n";
      }
      const auto spec = load_spec(spec_path);
      const auto scene = io::scene_from_json(io::read_json(scene_path));
      const auto cam = io::camera_from_json(io::read_json(calib_path));
      const auto heights = heights_path.empty()
                               ? hgr::heightmap_from_semantic(hgr::rasterize_gt(scene, spec, classes))
                               : io::read_heightmap(heights_path, spec);
      const auto result = hgr::hitrate_experiment(scene, cam, spec, hgr::SamplingConfig{nz},
                                                  parse_sampling_mode(sample_mode), heights);
      if (!csv_path.empty()) io::write_text(csv_path, io::hit_records_csv(result.records));
      const json summary{{"mode", sample_mode},      {"n_z", nz},
                         {"hit_rate", result.hit_rate}, {"hits", result.hits},
                         {"total", result.total}};
      emit(json_path, dump(summary));
    } else if (*he) {
      const auto spec = load_spec(spec_path);
      hgr::HeightMap lidar_h(spec), gt_h(spec);
      if (!scene_path.empty()) {
        if (lidar_spec_path.empty()) {
          std::cerr << "exp-heighterr: --scene requires --lidar\n";
          return kUsageError;
        }
        const auto scene = io::scene_from_json(io::read_json(scene_path));
        const auto lidar = io::lidar_from_json(io::read_json(lidar_spec_path));
        lidar_h = hgr::heightmap_from_points(hgr::simulate_lidar(scene, lidar), spec);
        gt_h = hgr::heightmap_from_semantic(hgr::rasterize_gt(scene, spec, classes));
      } else if (!lidar_heights_path.empty() && !gt_heights_path.empty()) {
        lidar_h = io::read_heightmap(lidar_heights_path, spec);
        gt_h = io::read_heightmap(gt_heights_path, spec);
      } else {
        std::cerr << "exp-heighterr: give --lidar-heights and --gt-heights, or --scene and --lidar\n";
        return kUsageError;
      }
      const auto stats = hgr::height_error_stats(lidar_h, gt_h);
      json bins = json::array();
      for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
        const double center = (stats.first_bin + static_cast<int>(b)) * stats.bin_width;
        bins.push_back({{"center", center}, {"count", stats.histogram[b]}});
      }
      emit(json_path, dump({{"mean_abs", stats.mean_abs},
                            {"mean", stats.mean},
                            {"cells", stats.cells},
                            {"bin_width", stats.bin_width},
                            {"histogram", bins}}));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
