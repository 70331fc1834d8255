#include <random>

#include "doctest.h"
#include "hgr/metrics.hpp"
#include "oracle/oracles.hpp"

using hgr::Point3d;
using hgr::RayQuery;
using hgr::SemanticVoxelGrid;
using hgr::VoxelGridSpec;
using hgr::VoxelIndex;

namespace {

oracle::Box box_of(const VoxelGridSpec& s) {
  return {{s.x_min(), s.y_min(), s.z_min()},
          {s.x_max(), s.y_max(), s.z_max()},
          s.delta_xy(),
          s.delta_z(),
          {s.nx(), s.ny(), s.nz()}};
}

SemanticVoxelGrid random_grid(const VoxelGridSpec& spec, int classes, double density, std::uint64_t seed) {
  SemanticVoxelGrid g(spec, classes);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> c(0, classes - 1);
  for (std::size_t i = 0; i < spec.voxels(); ++i) {
    if (u(gen) < density) g.set(spec.voxel_from_linear(i), static_cast<std::uint8_t>(c(gen)));
  }
  return g;
}

}  // namespace

TEST_CASE("confusion and mIoU on the two-voxel case") {
  const VoxelGridSpec spec(0, 1, 0, 1, 0, 2, 1, 1);  // 1 x 1 x 2
  SemanticVoxelGrid gt(spec, 2), pred(spec, 2);
  gt.assign({0, 1});
  pred.assign({0, 0});
  const auto counts = hgr::confusion(pred, gt);
  CHECK(counts.classes[0].intersection == 1);
  CHECK(counts.classes[0].predicted == 2);
  CHECK(counts.classes[0].ground_truth == 1);
  CHECK(counts.classes[1].intersection == 0);
  CHECK(counts.classes[1].predicted == 0);
  CHECK(counts.classes[1].ground_truth == 1);
  const auto m = hgr::miou(counts);
  CHECK(*m.per_class[0] == 0.5);
  CHECK(*m.per_class[1] == 0.0);
  CHECK(m.miou == 0.25);
}

TEST_CASE("mIoU of identical and disjoint grids") {
  const VoxelGridSpec spec(-2, 2, -2, 2, -1, 1, 0.5, 0.5);
  const auto a = random_grid(spec, 5, 0.3, 1);
  CHECK(hgr::miou(hgr::confusion(a, a)).miou == 1.0);

  SemanticVoxelGrid only0(spec, 2), only1(spec, 2);
  only0.set({0, 0, 0}, 0);
  only1.set({1, 1, 1}, 1);
  const auto counts = hgr::confusion(only0, only1);
  for (const auto& c : counts.classes) CHECK(c.intersection == 0);
  CHECK(hgr::miou(counts).miou == 0.0);

  const SemanticVoxelGrid empty(spec, 3);
  CHECK_THROWS_AS(hgr::miou(hgr::confusion(empty, empty)), hgr::UndefinedMetricError);
}

TEST_CASE("classes absent from both grids are excluded") {
  const VoxelGridSpec spec(0, 1, 0, 1, 0, 2, 1, 1);
  SemanticVoxelGrid g(spec, 10);
  g.assign({3, 255});
  const auto m = hgr::miou(hgr::confusion(g, g));
  CHECK(m.miou == 1.0);
  CHECK_FALSE(m.per_class[0].has_value());
  CHECK(m.per_class[3].has_value());
}

TEST_CASE("per-class IoU is symmetric and bounded") {
  const VoxelGridSpec spec(-2, 2, -2, 2, -1, 1, 0.5, 0.5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_grid(spec, 4, 0.4, 2 * s);
    const auto b = random_grid(spec, 4, 0.4, 2 * s + 1);
    const auto ab = hgr::miou(hgr::confusion(a, b));
    const auto ba = hgr::miou(hgr::confusion(b, a));
    CHECK(ab.miou >= 0.0);
    CHECK(ab.miou <= 1.0);
    for (std::size_t c = 0; c < ab.per_class.size(); ++c) {
      REQUIRE(ab.per_class[c].has_value() == ba.per_class[c].has_value());
      if (ab.per_class[c]) CHECK(*ab.per_class[c] == *ba.per_class[c]);
    }
  }
}

TEST_CASE("ignore_free skips voxels free in the ground truth") {
  const VoxelGridSpec spec(0, 1, 0, 1, 0, 2, 1, 1);
  SemanticVoxelGrid gt(spec, 1), pred(spec, 1);
  gt.assign({0, 255});
  pred.assign({0, 0});
  CHECK(hgr::miou(hgr::confusion(pred, gt, false)).miou == 0.5);
  CHECK(hgr::miou(hgr::confusion(pred, gt, true)).miou == 1.0);
}

TEST_CASE("confusion rejects mismatched grids") {
  SemanticVoxelGrid a(VoxelGridSpec(0, 1, 0, 1, 0, 2, 1, 1), 2);
  SemanticVoxelGrid b(VoxelGridSpec(0, 1, 0, 1, 0, 3, 1, 1), 2);
  CHECK_THROWS_AS(hgr::confusion(a, b), hgr::ShapeError);
  SemanticVoxelGrid c(VoxelGridSpec(0, 1, 0, 1, 0, 2, 1, 1), 3);
  CHECK_THROWS_AS(hgr::confusion(a, c), hgr::ShapeError);
}

TEST_CASE("ray_first_hit basics") {
  const auto spec = VoxelGridSpec::occ3d();
  SemanticVoxelGrid g(spec, 17);
  const RayQuery along_x{Point3d(-40, 0.2, 2.2), Eigen::Vector3d::UnitX()};
  CHECK_FALSE(hgr::ray_first_hit(g, along_x));

  // Cell ix = 120 spans x in [8, 8.4); the ray enters it after 48 m.
  g.set({120, 100, 8}, 4);
  const auto hit = hgr::ray_first_hit(g, along_x);
  REQUIRE(hit);
  CHECK(hit->label == 4);
  CHECK(hit->voxel == VoxelIndex{120, 100, 8});
  CHECK(hit->depth == doctest::Approx(48.0).epsilon(1e-12));

  const auto marched = oracle::march(box_of(spec), g.labels(), 255, {-40, 0.2, 2.2}, {1, 0, 0},
                                     0.01 * spec.delta_xy(), 100);
  REQUIRE(marched.hit);
  CHECK(std::abs(marched.hit->t - hit->depth) <= 0.01 * spec.delta_xy());

  // Starting outside the grid.
  const RayQuery outside{Point3d(-50, 0.2, 2.2), Eigen::Vector3d::UnitX()};
  CHECK(hgr::ray_first_hit(g, outside)->depth == doctest::Approx(58.0).epsilon(1e-12));
  // Pointing away.
  CHECK_FALSE(hgr::ray_first_hit(g, RayQuery{Point3d(-50, 0.2, 2.2), -Eigen::Vector3d::UnitX()}));
  // Origin inside an occupied voxel.
  CHECK(hgr::ray_first_hit(g, RayQuery{Point3d(8.2, 0.2, 2.4), Eigen::Vector3d::UnitZ()})->depth == 0.0);

  CHECK_THROWS_AS(hgr::ray_first_hit(g, RayQuery{Point3d(0, 0, std::nan("")), Eigen::Vector3d::UnitX()}),
                  hgr::DomainError);
  CHECK_THROWS_AS(hgr::ray_first_hit(g, RayQuery{Point3d(0, 0, 0), Eigen::Vector3d(1, 1, 0)}),
                  hgr::DomainError);
}

TEST_CASE("axis-aligned traversal visits the marcher's voxel sequence") {
  const VoxelGridSpec spec(-2, 2, -2, 2, -1, 1, 0.4, 0.4);
  const SemanticVoxelGrid empty(spec, 3);
  const std::array<Eigen::Vector3d, 6> dirs{Eigen::Vector3d::UnitX(),  -Eigen::Vector3d::UnitX(),
                                            Eigen::Vector3d::UnitY(),  -Eigen::Vector3d::UnitY(),
                                            Eigen::Vector3d::UnitZ(),  -Eigen::Vector3d::UnitZ()};
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> x(-1.9, 1.9), z(-0.9, 0.9);
  for (int i = 0; i < 60; ++i) {
    const Point3d o(x(gen), x(gen), z(gen));
    const auto& d = dirs[static_cast<std::size_t>(i % 6)];
    const auto visited = hgr::ray_traverse(empty, RayQuery{o, d});
    const auto marched = oracle::march(box_of(spec), empty.labels(), 255, {o.x(), o.y(), o.z()},
                                       {d.x(), d.y(), d.z()}, 0.01 * 0.4, 20);
    REQUIRE(visited.size() == marched.visited.size());
    for (std::size_t k = 0; k < visited.size(); ++k) {
      CHECK(visited[k] == VoxelIndex{marched.visited[k][0], marched.visited[k][1], marched.visited[k][2]});
    }
  }
}

TEST_CASE("traversal visits face-adjacent voxels in order") {
  const VoxelGridSpec spec(-2, 2, -2, 2, -1, 1, 0.4, 0.25);
  const SemanticVoxelGrid empty(spec, 3);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> x(-1.9, 1.9), z(-0.9, 0.9);
  for (int i = 0; i < 200; ++i) {
    const RayQuery r{Point3d(x(gen), x(gen), z(gen)), Eigen::Vector3d(n(gen), n(gen), n(gen)).normalized()};
    const auto v = hgr::ray_traverse(empty, r);
    REQUIRE(!v.empty());
    CHECK(v.front() == *hgr::voxel_index(r.origin, spec));
    for (std::size_t k = 1; k < v.size(); ++k) {
      const int step = std::abs(v[k].ix - v[k - 1].ix) + std::abs(v[k].iy - v[k - 1].iy) +
                       std::abs(v[k].iz - v[k - 1].iz);
      CHECK(step == 1);
    }
  }
}

TEST_CASE("rayiou examples") {
  const VoxelGridSpec spec(0, 10, 0, 1, 0, 1, 0.1, 1);  // 100 x 10 x 1 strip along x
  const RayQuery ray{Point3d(0, 0.55, 0.5), Eigen::Vector3d::UnitX()};
  SemanticVoxelGrid gt(spec, 3), pred(spec, 3);
  gt.set({50, 5, 0}, 2);    // entered at 5.0 m
  pred.set({53, 5, 0}, 2);  // entered at 5.3 m
  const auto r = hgr::rayiou(pred, gt, {ray});
  REQUIRE(r.per_threshold.size() == 3);
  for (double v : r.per_threshold) CHECK(v == 1.0);
  CHECK(r.mean == 1.0);
  const auto tight = hgr::rayiou(pred, gt, {ray}, {0.2});
  CHECK(tight.per_threshold[0] == 0.0);

  CHECK(hgr::rayiou(gt, gt, {ray}).mean == 1.0);
  const SemanticVoxelGrid empty(spec, 3);
  CHECK(hgr::rayiou(empty, gt, {ray}).mean == 0.0);
  CHECK_THROWS_AS(hgr::rayiou(gt, gt, {}), hgr::DomainError);
  CHECK_THROWS_AS(hgr::rayiou(empty, empty, {ray}), hgr::UndefinedMetricError);
  CHECK_THROWS_AS(hgr::rayiou(gt, gt, {ray}, {2.0, 1.0}), hgr::DomainError);

  SemanticVoxelGrid wrong(spec, 3);
  wrong.set({50, 5, 0}, 1);
  CHECK(hgr::rayiou(wrong, gt, {ray}).mean == 0.0);
}

TEST_CASE("rayiou is monotone in the threshold") {
  const VoxelGridSpec spec(-8, 8, -8, 8, -1, 5.4, 0.4, 0.4);
  const auto rays = hgr::ray_fan(Point3d(0, 0, 1), 90, 6, -0.5, 0.2);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto gt = random_grid(spec, 4, 0.02, 10 + s);
    const auto pred = random_grid(spec, 4, 0.02, 20 + s);
    std::vector<double> taus;
    for (int i = 1; i <= 40; ++i) taus.push_back(0.25 * i);
    const auto r = hgr::rayiou(pred, gt, rays, taus);
    for (std::size_t i = 1; i < r.per_threshold.size(); ++i) {
      CHECK(r.per_threshold[i] >= r.per_threshold[i - 1]);
    }
  }
}

TEST_CASE("ray fan") {
  const auto rays = hgr::ray_fan(Point3d(0, 0, 1), 8, 3, -0.3, 0.3);
  CHECK(rays.size() == 24);
  for (const auto& r : rays) CHECK(std::abs(r.direction.norm() - 1.0) < 1e-12);
  CHECK(rays[0].direction.z() == doctest::Approx(std::sin(-0.3)));
  CHECK(rays[2].direction.z() == doctest::Approx(std::sin(0.3)));
}
