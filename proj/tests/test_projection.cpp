#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "hgr/heightmap.hpp"
#include "hgr/projection.hpp"
#include "oracle/oracles.hpp"

using hgr::CameraModel;
using hgr::HeightMap;
using hgr::Point3d;
using hgr::SamplingConfig;
using hgr::VoxelGridSpec;

namespace {

CameraModel vga_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 500;
  cam.cx = 320;
  cam.cy = 240;
  cam.width = 640;
  cam.height = 480;
  return cam;
}

}  // namespace

TEST_CASE("project examples") {
  const auto cam = vga_camera();
  auto p = hgr::project(cam, Point3d(0, 0, 2));
  CHECK(p.valid);
  CHECK(p.pixel.x() == 320);
  CHECK(p.pixel.y() == 240);

  p = hgr::project(cam, Point3d(1, 0.5, 2));
  CHECK(p.valid);
  CHECK(p.pixel.x() == doctest::Approx(570).epsilon(1e-12));
  CHECK(p.pixel.y() == doctest::Approx(365).epsilon(1e-12));

  CHECK_FALSE(hgr::project(cam, Point3d(0, 0, -2)).valid);
  CHECK_FALSE(hgr::project(cam, Point3d(0, 0, 0)).valid);
  CHECK_FALSE(hgr::project(cam, Point3d(10, 0, 2)).valid);  // u = 2820
  // u == width is outside the half-open image.
  CHECK_FALSE(hgr::project(cam, Point3d(1.28, 0, 1)).valid);
}

TEST_CASE("unproject") {
  const auto cam = vga_camera();
  const Point3d p = hgr::unproject(cam, 320.0, 240.0, 1.0);
  CHECK((p - Point3d(0, 0, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(hgr::unproject(cam, 1.0, 1.0, 0.0), hgr::DomainError);
  CHECK_THROWS_AS(hgr::unproject(cam, 1.0, 1.0, -1.0), hgr::DomainError);
}

TEST_CASE("project/unproject round trip under random rigid extrinsics") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0, 640), v(0, 480), depth(0.5, 80), t(-5, 5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto cam = vga_camera();
    if (i % 2 == 1) {
      Eigen::Quaterniond q(Eigen::Vector4d(t(gen), t(gen), t(gen), t(gen)).normalized());
      cam.rotation = q.toRotationMatrix();
      cam.translation = Eigen::Vector3d(t(gen), t(gen), t(gen));
    }
    const double pu = u(gen), pv = v(gen);
    const auto back = hgr::project(cam, hgr::unproject(cam, pu, pv, depth(gen)));
    CHECK(back.valid);
    worst = std::max(worst, (back.pixel - Eigen::Vector2d(pu, pv)).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("camera validation") {
  auto cam = vga_camera();
  CHECK_NOTHROW(cam.validate());
  cam.rotation(0, 1) = 0.1;
  CHECK_THROWS_AS(cam.validate(), hgr::ConfigError);
  cam = vga_camera();
  cam.rotation = -Eigen::Matrix3d::Identity();  // orthonormal, det -1
  CHECK_THROWS_AS(cam.validate(), hgr::ConfigError);
  cam = vga_camera();
  cam.fx = 0;
  CHECK_THROWS_AS(cam.validate(), hgr::ConfigError);
  cam = vga_camera();
  cam.width = 0;
  CHECK_THROWS_AS(cam.validate(), hgr::ConfigError);
}

TEST_CASE("bilinear_sample") {
  hgr::ImageFeatureMap fm(5, 4, 3);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> f(-1, 1);
  for (Eigen::Index i = 0; i < fm.data.size(); ++i) fm.data.data()[i] = f(gen);

  CHECK(hgr::bilinear_sample(fm, 2, 1) == fm.at(2, 1).transpose());
  CHECK(hgr::bilinear_sample(fm, 4, 3) == fm.at(4, 3).transpose());

  const Eigen::VectorXd mid = hgr::bilinear_sample(fm, 1.5, 2);
  CHECK((mid - 0.5 * (fm.at(1, 2) + fm.at(2, 2)).transpose()).norm() < 1e-15);

  CHECK(hgr::bilinear_sample(fm, -0.1, 1).isZero(0));
  CHECK(hgr::bilinear_sample(fm, 1, 3.01).isZero(0));
  CHECK(hgr::bilinear_sample(fm, 100, 100).isZero(0));

  std::uniform_real_distribution<double> uu(-0.5, 4.5), vv(-0.5, 3.5);
  for (int i = 0; i < 500; ++i) {
    const double u = uu(gen), v = vv(gen);
    const auto expect = oracle::tent_sample(5, 4, 3, u, v, [&](int x, int y, int c) { return fm.at(x, y)(c); });
    const auto got = hgr::bilinear_sample(fm, u, v);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(got(c) - expect[static_cast<std::size_t>(c)]) < 1e-12);
  }
}

TEST_CASE("validity mask") {
  const VoxelGridSpec spec = VoxelGridSpec::occ3d();
  HeightMap h(spec);
  CHECK(hgr::validity_mask(h).count() == 0);
  h = hgr::heightmap_from_points({Point3d(1, 2, 0.5)}, spec);
  const auto mask = hgr::validity_mask(h);
  CHECK(mask.count() == 1);
  CHECK(static_cast<std::size_t>(mask.count()) == h.valid_count());
  CHECK(mask.rows() == spec.nx());
  CHECK(mask.cols() == spec.ny());
}

TEST_CASE("uniform sampling") {
  const auto spec = VoxelGridSpec::occ3d();
  const auto z = hgr::sample_uniform(spec, SamplingConfig{4});
  REQUIRE(z.size() == 4);
  CHECK(z[0] == -1.0);
  CHECK(std::abs(z[1] - (-1.0 + 6.4 / 3)) < 1e-12);
  CHECK(std::abs(z[2] - (-1.0 + 12.8 / 3)) < 1e-12);
  CHECK(z[3] == 5.4);
  const auto two = hgr::sample_uniform(spec, SamplingConfig{2});
  CHECK(two == std::vector<double>{-1.0, 5.4});
  CHECK_THROWS_AS(hgr::sample_uniform(spec, SamplingConfig{1}), hgr::ConfigError);
}

TEST_CASE("height-guided sampling") {
  const auto spec = VoxelGridSpec::occ3d();
  HeightMap h(spec);
  h.set(3, 4, 1.8);
  h.set(5, 5, spec.z_max());
  const auto refs = hgr::sample_height_guided(h, SamplingConfig{4});
  const auto& z = refs.heights_at(3, 4);
  REQUIRE(z.size() == 4);
  const double expect[] = {-1.0, -1.0 + 2.8 / 3, -1.0 + 5.6 / 3, 1.8};
  for (int j = 0; j < 4; ++j) CHECK(std::abs(z[static_cast<std::size_t>(j)] - expect[j]) < 1e-9);
  CHECK(z.front() == spec.z_min());
  CHECK(z.back() == 1.8);
  CHECK(refs.heights_at(0, 0).empty());
  CHECK(refs.heights_at(5, 5) == hgr::sample_uniform(spec, SamplingConfig{4}));

  const Point3d p = refs.point(3, 4, 2);
  CHECK(p.x() == doctest::Approx(-40 + 3.5 * 0.4));
  CHECK(p.y() == doctest::Approx(-40 + 4.5 * 0.4));

  CHECK_THROWS_AS(hgr::sample_height_guided(h, SamplingConfig{1}), hgr::ConfigError);
}

TEST_CASE("guided heights are strictly increasing inside [z_min, H]") {
  const auto spec = VoxelGridSpec::occ3d();
  HeightMap h(spec);
  for (int k = 1; k <= spec.nz(); ++k) h.set(k, 0, spec.z_min() + k * spec.delta_z());
  for (int nz : {2, 3, 4, 8, 33}) {
    const auto refs = hgr::sample_height_guided(h, SamplingConfig{nz});
    for (int k = 1; k <= spec.nz(); ++k) {
      const auto& z = refs.heights_at(k, 0);
      REQUIRE(z.size() == static_cast<std::size_t>(nz));
      CHECK(z.front() == spec.z_min());
      CHECK(z.back() == h.values(k, 0));
      for (std::size_t j = 1; j < z.size(); ++j) CHECK(z[j] > z[j - 1]);
    }
  }
}

namespace {

// A 1 m x 1 m patch at z in [1, 3) seen by a camera at the origin looking up (+z).
struct AggregateFixture {
  VoxelGridSpec spec{0, 1, 0, 1, 1, 3, 0.25, 0.5};
  CameraModel cam;
  HeightMap heights{spec};

  AggregateFixture() {
    cam.fx = cam.fy = 10;
    cam.cx = cam.cy = 2;
    cam.width = cam.height = 16;
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> k(1, spec.nz());
    for (int ix = 0; ix < spec.nx(); ++ix) {
      for (int iy = 0; iy < spec.ny(); ++iy) {
        if ((ix + iy) % 5 != 0) heights.set(ix, iy, spec.z_min() + k(gen) * spec.delta_z());
      }
    }
  }
};

hgr::ImageFeatureMap random_features(int channels, std::uint64_t seed) {
  hgr::ImageFeatureMap fm(16, 16, channels);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> f(-1, 1);
  for (Eigen::Index i = 0; i < fm.data.size(); ++i) fm.data.data()[i] = f(gen);
  return fm;
}

hgr::DeformableParams random_params(const VoxelGridSpec& spec, int nz, int k, std::uint64_t seed) {
  auto p = hgr::DeformableParams::zeros(spec, nz, k);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> w(-1, 1), off(-1.5, 1.5);
  for (auto& o : p.offsets) o = {off(gen), off(gen)};
  for (auto& x : p.weights) x = w(gen);
  return p;
}

}  // namespace

TEST_CASE("aggregate passes masked-out queries through unchanged") {
  AggregateFixture fx;
  const auto refs = hgr::sample_height_guided(fx.heights, SamplingConfig{4});
  hgr::BEVQueryGrid q(fx.spec, 3);
  q.data.setRandom();
  const hgr::ValidityMask none = hgr::ValidityMask::Constant(fx.spec.nx(), fx.spec.ny(), false);
  const auto out = hgr::aggregate(q, refs, {fx.cam}, {random_features(3, 1)},
                                  random_params(fx.spec, 4, 2, 2), none);
  CHECK(out.data == q.data);

  const auto mask = hgr::validity_mask(fx.heights);
  const auto partial = hgr::aggregate(q, refs, {fx.cam}, {random_features(3, 1)},
                                      random_params(fx.spec, 4, 2, 2), mask);
  for (int ix = 0; ix < fx.spec.nx(); ++ix) {
    for (int iy = 0; iy < fx.spec.ny(); ++iy) {
      if (!mask(ix, iy)) CHECK(partial.at(ix, iy) == q.at(ix, iy));
    }
  }
}

TEST_CASE("aggregate of a constant feature map with convex weights") {
  AggregateFixture fx;
  const auto refs = hgr::sample_height_guided(fx.heights, SamplingConfig{4});
  hgr::ImageFeatureMap fm(16, 16, 2);
  fm.data.col(0).setConstant(0.75);
  fm.data.col(1).setConstant(-2.0);
  auto params = hgr::DeformableParams::zeros(fx.spec, 4, 2);
  for (auto& w : params.weights) w = 1.0 / 8;
  hgr::BEVQueryGrid q(fx.spec, 2);
  q.data.setConstant(99);
  const auto mask = hgr::validity_mask(fx.heights);
  const auto out = hgr::aggregate(q, refs, {fx.cam}, {fm}, params, mask);
  for (int ix = 0; ix < fx.spec.nx(); ++ix) {
    for (int iy = 0; iy < fx.spec.ny(); ++iy) {
      if (!mask(ix, iy)) continue;
      CHECK(out.at(ix, iy)(0) == doctest::Approx(0.75).epsilon(1e-12));
      CHECK(out.at(ix, iy)(1) == doctest::Approx(-2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("aggregate single point at an integer feature coordinate") {
  const VoxelGridSpec spec(0, 0.4, 0, 0.4, 1, 3, 0.4, 2);
  HeightMap h(spec);
  h.set(0, 0, 3.0);
  const auto refs = hgr::sample_height_guided(h, SamplingConfig{2});  // z = {1, 3}
  CameraModel cam;
  cam.fx = cam.fy = 10;
  cam.cx = cam.cy = 2;
  cam.width = cam.height = 8;
  // R(0,0,1) = (0.2, 0.2, 1) -> pixel (4, 4).
  const auto fm = random_features(4, 5);
  hgr::ImageFeatureMap small(8, 8, 4);
  small.data = fm.data.topRows(64);
  auto params = hgr::DeformableParams::zeros(spec, 2, 1);
  params.weights[params.slot(0, 0, 0)] = 1.0;
  const hgr::BEVQueryGrid q(spec, 4);
  const auto out = hgr::aggregate(q, refs, {cam}, {small}, params, hgr::validity_mask(h));
  CHECK(out.at(0, 0) == small.at(4, 4));
}

TEST_CASE("aggregate is linear in weights and features") {
  AggregateFixture fx;
  const auto refs = hgr::sample_height_guided(fx.heights, SamplingConfig{3});
  const auto mask = hgr::validity_mask(fx.heights);
  const hgr::BEVQueryGrid q(fx.spec, 2);
  const auto f1 = random_features(2, 10), f2 = random_features(2, 11);
  auto p1 = random_params(fx.spec, 3, 2, 12), p2 = random_params(fx.spec, 3, 2, 13);
  p2.offsets = p1.offsets;
  auto psum = p1;
  for (std::size_t i = 0; i < psum.weights.size(); ++i) psum.weights[i] += 2.0 * p2.weights[i];

  const auto a = hgr::aggregate(q, refs, {fx.cam}, {f1}, p1, mask);
  const auto b = hgr::aggregate(q, refs, {fx.cam}, {f1}, p2, mask);
  const auto ab = hgr::aggregate(q, refs, {fx.cam}, {f1}, psum, mask);
  CHECK((ab.data - (a.data + 2.0 * b.data)).cwiseAbs().maxCoeff() < 1e-12);

  hgr::ImageFeatureMap fsum = f1;
  fsum.data = 3.0 * f1.data - f2.data;
  const auto c = hgr::aggregate(q, refs, {fx.cam}, {f2}, p1, mask);
  const auto d = hgr::aggregate(q, refs, {fx.cam}, {fsum}, p1, mask);
  CHECK((d.data - (3.0 * a.data - c.data)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("aggregate sums over every camera that sees a point") {
  AggregateFixture fx;
  const auto refs = hgr::sample_height_guided(fx.heights, SamplingConfig{4});
  const auto mask = hgr::validity_mask(fx.heights);
  const hgr::BEVQueryGrid q(fx.spec, 2);
  const auto f1 = random_features(2, 20), f2 = random_features(2, 21);
  const auto p = random_params(fx.spec, 4, 1, 22);
  CameraModel blind = fx.cam;
  blind.rotation = Eigen::Vector3d(1, -1, -1).asDiagonal();  // looks down, away from every point

  const auto one = hgr::aggregate(q, refs, {fx.cam}, {f1}, p, mask);
  const auto other = hgr::aggregate(q, refs, {fx.cam}, {f2}, p, mask);
  const auto both = hgr::aggregate(q, refs, {fx.cam, fx.cam}, {f1, f2}, p, mask);
  CHECK((both.data - (one.data + other.data)).cwiseAbs().maxCoeff() < 1e-12);

  const auto with_blind = hgr::aggregate(q, refs, {fx.cam, blind}, {f1, f2}, p, mask);
  CHECK(with_blind.data == one.data);
  const auto only_blind = hgr::aggregate(q, refs, {blind}, {f1}, p, mask);
  for (int ix = 0; ix < fx.spec.nx(); ++ix) {
    for (int iy = 0; iy < fx.spec.ny(); ++iy) {
      if (mask(ix, iy)) CHECK(only_blind.at(ix, iy).isZero(0));
    }
  }
}

TEST_CASE("aggregate shape errors") {
  AggregateFixture fx;
  const auto refs = hgr::sample_height_guided(fx.heights, SamplingConfig{4});
  const auto mask = hgr::validity_mask(fx.heights);
  const hgr::BEVQueryGrid q(fx.spec, 2);
  const auto p = random_params(fx.spec, 4, 1, 1);
  CHECK_THROWS_AS(hgr::aggregate(q, refs, {fx.cam}, {}, p, mask), hgr::ShapeError);
  CHECK_THROWS_AS(hgr::aggregate(q, refs, {fx.cam}, {random_features(3, 1)}, p, mask), hgr::ShapeError);
  CHECK_THROWS_AS(hgr::aggregate(q, refs, {fx.cam}, {random_features(2, 1)},
                                 random_params(fx.spec, 3, 1, 1), mask),
                  hgr::ShapeError);
  CHECK_THROWS_AS(hgr::aggregate(q, refs, {fx.cam}, {random_features(2, 1)}, p,
                                 hgr::ValidityMask::Constant(2, 2, true)),
                  hgr::ShapeError);
  auto bad = p;
  bad.weights[0] = std::nan("");
  CHECK_THROWS_AS(hgr::aggregate(q, refs, {fx.cam}, {random_features(2, 1)}, bad, mask), hgr::DomainError);
}
