#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "hgr/heightmap.hpp"

namespace hgr {

struct SamplingConfig {
  int n_z = 4;
};

/// Pinhole camera with a rigid ego-to-camera transform.
///
/// Camera frame: +z forward, +x right, +y down. A point p in the ego frame maps
/// to rotation * p + translation in the camera frame.
template <typename Scalar>
struct PinholeCamera {
  Scalar fx = 1, fy = 1, cx = 0, cy = 0;
  int width = 1, height = 1;
  Eigen::Matrix<Scalar, 3, 3> rotation = Eigen::Matrix<Scalar, 3, 3>::Identity();
  Eigen::Matrix<Scalar, 3, 1> translation = Eigen::Matrix<Scalar, 3, 1>::Zero();

  /// Throws ConfigError unless focal lengths are positive, the image is non-empty
  /// and the rotation is orthonormal with determinant +1 (to within 1e-9).
  void validate() const;
};

using CameraModel = PinholeCamera<double>;

template <typename Scalar>
struct Projection {
  Eigen::Matrix<Scalar, 2, 1> pixel;
  bool valid = false;  // in front of the camera and inside the image
};

template <typename Scalar>
Projection<Scalar> project(const PinholeCamera<Scalar>& cam, const Point3<Scalar>& p) {
  const Point3<Scalar> pc = cam.rotation * p + cam.translation;
  Projection<Scalar> out;
  out.pixel << cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy;
  out.valid = pc.z() > Scalar(0) && out.pixel.x() >= Scalar(0) && out.pixel.x() < cam.width &&
              out.pixel.y() >= Scalar(0) && out.pixel.y() < cam.height;
  return out;
}

/// Ego-frame point at camera depth `depth` along pixel (u, v). Throws DomainError for depth <= 0.
template <typename Scalar>
Point3<Scalar> unproject(const PinholeCamera<Scalar>& cam, Scalar u, Scalar v, Scalar depth) {
  if (!(depth > Scalar(0))) throw DomainError("unproject: depth must be positive");
  const Point3<Scalar> pc((u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth);
  // Rotation is orthonormal, so its inverse is the transpose.
  return cam.rotation.transpose() * (pc - cam.translation);
}

template <typename Scalar>
void PinholeCamera<Scalar>::validate() const {
  if (!(fx > 0 && fy > 0)) throw ConfigError("camera: focal lengths must be positive");
  if (width < 1 || height < 1) throw ConfigError("camera: image size must be at least 1x1");
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ConfigError("camera: extrinsic must be finite");
  }
  const Eigen::Matrix<Scalar, 3, 3> gram = rotation * rotation.transpose();
  if ((gram - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff() > Scalar(1e-9)) {
    throw ConfigError("camera: rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - Scalar(1)) > Scalar(1e-9)) {
    throw ConfigError("camera: rotation must have determinant +1");
  }
}

/// Per-camera feature plane, H_f x W_f x C, row-major by pixel: row (v * W_f + u).
struct ImageFeatureMap {
  ImageFeatureMap(int width, int height, int channels, double scale = 1.0);

  int width, height, channels;
  double scale;  // feature coordinate = scale * pixel coordinate
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data;

  auto at(int u, int v) { return data.row(static_cast<Eigen::Index>(v) * width + u); }
  auto at(int u, int v) const { return data.row(static_cast<Eigen::Index>(v) * width + u); }
};

/// Bilinear interpolation at feature coordinates (u, v); zero outside [0, W-1] x [0, H-1].
Eigen::VectorXd bilinear_sample(const ImageFeatureMap& fm, double u, double v);

using ValidityMask = BevArray<bool>;

ValidityMask validity_mask(const HeightMap& h);

/// Vertical sample heights bottom + alpha_j * (top - bottom), alpha_j = j / (n - 1).
/// The last sample is exactly `top`. Throws ConfigError for n < 2.
std::vector<double> pillar_heights(double bottom, double top, int n);

/// Fixed heights shared by every pillar, spanning [z_min, z_max].
std::vector<double> sample_uniform(const VoxelGridSpec& spec, const SamplingConfig& cfg);

/// Per-pillar sample heights and their ego-frame reference points.
struct ReferencePointSet {
  VoxelGridSpec spec;
  int n_z;
  BevArray<bool> valid;
  std::vector<std::vector<double>> heights;  // by BEV linear index; empty when invalid

  const std::vector<double>& heights_at(int ix, int iy) const {
    return heights[spec.bev_linear(ix, iy)];
  }
  Point3d point(int ix, int iy, int j) const {
    const Eigen::Vector2d c = spec.bev_center(ix, iy);
    return {c.x(), c.y(), heights_at(ix, iy)[static_cast<std::size_t>(j)]};
  }
};

/// Uniform sampling on every pillar (all cells valid).
ReferencePointSet reference_points_uniform(const VoxelGridSpec& spec, const SamplingConfig& cfg);

/// Heights z_min + alpha_j * (H(cell) - z_min) on valid pillars; invalid pillars get none.
ReferencePointSet sample_height_guided(const HeightMap& h, const SamplingConfig& cfg);

struct BEVQueryGrid {
  BEVQueryGrid(VoxelGridSpec s, int channels)
      : spec(s), channels(channels),
        data(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.bev_cells()), channels)) {}

  VoxelGridSpec spec;
  int channels;
  Eigen::MatrixXd data;  // row = BEV linear index

  auto at(int ix, int iy) { return data.row(static_cast<Eigen::Index>(spec.bev_linear(ix, iy))); }
  auto at(int ix, int iy) const {
    return data.row(static_cast<Eigen::Index>(spec.bev_linear(ix, iy)));
  }
};

/// Externally supplied deformable sampling parameters.
///
/// Entry (cell, j, k) lives at ((cell * n_z) + j) * points_per_sample + k, with
/// `cell` the BEV linear index. Offsets are in feature coordinates.
struct DeformableParams {
  int n_z = 0;
  int points_per_sample = 0;
  std::vector<Eigen::Vector2d> offsets;
  std::vector<double> weights;

  static DeformableParams zeros(const VoxelGridSpec& spec, int n_z, int points_per_sample);

  std::size_t slot(std::size_t cell, int j, int k) const {
    return (cell * n_z + static_cast<std::size_t>(j)) * points_per_sample + k;
  }
};

/// Masked query update.
///
/// Cells with mask false are copied from `q`. Cells with mask true become
///   sum_j sum_k sum_cam w[cell,j,k] * bilinear_sample(features[cam], s * pi_cam(R) + offset[cell,j,k])
/// where the camera sum runs over every camera whose frustum contains R(cell, z_j).
/// Reference points seen by no camera contribute zero. Weights are not normalized.
BEVQueryGrid aggregate(const BEVQueryGrid& q, const ReferencePointSet& refs,
                       const std::vector<CameraModel>& cameras,
                       const std::vector<ImageFeatureMap>& features, const DeformableParams& params,
                       const ValidityMask& mask);

}  // namespace hgr
