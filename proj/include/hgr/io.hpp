#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hgr/heightmap.hpp"
#include "hgr/metrics.hpp"
#include "hgr/projection.hpp"
#include "hgr/simulator.hpp"

namespace hgr::io {

// Binary layouts (little-endian):
//   header : 4-byte magic, u32 version (= 1)
//   .hprp  : header, u64 count, count x 3 f32 (x, y, z)
//   .hprh  : header, u32 X, u32 Y, X*Y f32 in BEV order; NaN marks invalid cells
//   .hprv  : header, u32 X, u32 Y, u32 Z, X*Y*Z u8 in voxel order; 255 is free

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::array<char, 4> kPointsMagic{'H', 'P', 'R', 'P'};
inline constexpr std::array<char, 4> kHeightMagic{'H', 'P', 'R', 'H'};
inline constexpr std::array<char, 4> kVoxelMagic{'H', 'P', 'R', 'V'};

std::vector<std::uint8_t> encode_points(const PointCloud& points);
/// Throws FormatError with the failing byte offset, or on non-finite coordinates.
PointCloud decode_points(const std::vector<std::uint8_t>& bytes);

/// Heights are stored as f32; values not representable in f32 are rounded.
std::vector<std::uint8_t> encode_heightmap(const HeightMap& h);
/// Throws ShapeError if the stored X, Y disagree with `spec`.
HeightMap decode_heightmap(const std::vector<std::uint8_t>& bytes, const VoxelGridSpec& spec);

std::vector<std::uint8_t> encode_voxels(const SemanticVoxelGrid& grid);
/// Labels must be < num_classes or 255. Throws FormatError otherwise.
SemanticVoxelGrid decode_voxels(const std::vector<std::uint8_t>& bytes, const VoxelGridSpec& spec,
                                int num_classes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

PointCloud read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const PointCloud& points);
HeightMap read_heightmap(const std::filesystem::path& path, const VoxelGridSpec& spec);
void write_heightmap(const std::filesystem::path& path, const HeightMap& h);
SemanticVoxelGrid read_voxels(const std::filesystem::path& path, const VoxelGridSpec& spec,
                              int num_classes);
void write_voxels(const std::filesystem::path& path, const SemanticVoxelGrid& grid);

// JSON documents. Parse errors surface as ConfigError.
VoxelGridSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const VoxelGridSpec& spec);
CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel& cam);
SceneSpec scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const SceneSpec& scene);
LidarSpec lidar_from_json(const nlohmann::json& j);
nlohmann::json lidar_to_json(const LidarSpec& lidar);
std::vector<RayQuery> rays_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

/// CSV of reference points: i_x,i_y,j,z,x,y (no projection columns).
std::string reference_points_csv(const ReferencePointSet& refs);
/// CSV with one row per (reference point, camera):
/// i_x,i_y,j,z,x,y,u,v,cam_id,valid
std::string projected_points_csv(const ReferencePointSet& refs,
                                 const std::vector<CameraModel>& cameras);
/// i_x,i_y,j,z,x,y,u,v,in_frustum,hit
std::string hit_records_csv(const std::vector<HitRecord>& records);

}  // namespace hgr::io
