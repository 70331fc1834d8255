#include "hgr/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace hgr::io {
namespace {

using Bytes = std::vector<std::uint8_t>;
using nlohmann::json;

constexpr std::uint32_t kCanonicalNan = 0x7FC00000u;

class Writer {
 public:
  void magic(const std::array<char, 4>& m) {
    for (char c : m) out_.push_back(static_cast<std::uint8_t>(c));
    u32(kFormatVersion);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(const Bytes& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void header(const std::array<char, 4>& expected, const char* what) {
    need(4, "truncated header");
    for (std::size_t i = 0; i < 4; ++i) {
      if (bytes_[i] != static_cast<std::uint8_t>(expected[i])) {
        throw FormatError(std::string("bad magic for ") + what, 0);
      }
    }
    pos_ = 4;
    const std::size_t at = pos_;
    if (u32() != kFormatVersion) throw FormatError("unsupported version", at);
  }
  std::uint32_t u32() {
    need(4, "truncated u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8, "truncated u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::uint8_t u8() {
    need(1, "truncated payload");
    return bytes_[pos_++];
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what, bytes_.size());
  }
  void expect_payload(std::uint64_t n) const {
    const std::uint64_t remaining = bytes_.size() - pos_;
    if (remaining < n) throw FormatError("payload shorter than declared", bytes_.size());
    if (remaining > n) throw FormatError("trailing bytes after payload", pos_ + n);
  }

 private:
  const Bytes& bytes_;
  std::size_t pos_ = 0;
};

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(std::string("json: missing numeric key '") + key + "'");
  }
  return j.at(key).get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
    throw ConfigError(std::string("json: key '") + key + "' must be an array of " +
                      std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    const auto& e = j.at(key).at(static_cast<std::size_t>(i));
    if (!e.is_number()) throw ConfigError(std::string("json: non-numeric entry in '") + key + "'");
    v[i] = e.get<double>();
  }
  return v;
}

int integer(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw ConfigError(std::string("json: missing integer key '") + key + "'");
  }
  return j.at(key).get<int>();
}

std::uint8_t class_id(const json& j) {
  const int c = integer(j, "class");
  if (c < 0 || c > 255) throw ConfigError("json: class id out of byte range");
  return static_cast<std::uint8_t>(c);
}

json array_of(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Bytes encode_points(const PointCloud& points) {
  Writer w;
  w.magic(kPointsMagic);
  w.u64(points.size());
  for (const auto& p : points) {
    w.f32(static_cast<float>(p.x()));
    w.f32(static_cast<float>(p.y()));
    w.f32(static_cast<float>(p.z()));
  }
  return w.take();
}

PointCloud decode_points(const Bytes& bytes) {
  Reader r(bytes);
  r.header(kPointsMagic, ".hprp");
  const std::uint64_t count = r.u64();
  if (count > (bytes.size() - r.offset()) / 12) {
    throw FormatError("payload shorter than declared", bytes.size());
  }
  r.expect_payload(count * 12);
  PointCloud points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const float x = r.f32();
    const float y = r.f32();
    const float z = r.f32();
    const Point3d p(x, y, z);
    if (!p.allFinite()) throw FormatError("non-finite point coordinate", at);
    points.push_back(p);
  }
  return points;
}

Bytes encode_heightmap(const HeightMap& h) {
  Writer w;
  w.magic(kHeightMagic);
  w.u32(static_cast<std::uint32_t>(h.spec.nx()));
  w.u32(static_cast<std::uint32_t>(h.spec.ny()));
  for (Eigen::Index i = 0; i < h.values.size(); ++i) {
    if (h.valid.data()[i]) {
      w.f32(static_cast<float>(h.values.data()[i]));
    } else {
      w.u32(kCanonicalNan);
    }
  }
  return w.take();
}

HeightMap decode_heightmap(const Bytes& bytes, const VoxelGridSpec& spec) {
  Reader r(bytes);
  r.header(kHeightMagic, ".hprh");
  const std::uint32_t nx = r.u32();
  const std::uint32_t ny = r.u32();
  if (nx != static_cast<std::uint32_t>(spec.nx()) || ny != static_cast<std::uint32_t>(spec.ny())) {
    throw ShapeError("height map is " + std::to_string(nx) + "x" + std::to_string(ny) +
                     " but the grid spec is " + std::to_string(spec.nx()) + "x" +
                     std::to_string(spec.ny()));
  }
  r.expect_payload(static_cast<std::uint64_t>(nx) * ny * 4);
  HeightMap h(spec);
  for (Eigen::Index i = 0; i < h.values.size(); ++i) {
    const std::size_t at = r.offset();
    const float v = r.f32();
    if (std::isnan(v)) continue;
    if (!std::isfinite(v)) throw FormatError("infinite height", at);
    h.values.data()[i] = v;
    h.valid.data()[i] = true;
  }
  return h;
}

Bytes encode_voxels(const SemanticVoxelGrid& grid) {
  const auto& spec = grid.spec();
  Writer w;
  w.magic(kVoxelMagic);
  w.u32(static_cast<std::uint32_t>(spec.nx()));
  w.u32(static_cast<std::uint32_t>(spec.ny()));
  w.u32(static_cast<std::uint32_t>(spec.nz()));
  for (auto l : grid.labels()) w.u8(l == grid.free_class() ? SemanticVoxelGrid::kDefaultFree : l);
  return w.take();
}

SemanticVoxelGrid decode_voxels(const Bytes& bytes, const VoxelGridSpec& spec, int num_classes) {
  Reader r(bytes);
  r.header(kVoxelMagic, ".hprv");
  const std::uint32_t nx = r.u32();
  const std::uint32_t ny = r.u32();
  const std::uint32_t nz = r.u32();
  if (nx != static_cast<std::uint32_t>(spec.nx()) || ny != static_cast<std::uint32_t>(spec.ny()) ||
      nz != static_cast<std::uint32_t>(spec.nz())) {
    throw ShapeError("voxel grid dimensions disagree with the grid spec");
  }
  r.expect_payload(static_cast<std::uint64_t>(nx) * ny * nz);
  std::vector<std::uint8_t> labels(spec.voxels());
  for (auto& l : labels) {
    const std::size_t at = r.offset();
    l = r.u8();
    if (l != SemanticVoxelGrid::kDefaultFree && l >= num_classes) {
      throw FormatError("label " + std::to_string(l) + " outside the declared vocabulary", at);
    }
  }
  SemanticVoxelGrid grid(spec, num_classes);
  grid.assign(std::move(labels));
  return grid;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

PointCloud read_points(const std::filesystem::path& path) { return decode_points(read_file(path)); }
void write_points(const std::filesystem::path& path, const PointCloud& points) {
  write_file(path, encode_points(points));
}
HeightMap read_heightmap(const std::filesystem::path& path, const VoxelGridSpec& spec) {
  return decode_heightmap(read_file(path), spec);
}
void write_heightmap(const std::filesystem::path& path, const HeightMap& h) {
  write_file(path, encode_heightmap(h));
}
SemanticVoxelGrid read_voxels(const std::filesystem::path& path, const VoxelGridSpec& spec,
                              int num_classes) {
  return decode_voxels(read_file(path), spec, num_classes);
}
void write_voxels(const std::filesystem::path& path, const SemanticVoxelGrid& grid) {
  write_file(path, encode_voxels(grid));
}

VoxelGridSpec spec_from_json(const json& j) {
  static const std::set<std::string> keys{"x_min", "x_max", "y_min", "y_max",
                                          "z_min", "z_max", "delta_xy", "delta_z"};
  if (!j.is_object()) throw ConfigError("grid spec: expected a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!keys.contains(k)) throw ConfigError("grid spec: unexpected key '" + k + "'");
  }
  return {number(j, "x_min"), number(j, "x_max"), number(j, "y_min"), number(j, "y_max"),
          number(j, "z_min"), number(j, "z_max"), number(j, "delta_xy"), number(j, "delta_z")};
}

json spec_to_json(const VoxelGridSpec& s) {
  return {{"x_min", s.x_min()}, {"x_max", s.x_max()}, {"y_min", s.y_min()},
          {"y_max", s.y_max()}, {"z_min", s.z_min()}, {"z_max", s.z_max()},
          {"delta_xy", s.delta_xy()}, {"delta_z", s.delta_z()}};
}

CameraModel camera_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("camera: expected a JSON object");
  CameraModel cam;
  cam.fx = number(j, "fx");
  cam.fy = number(j, "fy");
  cam.cx = number(j, "cx");
  cam.cy = number(j, "cy");
  cam.width = integer(j, "width");
  cam.height = integer(j, "height");
  const auto r = vec<9>(j, "rotation");
  cam.rotation = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r.data());
  cam.translation = vec<3>(j, "translation");
  cam.validate();
  return cam;
}

json camera_to_json(const CameraModel& cam) {
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> r = cam.rotation;
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"width", cam.width},
          {"height", cam.height},
          {"rotation", array_of(Eigen::Map<const Eigen::VectorXd>(r.data(), 9))},
          {"translation", array_of(cam.translation)}};
}

SceneSpec scene_from_json(const json& j) {
  if (!j.is_object() || !j.contains("ground")) throw ConfigError("scene: missing 'ground'");
  SceneSpec scene;
  scene.ground.z_top = number(j.at("ground"), "z_top");
  scene.ground.class_id = class_id(j.at("ground"));
  if (j.contains("objects")) {
    for (const auto& o : j.at("objects")) {
      SceneObject obj;
      obj.center = vec<3>(o, "center");
      obj.size = vec<3>(o, "size");
      obj.yaw = o.contains("yaw") ? number(o, "yaw") : 0.0;
      obj.class_id = class_id(o);
      scene.objects.push_back(obj);
    }
  }
  scene.validate();
  return scene;
}

json scene_to_json(const SceneSpec& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"center", array_of(o.center)},
                       {"size", array_of(o.size)},
                       {"yaw", o.yaw},
                       {"class", o.class_id}});
  }
  return {{"ground", {{"z_top", scene.ground.z_top}, {"class", scene.ground.class_id}}},
          {"objects", objects}};
}

LidarSpec lidar_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("lidar: expected a JSON object");
  LidarSpec l;
  l.origin = vec<3>(j, "origin");
  l.azimuth_min = number(j, "azimuth_min");
  l.azimuth_max = number(j, "azimuth_max");
  l.azimuth_count = integer(j, "azimuth_count");
  l.elevation_min = number(j, "elevation_min");
  l.elevation_max = number(j, "elevation_max");
  l.elevation_count = integer(j, "elevation_count");
  l.max_range = number(j, "max_range");
  l.noise_sigma_z = j.contains("noise_sigma_z") ? number(j, "noise_sigma_z") : 0.0;
  l.dropout_prob = j.contains("dropout_prob") ? number(j, "dropout_prob") : 0.0;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("lidar: seed must be unsigned");
    l.seed = j.at("seed").get<std::uint64_t>();
  }
  l.validate();
  return l;
}

json lidar_to_json(const LidarSpec& l) {
  return {{"origin", array_of(l.origin)},
          {"azimuth_min", l.azimuth_min},
          {"azimuth_max", l.azimuth_max},
          {"azimuth_count", l.azimuth_count},
          {"elevation_min", l.elevation_min},
          {"elevation_max", l.elevation_max},
          {"elevation_count", l.elevation_count},
          {"max_range", l.max_range},
          {"noise_sigma_z", l.noise_sigma_z},
          {"dropout_prob", l.dropout_prob},
          {"seed", l.seed}};
}

std::vector<RayQuery> rays_from_json(const json& j) {
  std::vector<RayQuery> rays;
  if (j.contains("fan")) {
    const auto& f = j.at("fan");
    auto fan = ray_fan(vec<3>(f, "origin"), integer(f, "azimuths"), integer(f, "elevations"),
                       number(f, "elevation_min"), number(f, "elevation_max"));
    rays.insert(rays.end(), fan.begin(), fan.end());
  }
  if (j.contains("rays")) {
    for (const auto& r : j.at("rays")) {
      const Eigen::Vector3d d = vec<3>(r, "direction");
      if (!(d.norm() > 0)) throw ConfigError("rays: zero direction");
      rays.push_back({vec<3>(r, "origin"), d.normalized()});
    }
  }
  if (rays.empty()) throw ConfigError("rays: document defines no rays");
  return rays;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

void ref_columns(std::ostringstream& out, const ReferencePointSet& refs, int ix, int iy, int j) {
  const Point3d p = refs.point(ix, iy, j);
  out << ix << ',' << iy << ',' << j << ',' << format_number(p.z()) << ','
      << format_number(p.x()) << ',' << format_number(p.y());
}

template <typename Fn>
void for_each_ref(const ReferencePointSet& refs, Fn&& fn) {
  for (int ix = 0; ix < refs.spec.nx(); ++ix) {
    for (int iy = 0; iy < refs.spec.ny(); ++iy) {
      const int n = static_cast<int>(refs.heights_at(ix, iy).size());
      for (int j = 0; j < n; ++j) fn(ix, iy, j);
    }
  }
}

}  // namespace

std::string reference_points_csv(const ReferencePointSet& refs) {
  std::ostringstream out;
  out << "i_x,i_y,j,z,x,y\n";
  for_each_ref(refs, [&](int ix, int iy, int j) {
    ref_columns(out, refs, ix, iy, j);
    out << '\n';
  });
  return out.str();
}

std::string projected_points_csv(const ReferencePointSet& refs,
                                 const std::vector<CameraModel>& cameras) {
  std::ostringstream out;
  out << "i_x,i_y,j,z,x,y,u,v,cam_id,valid\n";
  for_each_ref(refs, [&](int ix, int iy, int j) {
    const Point3d p = refs.point(ix, iy, j);
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      const auto proj = project(cameras[c], p);
      ref_columns(out, refs, ix, iy, j);
      out << ',' << format_number(proj.pixel.x()) << ',' << format_number(proj.pixel.y()) << ','
          << c << ',' << (proj.valid ? 1 : 0) << '\n';
    }
  });
  return out.str();
}

std::string hit_records_csv(const std::vector<HitRecord>& records) {
  std::ostringstream out;
  out << "i_x,i_y,j,z,x,y,u,v,in_frustum,hit\n";
  for (const auto& r : records) {
    out << r.ix << ',' << r.iy << ',' << r.j << ',' << format_number(r.z) << ','
        << format_number(r.point.x()) << ',' << format_number(r.point.y()) << ','
        << format_number(r.pixel.x()) << ',' << format_number(r.pixel.y()) << ','
        << (r.in_frustum ? 1 : 0) << ',' << (r.hit ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace hgr::io
