// Writes the CLI golden fixture: a grid spec, a point cloud and the height map
// the brute-force oracle derives from it. Self-contained on purpose: it shares
// no code with the library, including the binary encoders.
//
//   make_golden <out_dir>

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_magic(std::vector<std::uint8_t>& b, const char* magic) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(magic[i]));
  put_u32(b, 1);
}

void save(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <out_dir>\n";
    return 1;
  }
  const std::string dir = argv[1];
  const oracle::Box box{{-4.0, -4.0, -1.0}, {4.0, 4.0, 5.4}, 0.4, 0.4, {20, 20, 16}};

  std::ofstream(dir + "/fixture_spec.json")
      << "{\"x_min\": -4, \"x_max\": 4, \"y_min\": -4, \"y_max\": 4, "
         "\"z_min\": -1, \"z_max\": 5.4, \"delta_xy\": 0.4, \"delta_z\": 0.4}\n";

  std::mt19937_64 gen(20240611);
  auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  std::vector<std::array<float, 3>> pts;
  for (int i = 0; i < 600; ++i) {
    pts.push_back({static_cast<float>(-4.5 + 9.0 * unit()), static_cast<float>(-4.5 + 9.0 * unit()),
                   static_cast<float>(-1.5 + 7.5 * unit())});
  }
  // The 1.8 m vehicle-top pillar, the lower corner and excluded upper faces.
  pts.push_back({0.0f, 0.0f, 1.75f});
  pts.push_back({-4.0f, -4.0f, -1.0f});
  pts.push_back({0.1f, 0.1f, 5.4f});
  pts.push_back({4.0f, 0.1f, 0.0f});

  std::vector<std::uint8_t> cloud;
  put_magic(cloud, "HPRP");
  put_u64(cloud, pts.size());
  for (const auto& p : pts) {
    for (float c : p) put_u32(cloud, std::bit_cast<std::uint32_t>(c));
  }
  save(dir + "/fixture_points.hprp", cloud);

  std::vector<std::array<double, 3>> as_double;
  for (const auto& p : pts) as_double.push_back({p[0], p[1], p[2]});
  const auto pillars = oracle::heightmap_brute_force(box, as_double);

  std::vector<std::uint8_t> golden;
  put_magic(golden, "HPRH");
  put_u32(golden, 20);
  put_u32(golden, 20);
  for (const auto& p : pillars) {
    put_u32(golden, p.valid ? std::bit_cast<std::uint32_t>(static_cast<float>(p.height)) : 0x7FC00000u);
  }
  save(dir + "/fixture_heights.golden.hprh", golden);
  return 0;
}
