// Copyright 2026 The ccbf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ccbf/dataset.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "ccbf/config.hpp"
#include "ccbf/error.hpp"
#include "ccbf/log.hpp"
#include "ccbf/parallel.hpp"
#include "ccbf/random.hpp"

namespace ccbf {
namespace {

constexpr double kMaxShadowedFraction = 0.05;

struct Candidate {
  Point3 location;
  std::optional<ChannelVector> up;
  std::optional<ChannelVector> down;
  bool los_up = false;
  bool los_down = false;
};

Candidate evaluate_candidate(const SceneConfig& scene, std::uint64_t counter) {
  Candidate c;
  c.location = sample_user_location(scene, counter);
  try {
    const PathSet p1 = trace_paths(scene, c.location, 0);
    const PathSet p2 = trace_paths(scene, c.location, 1);
    c.up = synthesize_channel(p1, scene, scene.uplink_carrier_hz);
    c.down = synthesize_channel(p2, scene, scene.downlink_carrier_hz);
    c.los_up = p1.los;
    c.los_down = p2.los;
  } catch (const EmptyPathSet&) {
    c.up.reset();
    c.down.reset();
  }
  return c;
}

}  // namespace

Eigen::VectorXcd Dataset::central(Band band, std::size_t user) const {
  const int A = scene.antennas();
  const int s = central_subcarrier(scene.num_subcarriers);
  return channels(band).col(static_cast<Eigen::Index>(user)).segment(
      static_cast<Eigen::Index>(s) * A, A);
}

Point3 sample_user_location(const SceneConfig& scene, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(scene.rng_seed);
  const double ux = unit_double(splitmix64(key ^ splitmix64(2 * counter)));
  const double uy = unit_double(splitmix64(key ^ splitmix64(2 * counter + 1)));
  const Rect2& r = scene.user_region;
  return {r.x_min + (r.x_max - r.x_min) * ux,
          r.y_min + (r.y_max - r.y_min) * uy, scene.user_height};
}

Dataset generate_dataset(const SceneConfig& scene) {
  scene.validate();
  const std::size_t U = static_cast<std::size_t>(scene.num_users);
  const Eigen::Index L = scene.channel_length();

  Dataset ds;
  ds.scene = scene;
  ds.locations.resize(3, static_cast<Eigen::Index>(U));
  ds.uplink.resize(L, static_cast<Eigen::Index>(U));
  ds.downlink.resize(L, static_cast<Eigen::Index>(U));
  ds.los.assign(2 * U, 0);

  std::size_t accepted = 0;
  std::uint64_t next_counter = 0;
  std::uint64_t shadowed = 0;
  while (accepted < U) {
    const std::size_t want = U - accepted;
    const std::size_t block = want + want / 8 + 16;
    std::vector<Candidate> cands(block);
    parallel_for(0, block, [&](std::size_t i) {
      cands[i] = evaluate_candidate(scene, next_counter + i);
    });
    for (std::size_t i = 0; i < block && accepted < U; ++i) {
      ++ds.candidates_drawn;
      const Candidate& c = cands[i];
      if (!c.up) {
        ++shadowed;
        continue;
      }
      const auto col = static_cast<Eigen::Index>(accepted);
      ds.locations.col(col) = c.location;
      ds.uplink.col(col) = c.up->values;
      ds.downlink.col(col) = c.down->values;
      ds.los[2 * accepted] = c.los_up ? 1 : 0;
      ds.los[2 * accepted + 1] = c.los_down ? 1 : 0;
      ++accepted;
    }
    next_counter += block;
    if (static_cast<double>(shadowed) >
        kMaxShadowedFraction * static_cast<double>(ds.candidates_drawn) + 1.0) {
      break;
    }
  }
  const double fraction =
      static_cast<double>(shadowed) / static_cast<double>(ds.candidates_drawn);
  if (fraction > kMaxShadowedFraction) {
    throw ConfigError("scene: " + std::to_string(shadowed) + " of " +
                      std::to_string(ds.candidates_drawn) +
                      " candidate users are fully shadowed (limit 5%)");
  }
  if (shadowed > 0) {
    log_info("resampled " + std::to_string(shadowed) + " shadowed users");
  }
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ensure_directory(dir);
  const std::size_t U = ds.size();
  const int A = ds.scene.antennas();
  const int S = ds.scene.num_subcarriers;
  const std::size_t L = static_cast<std::size_t>(A) * S;

  // Column-major 3 x U is row-major U x 3; complex columns are interleaved
  // (re, im) pairs per user.
  write_f64(dir / "locations.f64", {ds.locations.data(), 3 * U});
  write_f64(dir / "uplink.f64",
            {reinterpret_cast<const double*>(ds.uplink.data()), 2 * L * U});
  write_f64(dir / "downlink.f64",
            {reinterpret_cast<const double*>(ds.downlink.data()), 2 * L * U});
  write_u8(dir / "los.u8", ds.los);

  Json m;
  m["format"] = "ccbf-dataset";
  m["version"] = 1;
  m["endianness"] = "little";
  m["num_users"] = U;
  m["antennas"] = A;
  m["subcarriers"] = S;
  m["channel_length"] = L;
  m["seed"] = ds.scene.rng_seed;
  m["candidates_drawn"] = ds.candidates_drawn;
  m["layout"] = "channel index a + s*A (antenna fastest)";
  m["files"] = {
      {"locations", {{"name", "locations.f64"}, {"dtype", "float64"}, {"shape", {U, 3}}}},
      {"uplink", {{"name", "uplink.f64"}, {"dtype", "float64"}, {"shape", {U, L, 2}}}},
      {"downlink", {{"name", "downlink.f64"}, {"dtype", "float64"}, {"shape", {U, L, 2}}}},
      {"los", {{"name", "los.u8"}, {"dtype", "uint8"}, {"shape", {U, 2}}}}};
  m["scene"] = scene_to_json(ds.scene);
  write_json(dir / "manifest.json", m);
}

Dataset load_dataset(const fs::path& dir) {
  const Json m = read_json(dir / "manifest.json");
  if (m.value("format", "") != "ccbf-dataset") {
    throw IoError(dir.string() + ": not a ccbf dataset");
  }
  if (m.value("endianness", "") != "little") {
    throw IoError(dir.string() + ": unsupported endianness");
  }
  Dataset ds;
  ds.scene = scene_from_json(m.at("scene"));
  const std::size_t U = m.at("num_users").get<std::size_t>();
  const std::size_t L = m.at("channel_length").get<std::size_t>();
  if (L != static_cast<std::size_t>(ds.scene.channel_length())) {
    throw IoError(dir.string() + ": channel_length disagrees with scene");
  }
  ds.candidates_drawn = m.value("candidates_drawn", std::uint64_t{0});
  const auto n = static_cast<Eigen::Index>(U);

  const auto loc = read_f64(dir / "locations.f64", 3 * U);
  ds.locations = Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>>(
      loc.data(), 3, n);
  auto load_channels = [&](const char* name) {
    const auto raw = read_f64(dir / name, 2 * L * U);
    return Eigen::MatrixXcd(Eigen::Map<const Eigen::MatrixXcd>(
        reinterpret_cast<const std::complex<double>*>(raw.data()),
        static_cast<Eigen::Index>(L), n));
  };
  ds.uplink = load_channels("uplink.f64");
  ds.downlink = load_channels("downlink.f64");
  ds.los = read_u8(dir / "los.u8", 2 * U);
  return ds;
}

}  // namespace ccbf
