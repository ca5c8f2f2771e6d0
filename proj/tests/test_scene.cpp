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


#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ccbf/chart.hpp"
#include "ccbf/dataset.hpp"
#include "ccbf/error.hpp"
#include "ccbf/scene.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ccbf;
using cd = std::complex<double>;

TEST_SUITE("scene") {

TEST_CASE("steering vector at broadside is all ones") {
  const auto a = steering_vector(ArrayShape{8, 8}, 0.0, 0.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("two-element array along u = 1") {
  const auto a = steering_vector(ArrayShape{2, 1}, 1.0, 0.0);
  REQUIRE(a.size() == 2);
  CHECK(std::abs(a[0] - cd(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(a[1] - cd(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering entries have unit magnitude") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> az(-1.4, 1.4), el(-1.0, 1.0);
  const ArrayOrientation facing_y{{0, 1, 0}, {0, 0, 1}};
  for (int t = 0; t < 50; ++t) {
    const double a_az = std::numbers::pi / 2 + az(gen);
    const auto a = steering_vector(ArrayShape{8, 8}, facing_y, 3.5e9, a_az, el(gen));
    CHECK(std::abs(a.norm() - 8.0) < 1e-12);
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-12);
  }
}

TEST_CASE("element layout: horizontal index fastest") {
  // facing +y with up +z puts the horizontal axis along +x
  const ArrayOrientation o{{0, 1, 0}, {0, 0, 1}};
  const double az = 1.1, el = 0.3;
  const double u = std::cos(el) * std::cos(az);
  const double v = std::sin(el);
  const auto a = steering_vector(ArrayShape{4, 3}, o, 28e9, az, el);
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 4; ++m)
      CHECK(std::abs(a[m + 4 * n] - std::exp(cd(0.0, std::numbers::pi * (m * u + n * v)))) < 1e-12);
}

TEST_CASE("directions behind the array are rejected") {
  const ArrayOrientation o{{0, 1, 0}, {0, 0, 1}};
  CHECK_THROWS_AS(steering_vector(ArrayShape{8, 8}, o, 3.5e9, -std::numbers::pi / 2, 0.0),
                  DomainError);
  CHECK_THROWS_AS(steering_vector(ArrayShape{8, 8}, 0.9, 0.9), DomainError);
  CHECK_THROWS_AS(steering_vector(ArrayShape{8, 8}, o, 0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("free space: one path with gain lambda / (4 pi d)") {
  const SceneConfig s = testutil::los_only_scene(10);
  const Point3 user{3.0, 2.0, 1.5};
  const PathSet ps = trace_paths(s, user, 0);
  REQUIRE(ps.paths.size() == 1);
  CHECK(ps.los);
  const double d = (user - s.bs_positions[0]).norm();
  const double lambda = kSpeedOfLight / s.uplink_carrier_hz;
  CHECK(std::abs(ps.paths[0].length_m - d) < 1e-12);
  CHECK(std::abs(ps.paths[0].delay_s - d / kSpeedOfLight) < 1e-20);
  CHECK(std::abs(ps.paths[0].gain - cd(lambda / (4 * std::numbers::pi * d), 0.0)) < 1e-15);
}

TEST_CASE("obstacle removes LoS but keeps wall reflections") {
  SceneConfig s = SceneConfig::default_scene();
  // a tall screen in front of BS1; only the far-wall bounce gets around it
  s.obstacles = {Obstacle{1, -12.0, -9.0, 0.0, 0.0, 10.0}};
  const Point3 user{10.0, 0.0, 1.5};
  const PathSet ps = trace_paths(s, user, 0);
  CHECK_FALSE(ps.los);
  REQUIRE(ps.paths.size() == 1);
  CHECK(ps.paths[0].reflections == 1);
}

TEST_CASE("wall reflection length matches brute-force search") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ux(-20, 20), uy(-8, 8);
  const SceneConfig s = SceneConfig::default_scene();
  const Geometry g{s.wall_planes, s.ground_height, {}};
  for (int t = 0; t < 10; ++t) {
    const Point3 tx = s.bs_positions[t % 2];
    const Point3 rx{ux(gen), uy(gen), 1.5};
    const auto paths = geometric_paths(tx, rx, g);
    REQUIRE(paths.size() == 4);
    CHECK(std::abs(paths[1].length_m - oracle::brute_force_reflection_length(tx, rx, 1, -15.0)) < 1e-6);
    CHECK(std::abs(paths[2].length_m - oracle::brute_force_reflection_length(tx, rx, 1, 15.0)) < 1e-6);
    CHECK(std::abs(paths[3].length_m - oracle::brute_force_reflection_length(tx, rx, 2, 0.0)) < 1e-6);
  }
}

TEST_CASE("swapping endpoints preserves path lengths") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> ux(-20, 20), uy(-8, 8);
  const SceneConfig s = SceneConfig::default_scene();
  const Geometry g{s.wall_planes, s.ground_height, s.obstacles};
  for (int t = 0; t < 50; ++t) {
    const Point3 a = s.bs_positions[t % 2];
    const Point3 b{ux(gen), uy(gen), 1.5};
    const auto ab = geometric_paths(a, b, g);
    const auto ba = geometric_paths(b, a, g);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      CHECK(std::abs(ab[i].length_m - ba[i].length_m) < 1e-12);
      CHECK(ab[i].reflections == ba[i].reflections);
    }
  }
}

TEST_CASE("doubling distances halves gain and doubles delay") {
  SceneConfig s = testutil::los_only_scene(10);
  SceneConfig s2 = s;
  for (auto& p : s2.bs_positions) p *= 2.0;
  s2.user_region = {2 * s.user_region.x_min, 2 * s.user_region.x_max, 2 * s.user_region.y_min,
                    2 * s.user_region.y_max};
  const Point3 user{4.0, -3.0, 1.5};
  for (int bs = 0; bs < 2; ++bs) {
    const auto p1 = trace_paths(s, user, bs).paths.at(0);
    const auto p2 = trace_paths(s2, 2.0 * user, bs).paths.at(0);
    CHECK(std::abs(p2.gain / p1.gain - cd(0.5, 0.0)) < 1e-12);
    CHECK(std::abs(p2.delay_s / p1.delay_s - 2.0) < 1e-12);
  }
}

TEST_CASE("users outside the region are rejected") {
  const SceneConfig s = SceneConfig::default_scene();
  CHECK_THROWS_AS(trace_paths(s, Point3{0.0, 12.0, 1.5}, 0), InvalidArgument);
}

TEST_CASE("fully blocked user raises EmptyPathSet") {
  SceneConfig s = testutil::los_only_scene(10);
  s.obstacles = {Obstacle{1, -10.0, -100.0, 100.0, -100.0, 100.0}};
  CHECK_THROWS_AS(trace_paths(s, Point3{0.0, 0.0, 1.5}, 0), EmptyPathSet);
}

TEST_CASE("paths leaving behind the array are dropped") {
  SceneConfig s = testutil::los_only_scene(10);
  s.orientations[0].normal = {0.0, -1.0, 0.0};  // BS1 faces away from the street
  CHECK_THROWS_AS(trace_paths(s, Point3{0.0, 0.0, 1.5}, 0), EmptyPathSet);
}

TEST_CASE("empty path set synthesizes a flagged zero channel") {
  const SceneConfig s = SceneConfig::default_scene();
  PathSet empty;
  const auto ch = synthesize_channel(empty, s, s.uplink_carrier_hz);
  CHECK(ch.shadowed);
  CHECK(ch.values.size() == s.channel_length());
  CHECK(ch.values.norm() == 0.0);
}

PathSet single_path(double delay, cd gain, double az, double el) {
  PathSet ps;
  ps.bs_index = 0;
  ps.los = true;
  Path p;
  p.delay_s = delay;
  p.length_m = delay * kSpeedOfLight;
  p.gain = gain;
  p.azimuth = az;
  p.elevation = el;
  ps.paths.push_back(p);
  return ps;
}

TEST_CASE("zero-delay unit path repeats the steering vector") {
  const SceneConfig s = SceneConfig::default_scene();
  const auto ps = single_path(0.0, 1.0, 1.2, 0.1);
  const auto ch = synthesize_channel(ps, s, s.uplink_carrier_hz);
  const auto a = steering_vector(s.array_shape, s.orientations[0], s.uplink_carrier_hz, 1.2, 0.1);
  const int A = s.antennas();
  for (int sc = 0; sc < s.num_subcarriers; ++sc)
    CHECK((ch.values.segment(sc * A, A) - a).norm() < 1e-12);
}

TEST_CASE("delay of one symbol period is flat across subcarriers") {
  const SceneConfig s = SceneConfig::default_scene();
  const double df = s.bandwidth_hz / s.num_subcarriers;
  const auto ps = single_path(1.0 / df, 1.0, 1.5, 0.0);
  const auto ch = synthesize_channel(ps, s, s.uplink_carrier_hz);
  const int A = s.antennas();
  for (int sc = 0; sc + 1 < s.num_subcarriers; ++sc)
    CHECK((ch.values.segment((sc + 1) * A, A) - ch.values.segment(sc * A, A)).norm() < 1e-9);
}

TEST_CASE("two-path channel matches a scalar summation") {
  SceneConfig s = SceneConfig::default_scene();
  s.num_subcarriers = 4;
  s.array_shape = {4, 2};
  PathSet ps = single_path(57.3e-9, cd(0.3, -0.1), 1.0, 0.2);
  ps.paths.push_back(single_path(83.9e-9, cd(-0.05, 0.2), 2.0, -0.3).paths[0]);
  const double fc = s.uplink_carrier_hz;
  const auto ch = synthesize_channel(ps, s, fc);
  const double df = s.bandwidth_hz / 4.0;
  for (int sc = 0; sc < 4; ++sc) {
    const double f = fc + (sc - 1.5) * df;
    for (int n = 0; n < 2; ++n) {
      for (int m = 0; m < 4; ++m) {
        cd expected = 0.0;
        for (const auto& p : ps.paths) {
          const double u = std::cos(p.elevation) * std::cos(p.azimuth);
          const double v = std::sin(p.elevation);
          expected += p.gain * std::exp(cd(0.0, -2 * std::numbers::pi * f * p.delay_s)) *
                      std::exp(cd(0.0, std::numbers::pi * (m * u + n * v)));
        }
        CHECK(std::abs(ch.values[(m + 4 * n) + sc * 8] - expected) < 1e-9 * std::abs(expected) + 1e-15);
      }
    }
  }
}

TEST_CASE("subcarrier grid is centred on the carrier") {
  const SceneConfig s = SceneConfig::default_scene();
  const double df = s.bandwidth_hz / 16;
  CHECK(subcarrier_frequency(s, 1e9, 0) == doctest::Approx(1e9 - 7.5 * df));
  CHECK(subcarrier_frequency(s, 1e9, 15) == doctest::Approx(1e9 + 7.5 * df));
  CHECK(central_subcarrier(16) == 8);
}

TEST_CASE("dataset generation is deterministic byte for byte") {
  SceneConfig s = SceneConfig::default_scene();
  s.num_users = 10;
  testutil::TempDir dir("ds");
  save_dataset(generate_dataset(s), dir / "a");
  save_dataset(generate_dataset(s), dir / "b");
  for (const char* f : {"manifest.json", "locations.f64", "uplink.f64", "downlink.f64", "los.u8"}) {
    CHECK(testutil::read_bytes(dir / "a" / f) == testutil::read_bytes(dir / "b" / f));
  }
}

TEST_CASE("dataset shapes and round trip") {
  SceneConfig s = SceneConfig::default_scene();
  s.num_users = 12;
  const Dataset ds = generate_dataset(s);
  CHECK(ds.size() == 12);
  CHECK(ds.locations.cols() == 12);
  CHECK(ds.uplink.rows() == 1024);
  CHECK(ds.uplink.cols() == 12);
  CHECK(ds.downlink.rows() == 1024);
  CHECK(ds.los.size() == 24);
  testutil::TempDir dir("rt");
  save_dataset(ds, dir.path());
  const Dataset back = load_dataset(dir.path());
  CHECK(back.locations == ds.locations);
  CHECK(back.uplink == ds.uplink);
  CHECK(back.downlink == ds.downlink);
  CHECK(back.los == ds.los);
  CHECK((back.central(Band::kDownlinkBs2, 3) - ds.downlink.col(3).segment(8 * 64, 64)).norm() == 0.0);
}

TEST_CASE("default scene has LoS and NLoS users for the downlink station") {
  const Dataset ds = generate_dataset(SceneConfig::default_scene());
  std::size_t los[2] = {0, 0};
  for (std::size_t u = 0; u < ds.size(); ++u)
    for (int b = 0; b < 2; ++b) los[b] += ds.los_at(u, b);
  CHECK(los[0] > 0);
  CHECK(los[1] > 0);
  CHECK(los[1] < ds.size());
  CHECK(ds.candidates_drawn - ds.size() <= ds.size() / 20);
}

TEST_CASE("too many shadowed users is a configuration error") {
  SceneConfig s = testutil::los_only_scene(20);
  s.obstacles = {Obstacle{1, -10.0, -20.0, 0.0, -100.0, 100.0}};
  CHECK_THROWS_AS(generate_dataset(s), ConfigError);
}

TEST_CASE("channel changes continuously with location") {
  const SceneConfig s = SceneConfig::default_scene();
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ux(-18, 18), uy(-6, 6);
  const double eps[] = {0.01, 0.04, 0.16};
  double mean[3] = {0, 0, 0};
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const Point3 p{ux(gen), uy(gen), 1.5};
    const auto h0 = synthesize_channel(trace_paths(s, p, 0), s, s.uplink_carrier_hz).values;
    for (int e = 0; e < 3; ++e) {
      const Point3 q = p + Point3{eps[e], 0.0, 0.0};
      const auto h1 = synthesize_channel(trace_paths(s, q, 0), s, s.uplink_carrier_hz).values;
      mean[e] += pi_distance(h0, h1) / trials;
    }
  }
  CHECK(mean[0] < 0.1);
  CHECK(mean[0] < mean[1]);
  CHECK(mean[1] < mean[2]);
}

TEST_CASE("scene validation") {
  SceneConfig s = SceneConfig::default_scene();
  s.user_region.y_max = 20.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SceneConfig::default_scene();
  s.reflection_coefficient = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SceneConfig::default_scene();
  s.num_subcarriers = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_NOTHROW(SceneConfig::default_scene().validate());
}

}  // TEST_SUITE
