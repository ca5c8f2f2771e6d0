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

#include "ccbf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ccbf/error.hpp"

namespace ccbf {
namespace {

constexpr double kSegmentEps = 1e-9;

Point3 unit(const Point3& v) { return v / v.norm(); }

// Orthonormal array frame: horizontal, vertical, boresight.
struct ArrayFrame {
  Point3 horizontal;
  Point3 vertical;
  Point3 boresight;
};

ArrayFrame make_frame(const ArrayOrientation& o) {
  const Point3 n = unit(o.normal);
  const Point3 up = unit(o.up - o.up.dot(n) * n);
  return {n.cross(up), up, n};
}

Point3 direction_from_angles(double azimuth, double elevation) {
  return {std::cos(elevation) * std::cos(azimuth),
          std::cos(elevation) * std::sin(azimuth), std::sin(elevation)};
}

bool inside_region(const Rect2& r, const Point3& p) {
  constexpr double tol = 1e-9;
  return p.x() >= r.x_min - tol && p.x() <= r.x_max + tol &&
         p.y() >= r.y_min - tol && p.y() <= r.y_max + tol;
}

double signed_distance(const Point3& p, const Plane& plane) {
  return plane.normal.dot(p) - plane.offset;
}

void reflect_into(std::vector<GeometricPath>& out, const Point3& tx,
                  const Point3& rx, const Plane& plane,
                  const std::vector<Obstacle>& obstacles) {
  const double s_tx = signed_distance(tx, plane);
  const double s_rx = signed_distance(rx, plane);
  if (s_tx * s_rx <= 0.0) return;
  const Point3 image = mirror(rx, plane);
  const double t = s_tx / (s_tx + s_rx);
  const Point3 bounce = tx + t * (image - tx);
  if (segment_blocked(tx, bounce, obstacles) ||
      segment_blocked(bounce, rx, obstacles)) {
    return;
  }
  out.push_back({(image - tx).norm(), unit(bounce - tx), 1});
}

}  // namespace

void SceneConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("scene: " + what); };
  if (array_shape.nx <= 0 || array_shape.ny <= 0) fail("array shape must be positive");
  if (num_subcarriers < 1) fail("num_subcarriers must be >= 1");
  if (!(uplink_carrier_hz > 0.0) || !(downlink_carrier_hz > 0.0)) fail("carriers must be > 0");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth must be > 0");
  if (!(reflection_coefficient > 0.0 && reflection_coefficient <= 1.0)) {
    fail("reflection_coefficient must lie in (0, 1]");
  }
  if (num_users < 1) fail("num_users must be >= 1");
  if (!(user_region.x_min < user_region.x_max) || !(user_region.y_min < user_region.y_max)) {
    fail("user_region is empty");
  }
  for (const auto& o : orientations) {
    if (o.normal.norm() < 1e-12 || o.up.norm() < 1e-12) fail("array orientation vectors must be nonzero");
    if (unit(o.up).cross(unit(o.normal)).norm() < 1e-6) fail("array up vector is parallel to its normal");
  }
  for (const auto& w : wall_planes) {
    if (std::abs(w.normal.norm() - 1.0) > 1e-9) fail("wall normals must be unit vectors");
    if (std::abs(w.normal.z()) > 1e-12) fail("walls must be vertical");
  }
  for (const auto& o : obstacles) {
    if (o.axis != 0 && o.axis != 1) fail("obstacle axis must be 0 (x) or 1 (y)");
    if (!(o.span_lo < o.span_hi) || !(o.z_lo < o.z_hi)) fail("obstacle rectangle is empty");
  }
  // The region must lie strictly between the walls: every corner on the
  // same side of each wall as the first base station.
  const Point3 corners[] = {
      {user_region.x_min, user_region.y_min, user_height},
      {user_region.x_min, user_region.y_max, user_height},
      {user_region.x_max, user_region.y_min, user_height},
      {user_region.x_max, user_region.y_max, user_height}};
  for (const auto& w : wall_planes) {
    const double side = signed_distance(bs_positions[0], w);
    if (side == 0.0) fail("base station lies on a wall");
    if (side * signed_distance(bs_positions[1], w) <= 0.0) {
      fail("base stations must lie between the walls");
    }
    for (const auto& c : corners) {
      if (side * signed_distance(c, w) <= 0.0) {
        fail("user_region must lie strictly between the wall planes");
      }
    }
  }
  if (ground_height && user_height <= *ground_height) fail("users must be above the ground");
}

SceneConfig SceneConfig::default_scene() {
  SceneConfig s;
  s.bs_positions = {Point3{-10.0, -14.0, 6.0}, Point3{10.0, 14.0, 6.0}};
  s.wall_planes = {Plane{{0.0, 1.0, 0.0}, -15.0}, Plane{{0.0, 1.0, 0.0}, 15.0}};
  s.ground_height = 0.0;
  s.obstacles = {Obstacle{1, 11.0, 2.0, 8.0, 0.0, 4.0}};
  s.orientations = {ArrayOrientation{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}},
                    ArrayOrientation{{0.0, -1.0, 0.0}, {0.0, 0.0, 1.0}}};
  s.user_region = {-20.0, 20.0, -8.0, 8.0};
  s.num_users = 2000;
  s.rng_seed = 20220601;
  return s;
}

Point3 mirror(const Point3& p, const Plane& plane) {
  return p - 2.0 * signed_distance(p, plane) * plane.normal;
}

bool segment_blocked(const Point3& a, const Point3& b,
                     const std::vector<Obstacle>& obstacles) {
  for (const auto& o : obstacles) {
    const double da = a[o.axis] - o.at;
    const double db = b[o.axis] - o.at;
    if (da * db >= 0.0) continue;
    const double t = da / (da - db);
    if (t <= kSegmentEps || t >= 1.0 - kSegmentEps) continue;
    const Point3 q = a + t * (b - a);
    const double along = q[1 - o.axis];
    if (along >= o.span_lo && along <= o.span_hi && q.z() >= o.z_lo &&
        q.z() <= o.z_hi) {
      return true;
    }
  }
  return false;
}

std::vector<GeometricPath> geometric_paths(const Point3& tx, const Point3& rx,
                                           const Geometry& geometry) {
  std::vector<GeometricPath> out;
  if (!segment_blocked(tx, rx, geometry.obstacles)) {
    out.push_back({(rx - tx).norm(), unit(rx - tx), 0});
  }
  for (const auto& wall : geometry.walls) {
    reflect_into(out, tx, rx, wall, geometry.obstacles);
  }
  if (geometry.ground_height) {
    reflect_into(out, tx, rx, Plane{{0.0, 0.0, 1.0}, *geometry.ground_height},
                 geometry.obstacles);
  }
  return out;
}

Eigen::VectorXcd steering_vector(const ArrayShape& shape, double u, double v) {
  if (u * u + v * v > 1.0 + 1e-12) {
    throw DomainError("direction cosines outside the unit disc");
  }
  Eigen::VectorXcd a(shape.size());
  for (int n = 0; n < shape.ny; ++n) {
    for (int m = 0; m < shape.nx; ++m) {
      a[m + shape.nx * n] =
          std::polar(1.0, std::numbers::pi * (m * u + n * v));
    }
  }
  return a;
}

Eigen::VectorXcd steering_vector(const ArrayShape& shape,
                                 const ArrayOrientation& orientation,
                                 double carrier_hz, double azimuth,
                                 double elevation) {
  if (!(carrier_hz > 0.0)) throw DomainError("carrier must be positive");
  const ArrayFrame frame = make_frame(orientation);
  const Point3 d = direction_from_angles(azimuth, elevation);
  if (d.dot(frame.boresight) < -1e-12) {
    throw DomainError("departure direction lies behind the array");
  }
  return steering_vector(shape, d.dot(frame.horizontal), d.dot(frame.vertical));
}

PathSet trace_paths(const SceneConfig& scene, const Point3& user,
                    int bs_index) {
  if (bs_index != 0 && bs_index != 1) throw InvalidArgument("bs_index must be 0 or 1");
  if (!inside_region(scene.user_region, user)) {
    throw InvalidArgument("user location outside user_region");
  }
  const Point3& bs = scene.bs_positions[bs_index];
  const Point3 boresight = unit(scene.orientations[bs_index].normal);
  const double wavelength = kSpeedOfLight / scene.carrier_for(bs_index);
  const Geometry geometry{scene.wall_planes, scene.ground_height,
                          scene.obstacles};

  PathSet set;
  set.bs_index = bs_index;
  for (const auto& gp : geometric_paths(bs, user, geometry)) {
    // The array's back half-space is shielded by its mounting.
    if (gp.departure.dot(boresight) <= 0.0) continue;
    Path p;
    p.length_m = gp.length_m;
    p.delay_s = gp.length_m / kSpeedOfLight;
    p.gain = wavelength / (4.0 * std::numbers::pi * gp.length_m) *
             std::pow(scene.reflection_coefficient, gp.reflections);
    p.azimuth = std::atan2(gp.departure.y(), gp.departure.x());
    p.elevation = std::asin(std::clamp(gp.departure.z(), -1.0, 1.0));
    p.reflections = gp.reflections;
    if (gp.reflections == 0) set.los = true;
    set.paths.push_back(p);
  }
  if (set.paths.empty()) {
    throw EmptyPathSet("all paths blocked between BS" +
                       std::to_string(bs_index + 1) + " and user");
  }
  return set;
}

double subcarrier_frequency(const SceneConfig& scene, double carrier_hz,
                            int s) {
  const double spacing = scene.bandwidth_hz / scene.num_subcarriers;
  return carrier_hz + (s - (scene.num_subcarriers - 1) / 2.0) * spacing;
}

ChannelVector synthesize_channel(const PathSet& paths,
                                 const SceneConfig& scene, double carrier_hz) {
  const int A = scene.antennas();
  const int S = scene.num_subcarriers;
  ChannelVector ch;
  ch.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(A) * S);
  ch.carrier_hz = carrier_hz;
  ch.bs_index = paths.bs_index;
  if (paths.paths.empty()) {
    ch.shadowed = true;
    return ch;
  }
  const auto& orientation = scene.orientations[paths.bs_index];
  for (const auto& p : paths.paths) {
    const Eigen::VectorXcd a = steering_vector(
        scene.array_shape, orientation, carrier_hz, p.azimuth, p.elevation);
    for (int s = 0; s < S; ++s) {
      const double f = subcarrier_frequency(scene, carrier_hz, s);
      // Reduce the phase modulo one cycle before scaling: f * tau is large.
      const double cycles = f * p.delay_s;
      const double frac = cycles - std::floor(cycles);
      const std::complex<double> coef =
          p.gain * std::polar(1.0, -2.0 * std::numbers::pi * frac);
      ch.values.segment(static_cast<Eigen::Index>(s) * A, A) += coef * a;
    }
  }
  return ch;
}

}  // namespace ccbf
