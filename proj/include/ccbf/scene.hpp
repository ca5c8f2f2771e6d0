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

#ifndef CCBF_SCENE_HPP_
#define CCBF_SCENE_HPP_

// Deterministic street-canyon propagation model: line of sight plus
// first-order image-source reflections off the walls and the ground,
// observed by two base stations with uniform planar arrays.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace ccbf {

using Point3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;

// Points p with normal . p == offset. Walls are vertical (normal.z == 0).
struct Plane {
  Point3 normal{0.0, 1.0, 0.0};
  double offset = 0.0;
};

// Vertical rectangle lying in the plane {axis coordinate == at}, where axis
// is 0 (x) or 1 (y). It spans [span_lo, span_hi] along the other horizontal
// axis and [z_lo, z_hi] vertically.
struct Obstacle {
  int axis = 1;
  double at = 0.0;
  double span_lo = 0.0;
  double span_hi = 0.0;
  double z_lo = 0.0;
  double z_hi = 0.0;
};

struct ArrayShape {
  int nx = 8;
  int ny = 8;
  int size() const { return nx * ny; }
};

// Boresight normal and up vector. Elements are laid out along
// horizontal = normal x up (index m) and up (index n).
struct ArrayOrientation {
  Point3 normal{0.0, 1.0, 0.0};
  Point3 up{0.0, 0.0, 1.0};
};

struct Rect2 {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

struct SceneConfig {
  std::array<Point3, 2> bs_positions;
  std::vector<Plane> wall_planes;
  std::optional<double> ground_height;
  std::vector<Obstacle> obstacles;
  double reflection_coefficient = 0.7;
  double uplink_carrier_hz = 3.5e9;
  double downlink_carrier_hz = 28e9;
  double bandwidth_hz = 20e6;
  int num_subcarriers = 16;
  ArrayShape array_shape;
  std::array<ArrayOrientation, 2> orientations;
  int num_users = 2000;
  Rect2 user_region;
  double user_height = 1.5;
  std::uint64_t rng_seed = 1;

  int antennas() const { return array_shape.size(); }
  // Length of a vectorized channel, A * S.
  int channel_length() const { return antennas() * num_subcarriers; }
  // BS 0 observes the uplink band, BS 1 the downlink band.
  double carrier_for(int bs_index) const {
    return bs_index == 0 ? uplink_carrier_hz : downlink_carrier_hz;
  }

  // Throws ConfigError on any violated invariant.
  void validate() const;

  // Two base stations on opposite sides of a street with a parked-truck
  // style obstacle; both LoS and NLoS users occur for each station.
  static SceneConfig default_scene();
};

struct Path {
  double length_m = 0.0;
  double delay_s = 0.0;
  std::complex<double> gain;
  double azimuth = 0.0;    // global, from +x towards +y
  double elevation = 0.0;  // global, above the horizontal plane
  int reflections = 0;
};

struct PathSet {
  int bs_index = 0;
  bool los = false;
  std::vector<Path> paths;
};

// Propagation geometry shared by both stations.
struct Geometry {
  std::vector<Plane> walls;
  std::optional<double> ground_height;
  std::vector<Obstacle> obstacles;
};

struct GeometricPath {
  double length_m = 0.0;
  Point3 departure;  // unit vector leaving tx
  int reflections = 0;
};

// Unblocked LoS and first-order reflections between tx and rx, LoS first,
// then walls in order, then the ground.
std::vector<GeometricPath> geometric_paths(const Point3& tx, const Point3& rx,
                                           const Geometry& geometry);

// True when the open segment a-b crosses any obstacle.
bool segment_blocked(const Point3& a, const Point3& b,
                     const std::vector<Obstacle>& obstacles);

// Reflects p across the plane.
Point3 mirror(const Point3& p, const Plane& plane);

// UPA response for direction cosines (u, v) in array coordinates, half
// wavelength spacing: entry m + nx*n is exp(j*pi*(m*u + n*v)). Requires
// u^2 + v^2 <= 1.
Eigen::VectorXcd steering_vector(const ArrayShape& shape, double u, double v);

// UPA response towards a global departure direction. Directions behind the
// array (negative boresight component) raise DomainError.
Eigen::VectorXcd steering_vector(const ArrayShape& shape,
                                 const ArrayOrientation& orientation,
                                 double carrier_hz, double azimuth,
                                 double elevation);

PathSet trace_paths(const SceneConfig& scene, const Point3& user,
                    int bs_index);

// Channel vector of length A*S, antenna index fastest.
struct ChannelVector {
  Eigen::VectorXcd values;
  double carrier_hz = 0.0;
  int bs_index = 0;
  bool shadowed = false;
};

ChannelVector synthesize_channel(const PathSet& paths,
                                 const SceneConfig& scene, double carrier_hz);

// Subcarrier frequency f_s = carrier + (s - (S-1)/2) * bandwidth / S.
double subcarrier_frequency(const SceneConfig& scene, double carrier_hz,
                            int s);

// Index of the subcarrier used for precoding (S / 2).
inline int central_subcarrier(int num_subcarriers) {
  return num_subcarriers / 2;
}

}  // namespace ccbf

#endif  // CCBF_SCENE_HPP_
