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

#ifndef CCBF_DATASET_HPP_
#define CCBF_DATASET_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/io.hpp"
#include "ccbf/scene.hpp"

namespace ccbf {

enum class Band { kUplinkBs1 = 0, kDownlinkBs2 = 1 };

// One triplet per user: location, uplink channel to BS1, downlink channel
// from BS2. Channels are stored column-per-user.
struct Dataset {
  SceneConfig scene;
  Eigen::Matrix<double, 3, Eigen::Dynamic> locations;
  Eigen::MatrixXcd uplink;
  Eigen::MatrixXcd downlink;
  // User-major pairs: los[2*u] for BS1, los[2*u + 1] for BS2.
  std::vector<std::uint8_t> los;
  // Candidate locations drawn, including rejected (shadowed) ones.
  std::uint64_t candidates_drawn = 0;

  std::size_t size() const { return static_cast<std::size_t>(locations.cols()); }
  const Eigen::MatrixXcd& channels(Band band) const {
    return band == Band::kUplinkBs1 ? uplink : downlink;
  }
  bool los_at(std::size_t user, int bs_index) const {
    return los[2 * user + static_cast<std::size_t>(bs_index)] != 0;
  }
  // Central-subcarrier slice (length A) of a user's channel.
  Eigen::VectorXcd central(Band band, std::size_t user) const;
};

// Candidate user location number `counter` for the given seed.
Point3 sample_user_location(const SceneConfig& scene, std::uint64_t counter);

// Users whose path set toward either station is empty are resampled from
// the next counter value. Throws ConfigError when more than 5% of candidates
// are shadowed.
Dataset generate_dataset(const SceneConfig& scene);

// Directory layout: manifest.json, locations.f64 (U x 3), uplink.f64 and
// downlink.f64 (U x A*S x 2, interleaved re/im), los.u8 (U x 2).
void save_dataset(const Dataset& dataset, const fs::path& dir);
Dataset load_dataset(const fs::path& dir);

}  // namespace ccbf

#endif  // CCBF_DATASET_HPP_
