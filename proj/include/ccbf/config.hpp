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

#ifndef CCBF_CONFIG_HPP_
#define CCBF_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "ccbf/io.hpp"
#include "ccbf/nn.hpp"
#include "ccbf/scene.hpp"

namespace ccbf {

// Everything a variant run depends on. Every field has a default and can be
// overridden from the config file; see configs/default.json.
struct RunConfig {
  SceneConfig scene = SceneConfig::default_scene();
  double split_fraction = 0.7;
  std::uint64_t split_seed = 7;
  int chart_dim = 5;
  int isomap_k = 5;
  TrainConfig nn;
  // Shared by variants so that datasets and charts are computed once.
  // Empty means <out>/cache.
  std::string cache_dir;

  void validate() const;
};

Json scene_to_json(const SceneConfig& scene);
SceneConfig scene_from_json(const Json& j);

Json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

Json run_config_to_json(const RunConfig& config);
// Keys absent from j keep their defaults. Unknown keys raise ConfigError so
// typos do not silently fall back to defaults.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const fs::path& file);

}  // namespace ccbf

#endif  // CCBF_CONFIG_HPP_
