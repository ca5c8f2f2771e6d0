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

#include "ccbf/config.hpp"

#include <initializer_list>
#include <set>
#include <string>

#include "ccbf/error.hpp"

namespace ccbf {
namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

Json point_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

Point3 point_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::pair<double, double> range_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read_if(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

Json scene_to_json(const SceneConfig& s) {
  Json j;
  j["bs_positions"] = Json::array({point_json(s.bs_positions[0]), point_json(s.bs_positions[1])});
  j["wall_planes"] = Json::array();
  for (const auto& w : s.wall_planes) {
    j["wall_planes"].push_back({{"normal", point_json(w.normal)}, {"offset", w.offset}});
  }
  j["ground_height"] = s.ground_height ? Json(*s.ground_height) : Json(nullptr);
  j["obstacles"] = Json::array();
  for (const auto& o : s.obstacles) {
    j["obstacles"].push_back({{"axis", o.axis == 0 ? "x" : "y"},
                              {"at", o.at},
                              {"span", {o.span_lo, o.span_hi}},
                              {"z", {o.z_lo, o.z_hi}}});
  }
  j["reflection_coefficient"] = s.reflection_coefficient;
  j["uplink_carrier_hz"] = s.uplink_carrier_hz;
  j["downlink_carrier_hz"] = s.downlink_carrier_hz;
  j["bandwidth_hz"] = s.bandwidth_hz;
  j["num_subcarriers"] = s.num_subcarriers;
  j["array_shape"] = {s.array_shape.nx, s.array_shape.ny};
  j["array_orientations"] = Json::array();
  for (const auto& o : s.orientations) {
    j["array_orientations"].push_back({{"normal", point_json(o.normal)}, {"up", point_json(o.up)}});
  }
  j["num_users"] = s.num_users;
  j["user_region"] = {{"x", {s.user_region.x_min, s.user_region.x_max}},
                      {"y", {s.user_region.y_min, s.user_region.y_max}}};
  j["user_height"] = s.user_height;
  j["rng_seed"] = s.rng_seed;
  return j;
}

SceneConfig scene_from_json(const Json& j) {
  reject_unknown(j,
                 {"bs_positions", "wall_planes", "ground_height", "obstacles",
                  "reflection_coefficient", "uplink_carrier_hz", "downlink_carrier_hz",
                  "bandwidth_hz", "num_subcarriers", "array_shape", "array_orientations",
                  "num_users", "user_region", "user_height", "rng_seed"},
                 "scene");
  SceneConfig s = SceneConfig::default_scene();
  try {
    if (j.contains("bs_positions")) {
      const auto& b = j.at("bs_positions");
      if (!b.is_array() || b.size() != 2) throw ConfigError("scene.bs_positions: expected two points");
      s.bs_positions = {point_from(b[0], "scene.bs_positions"), point_from(b[1], "scene.bs_positions")};
    }
    if (j.contains("wall_planes")) {
      s.wall_planes.clear();
      for (const auto& w : j.at("wall_planes")) {
        reject_unknown(w, {"normal", "offset"}, "scene.wall_planes");
        s.wall_planes.push_back({point_from(w.at("normal"), "scene.wall_planes.normal"),
                                 w.at("offset").get<double>()});
      }
    }
    if (j.contains("ground_height")) {
      const auto& g = j.at("ground_height");
      s.ground_height = g.is_null() ? std::nullopt : std::optional<double>(g.get<double>());
    }
    if (j.contains("obstacles")) {
      s.obstacles.clear();
      for (const auto& o : j.at("obstacles")) {
        reject_unknown(o, {"axis", "at", "span", "z"}, "scene.obstacles");
        Obstacle ob;
        const auto axis = o.at("axis").get<std::string>();
        if (axis != "x" && axis != "y") throw ConfigError("scene.obstacles.axis must be \"x\" or \"y\"");
        ob.axis = axis == "x" ? 0 : 1;
        ob.at = o.at("at").get<double>();
        std::tie(ob.span_lo, ob.span_hi) = range_from(o.at("span"), "scene.obstacles.span");
        std::tie(ob.z_lo, ob.z_hi) = range_from(o.at("z"), "scene.obstacles.z");
        s.obstacles.push_back(ob);
      }
    }
    read_if(j, "reflection_coefficient", s.reflection_coefficient);
    read_if(j, "uplink_carrier_hz", s.uplink_carrier_hz);
    read_if(j, "downlink_carrier_hz", s.downlink_carrier_hz);
    read_if(j, "bandwidth_hz", s.bandwidth_hz);
    read_if(j, "num_subcarriers", s.num_subcarriers);
    if (j.contains("array_shape")) {
      const auto& a = j.at("array_shape");
      if (!a.is_array() || a.size() != 2) throw ConfigError("scene.array_shape: expected [nx, ny]");
      s.array_shape = {a[0].get<int>(), a[1].get<int>()};
    }
    if (j.contains("array_orientations")) {
      const auto& a = j.at("array_orientations");
      if (!a.is_array() || a.size() != 2) throw ConfigError("scene.array_orientations: expected two entries");
      for (std::size_t i = 0; i < 2; ++i) {
        reject_unknown(a[i], {"normal", "up"}, "scene.array_orientations");
        s.orientations[i] = {point_from(a[i].at("normal"), "scene.array_orientations.normal"),
                             point_from(a[i].at("up"), "scene.array_orientations.up")};
      }
    }
    read_if(j, "num_users", s.num_users);
    if (j.contains("user_region")) {
      const auto& r = j.at("user_region");
      reject_unknown(r, {"x", "y"}, "scene.user_region");
      std::tie(s.user_region.x_min, s.user_region.x_max) = range_from(r.at("x"), "scene.user_region.x");
      std::tie(s.user_region.y_min, s.user_region.y_max) = range_from(r.at("y"), "scene.user_region.y");
    }
    read_if(j, "user_height", s.user_height);
    read_if(j, "rng_seed", s.rng_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["features"] = c.features;
  j["hidden_width"] = c.hidden_width;
  j["hidden_layers"] = c.hidden_layers;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["lengthscale"] = c.lengthscale ? Json(*c.lengthscale) : Json(nullptr);
  j["lengthscale_factor"] = c.lengthscale_factor;
  j["rff_seed"] = c.rff_seed;
  j["init_seed"] = c.init_seed;
  j["shuffle_seed"] = c.shuffle_seed;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  reject_unknown(j,
                 {"features", "hidden_width", "hidden_layers", "epochs", "batch_size",
                  "learning_rate", "beta1", "beta2", "epsilon", "lengthscale",
                  "lengthscale_factor", "rff_seed", "init_seed", "shuffle_seed"},
                 "nn");
  try {
    read_if(j, "features", c.features);
    read_if(j, "hidden_width", c.hidden_width);
    read_if(j, "hidden_layers", c.hidden_layers);
    read_if(j, "epochs", c.epochs);
    read_if(j, "batch_size", c.batch_size);
    read_if(j, "learning_rate", c.learning_rate);
    read_if(j, "beta1", c.beta1);
    read_if(j, "beta2", c.beta2);
    read_if(j, "epsilon", c.epsilon);
    if (j.contains("lengthscale")) {
      const auto& l = j.at("lengthscale");
      c.lengthscale = l.is_null() ? std::nullopt : std::optional<double>(l.get<double>());
    }
    read_if(j, "lengthscale_factor", c.lengthscale_factor);
    read_if(j, "rff_seed", c.rff_seed);
    read_if(j, "init_seed", c.init_seed);
    read_if(j, "shuffle_seed", c.shuffle_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("nn: ") + e.what());
  }
  if (c.features < 1 || c.hidden_width < 1 || c.hidden_layers < 0) throw ConfigError("nn: bad layer sizes");
  if (c.epochs < 0 || c.batch_size < 1) throw ConfigError("nn: epochs >= 0 and batch_size >= 1 required");
  if (!(c.learning_rate > 0.0)) throw ConfigError("nn: learning_rate must be > 0");
  if (c.lengthscale && !(*c.lengthscale > 0.0)) throw ConfigError("nn: lengthscale must be > 0");
  if (!(c.lengthscale_factor > 0.0)) throw ConfigError("nn: lengthscale_factor must be > 0");
  return c;
}

void RunConfig::validate() const {
  scene.validate();
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split.fraction must lie in (0, 1)");
  if (chart_dim < 1) throw ConfigError("chart.dim must be >= 1");
  if (isomap_k < 1) throw ConfigError("chart.k must be >= 1");
}

Json run_config_to_json(const RunConfig& c) {
  Json j;
  j["scene"] = scene_to_json(c.scene);
  j["split"] = {{"fraction", c.split_fraction}, {"seed", c.split_seed}};
  j["chart"] = {{"dim", c.chart_dim}, {"k", c.isomap_k}};
  j["nn"] = train_config_to_json(c.nn);
  j["cache_dir"] = c.cache_dir;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  reject_unknown(j, {"scene", "split", "chart", "nn", "cache_dir"}, "config");
  RunConfig c;
  try {
    if (j.contains("scene")) c.scene = scene_from_json(j.at("scene"));
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, {"fraction", "seed"}, "split");
      read_if(s, "fraction", c.split_fraction);
      read_if(s, "seed", c.split_seed);
    }
    if (j.contains("chart")) {
      const auto& ch = j.at("chart");
      reject_unknown(ch, {"dim", "k"}, "chart");
      read_if(ch, "dim", c.chart_dim);
      read_if(ch, "k", c.isomap_k);
    }
    if (j.contains("nn")) c.nn = train_config_from_json(j.at("nn"), c.nn);
    read_if(j, "cache_dir", c.cache_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("config file not found: " + file.string());
  return run_config_from_json(read_json(file));
}

}  // namespace ccbf
