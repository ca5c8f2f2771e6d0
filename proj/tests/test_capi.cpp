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


// Exercises the shared library through its C interface only.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ccbf/ccbf.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path;
  Scratch() {
    path = fs::temp_directory_path() / ("ccbf-capi-" + std::to_string(std::rand()) + "-" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const char* s) const { return (path / s).string(); }
};

const std::string kTiny = std::string(CCBF_SOURCE_DIR) + "/configs/tiny_los.json";

int g_warnings = 0;
void count_warnings(ccbf_log_level level, const char*, void*) {
  if (level == CCBF_LOG_WARNING) ++g_warnings;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status reporting") {
  CHECK(std::string(ccbf_version()) == "0.1.0");
  CHECK(std::string(ccbf_status_name(CCBF_ERR_CONFIG)) == "configuration error");
  ccbf_config* cfg = nullptr;
  CHECK(ccbf_config_load("/nonexistent/config.json", &cfg) != CCBF_OK);
  CHECK(cfg == nullptr);
  CHECK(std::string(ccbf_last_error()).size() > 0);
  CHECK(ccbf_config_default(nullptr) == CCBF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config handles") {
  ccbf_config* cfg = nullptr;
  REQUIRE(ccbf_config_load(kTiny.c_str(), &cfg) == CCBF_OK);
  size_t users = 0;
  CHECK(ccbf_config_num_users(cfg, &users) == CCBF_OK);
  CHECK(users == 200);
  char* json = nullptr;
  REQUIRE(ccbf_config_to_json(cfg, &json) == CCBF_OK);
  CHECK(std::string(json).find("num_users") != std::string::npos);
  ccbf_string_free(json);
  ccbf_config_free(cfg);
}

TEST_CASE("malformed config is a configuration error") {
  Scratch dir;
  const std::string path = dir / "bad.json";
  FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("{\"scene\": {\"num_users\": -4}}", f);
  std::fclose(f);
  ccbf_config* cfg = nullptr;
  CHECK(ccbf_config_load(path.c_str(), &cfg) == CCBF_ERR_CONFIG);
  f = std::fopen(path.c_str(), "w");
  std::fputs("{not json", f);
  std::fclose(f);
  CHECK(ccbf_config_load(path.c_str(), &cfg) == CCBF_ERR_CONFIG);
}

TEST_CASE("stages through the C interface") {
  Scratch dir;
  ccbf_config* cfg = nullptr;
  REQUIRE(ccbf_config_load(kTiny.c_str(), &cfg) == CCBF_OK);
  REQUIRE(ccbf_generate(cfg, (dir / "ds").c_str()) == CCBF_OK);
  REQUIRE(ccbf_chart((dir / "ds").c_str(), "one_shot", 5, 5, 0.7, 7, (dir / "chart").c_str()) == CCBF_OK);
  CHECK(ccbf_chart((dir / "ds").c_str(), "sideways", 5, 5, 0.7, 7, (dir / "x").c_str()) == CCBF_ERR_CONFIG);

  ccbf_train_args args{};
  args.variant = "V2";
  const std::string ds = dir / "ds";
  const std::string chart = dir / "chart";
  args.dataset_dir = ds.c_str();
  args.chart_dir = chart.c_str();
  args.target = "bs1_ul";
  REQUIRE(ccbf_train(&args, cfg, (dir / "model").c_str()) == CCBF_OK);
  ccbf_report* rep = nullptr;
  REQUIRE(ccbf_eval((dir / "model").c_str(), (dir / "ds").c_str(), (dir / "eval").c_str(), &rep) == CCBF_OK);
  ccbf_summary s{};
  REQUIRE(ccbf_report_summary(rep, &s) == CCBF_OK);
  CHECK(s.count == 60);
  CHECK(s.overhead_chart_floats == 5);
  CHECK(s.overhead_raw_floats == 2048);
  CHECK(s.overhead_ratio == 5.0 / 2048.0);
  CHECK(std::string(ccbf_report_variant(rep)) == "V2");
  size_t n = 0;
  CHECK(ccbf_report_eta(rep, nullptr, 0, &n) == CCBF_OK);
  std::vector<double> eta(n);
  CHECK(ccbf_report_eta(rep, eta.data(), eta.size(), &n) == CCBF_OK);
  for (double e : eta) CHECK(e >= 0.0);

  ccbf_report* loaded = nullptr;
  REQUIRE(ccbf_report_load((dir / "eval").c_str(), &loaded) == CCBF_OK);
  const ccbf_report* both[] = {rep, loaded};
  char* table = nullptr;
  REQUIRE(ccbf_compare(both, 2, (dir / "cmp").c_str(), &table) == CCBF_OK);
  CHECK(std::string(table).find("V2") != std::string::npos);
  CHECK(fs::exists(dir / "cmp/comparison.json"));
  ccbf_string_free(table);
  ccbf_report_free(loaded);
  ccbf_report_free(rep);
  ccbf_config_free(cfg);
}

TEST_CASE("run a variant and route warnings") {
  Scratch dir;
  ccbf_config* cfg = nullptr;
  REQUIRE(ccbf_config_load(kTiny.c_str(), &cfg) == CCBF_OK);
  REQUIRE(ccbf_config_set_cache_dir(cfg, (dir / "cache").c_str()) == CCBF_OK);
  ccbf_set_log_callback(count_warnings, nullptr);
  ccbf_report* rep = nullptr;
  REQUIRE(ccbf_run("V4", cfg, (dir / "v4").c_str(), &rep) == CCBF_OK);
  ccbf_summary s{};
  ccbf_report_summary(rep, &s);
  CHECK(s.overhead_chart_floats == 3);
  CHECK(ccbf_run("V9", cfg, (dir / "v9").c_str(), nullptr) == CCBF_ERR_CONFIG);
  ccbf_set_log_callback(nullptr, nullptr);
  ccbf_report_free(rep);
  ccbf_config_free(cfg);
}

}  // TEST_SUITE
