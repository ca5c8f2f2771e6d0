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


// ccbf command line tool. Talks to the library through the C API only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccbf/ccbf.h"

namespace {

int exit_code(ccbf_status s) {
  switch (s) {
    case CCBF_OK: return 0;
    case CCBF_ERR_CONFIG: return 2;
    case CCBF_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

int report_failure(const char* what, ccbf_status s) {
  std::fprintf(stderr, "ccbf %s: %s: %s\n", what, ccbf_status_name(s), ccbf_last_error());
  return exit_code(s);
}

bool g_quiet = false;

void log_to_stderr(ccbf_log_level level, const char* message, void*) {
  if (g_quiet && level == CCBF_LOG_INFO) return;
  std::fprintf(stderr, "%s%s\n", level == CCBF_LOG_WARNING ? "warning: " : "", message);
}

// Owns a config handle; empty path means defaults.
struct Config {
  ccbf_config* handle = nullptr;
  ~Config() { ccbf_config_free(handle); }
  ccbf_status open(const std::string& path) {
    return path.empty() ? ccbf_config_default(&handle) : ccbf_config_load(path.c_str(), &handle);
  }
};

void print_summary(const ccbf_report* r) {
  ccbf_summary s{};
  if (ccbf_report_summary(r, &s) != CCBF_OK) return;
  std::printf("%s: users=%zu mean=%.4f median=%.4f p10=%.4f overhead=%d/%d\n",
              ccbf_report_variant(r), s.count, s.mean, s.median, s.p10,
              s.overhead_chart_floats, s.overhead_raw_floats);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel charting + location-based beamforming pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(ccbf_version()));
  app.add_flag("-q,--quiet", g_quiet, "Only print warnings and errors");

  std::string config_path, out_dir, dataset_dir, chart_dir, model_dir, mode, target, variant,
      cache_dir;
  int dim = 5, k = 5;
  double fraction = 0.7;
  std::uint64_t split_seed = 7;
  bool use_locations = false;
  std::vector<std::string> report_dirs;

  auto* gen = app.add_subcommand("generate", "Synthesize a channel dataset");
  gen->add_option("--config", config_path, "Config file (JSON)");
  gen->add_option("--out", out_dir, "Output dataset directory")->required();

  auto* chart = app.add_subcommand("chart", "Build a channel chart with Isomap");
  chart->add_option("--dataset", dataset_dir)->required();
  chart->add_option("--mode", mode)->required()->check(CLI::IsMember({"one_shot", "on_the_fly"}));
  chart->add_option("--dim", dim)->capture_default_str();
  chart->add_option("--k", k)->capture_default_str();
  chart->add_option("--fraction", fraction, "Training fraction of the split")->capture_default_str();
  chart->add_option("--split-seed", split_seed)->capture_default_str();
  chart->add_option("--out", out_dir)->required();

  auto* train = app.add_subcommand("train", "Train a beamforming network");
  auto* chart_opt = train->add_option("--chart", chart_dir, "Chart directory");
  auto* loc_opt = train->add_flag("--locations", use_locations, "Train on true user locations");
  chart_opt->excludes(loc_opt);
  train->add_option("--dataset", dataset_dir)->required();
  train->add_option("--target", target)->required()->check(CLI::IsMember({"bs1_ul", "bs2_dl"}));
  train->add_option("--config", config_path, "Config file for network hyperparameters");
  train->add_option("--fraction", fraction, "Split fraction (with --locations)")->capture_default_str();
  train->add_option("--split-seed", split_seed, "Split seed (with --locations)")->capture_default_str();
  train->add_option("--variant", variant, "Label stored with the model");
  train->add_option("--out", out_dir)->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on its test split");
  eval->add_option("--model", model_dir)->required();
  eval->add_option("--dataset", dataset_dir)->required();
  eval->add_option("--out", out_dir)->required();

  auto* run = app.add_subcommand("run", "Run one variant end to end (or all five)");
  run->add_option("--variant", variant)->required()->check(
      CLI::IsMember({"V1", "V2", "V3", "V4", "V5", "all"}));
  run->add_option("--config", config_path, "Config file (JSON)");
  run->add_option("--cache", cache_dir, "Artifact cache directory");
  run->add_option("--out", out_dir)->required();

  auto* cmp = app.add_subcommand("compare", "Compare evaluation reports");
  cmp->add_option("--reports", report_dirs)->required()->expected(1, -1);
  cmp->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  ccbf_set_log_callback(log_to_stderr, nullptr);

  if (*gen) {
    Config cfg;
    if (auto s = cfg.open(config_path)) return report_failure("generate", s);
    if (auto s = ccbf_generate(cfg.handle, out_dir.c_str())) return report_failure("generate", s);
    return 0;
  }
  if (*chart) {
    if (auto s = ccbf_chart(dataset_dir.c_str(), mode.c_str(), dim, k, fraction, split_seed,
                            out_dir.c_str())) {
      return report_failure("chart", s);
    }
    return 0;
  }
  if (*train) {
    if (chart_dir.empty() && !use_locations) {
      std::fprintf(stderr, "ccbf train: one of --chart or --locations is required\n");
      return 2;
    }
    Config cfg;
    if (auto s = cfg.open(config_path)) return report_failure("train", s);
    ccbf_train_args args{};
    args.variant = variant.empty() ? nullptr : variant.c_str();
    args.dataset_dir = dataset_dir.c_str();
    args.chart_dir = chart_dir.empty() ? nullptr : chart_dir.c_str();
    args.target = target.c_str();
    args.split_fraction = fraction;
    args.split_seed = split_seed;
    if (auto s = ccbf_train(&args, cfg.handle, out_dir.c_str())) return report_failure("train", s);
    return 0;
  }
  if (*eval) {
    ccbf_report* r = nullptr;
    if (auto s = ccbf_eval(model_dir.c_str(), dataset_dir.c_str(), out_dir.c_str(), &r)) {
      return report_failure("eval", s);
    }
    print_summary(r);
    ccbf_report_free(r);
    return 0;
  }
  if (*run) {
    Config cfg;
    if (auto s = cfg.open(config_path)) return report_failure("run", s);
    if (!cache_dir.empty()) ccbf_config_set_cache_dir(cfg.handle, cache_dir.c_str());
    std::vector<std::string> ids;
    if (variant == "all") {
      ids = {"V1", "V2", "V3", "V4", "V5"};
      // one cache for all five so the one-shot chart is built once
      if (cache_dir.empty()) {
        const std::string shared = (std::filesystem::path(out_dir) / "cache").string();
        ccbf_config_set_cache_dir(cfg.handle, shared.c_str());
      }
    } else {
      ids = {variant};
    }
    std::vector<ccbf_report*> reports;
    int rc = 0;
    for (const auto& id : ids) {
      const std::string dir =
          ids.size() == 1 ? out_dir : (std::filesystem::path(out_dir) / id).string();
      ccbf_report* r = nullptr;
      if (auto s = ccbf_run(id.c_str(), cfg.handle, dir.c_str(), &r)) {
        rc = report_failure(("run " + id).c_str(), s);
        break;
      }
      print_summary(r);
      reports.push_back(r);
    }
    if (rc == 0 && reports.size() > 1) {
      char* table = nullptr;
      if (auto s = ccbf_compare(reports.data(), reports.size(), out_dir.c_str(), &table)) {
        rc = report_failure("compare", s);
      } else {
        std::printf("\n%s", table);
        ccbf_string_free(table);
      }
    }
    for (auto* r : reports) ccbf_report_free(r);
    return rc;
  }
  if (*cmp) {
    std::vector<ccbf_report*> reports;
    int rc = 0;
    for (const auto& d : report_dirs) {
      ccbf_report* r = nullptr;
      if (auto s = ccbf_report_load(d.c_str(), &r)) {
        rc = report_failure("compare", s);
        break;
      }
      reports.push_back(r);
    }
    if (rc == 0) {
      char* table = nullptr;
      if (auto s = ccbf_compare(reports.data(), reports.size(), out_dir.c_str(), &table)) {
        rc = report_failure("compare", s);
      } else {
        std::printf("%s", table);
        ccbf_string_free(table);
      }
    }
    for (auto* r : reports) ccbf_report_free(r);
    return rc;
  }
  return 0;
}
