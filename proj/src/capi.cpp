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


#include "ccbf/ccbf.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <new>
#include <string>
#include <vector>

#include "ccbf/config.hpp"
#include "ccbf/error.hpp"
#include "ccbf/log.hpp"
#include "ccbf/pipeline.hpp"

struct ccbf_config {
  ccbf::RunConfig value;
};

struct ccbf_report {
  ccbf::EvalReport value;
};

namespace {

thread_local std::string g_last_error;

ccbf_status fail(ccbf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
ccbf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CCBF_OK;
  } catch (const ccbf::Error& e) {
    return fail(static_cast<ccbf_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CCBF_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(CCBF_ERR_IO, e.what());
  } catch (const nlohmann::ordered_json::exception& e) {
    return fail(CCBF_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(CCBF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CCBF_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw ccbf::InvalidArgument(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ccbf_version(void) { return "0.1.0"; }

const char* ccbf_last_error(void) { return g_last_error.c_str(); }

const char* ccbf_status_name(ccbf_status status) {
  switch (status) {
    case CCBF_OK: return "ok";
    case CCBF_ERR_INTERNAL: return "internal error";
    case CCBF_ERR_CONFIG: return "configuration error";
    case CCBF_ERR_NUMERICAL: return "numerical failure";
    case CCBF_ERR_IO: return "i/o error";
    case CCBF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CCBF_ERR_DOMAIN: return "domain error";
  }
  return "unknown";
}

void ccbf_set_log_callback(ccbf_log_fn fn, void* user) {
  if (fn == nullptr) {
    ccbf::set_log_sink(nullptr);
    return;
  }
  ccbf::set_log_sink([fn, user](ccbf::LogLevel level, const std::string& msg) {
    fn(level == ccbf::LogLevel::kWarning ? CCBF_LOG_WARNING : CCBF_LOG_INFO, msg.c_str(), user);
  });
}

ccbf_status ccbf_config_default(ccbf_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ccbf_config{};
  });
}

ccbf_status ccbf_config_load(const char* path, ccbf_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ccbf_config{ccbf::load_run_config(path)};
  });
}

ccbf_status ccbf_config_set_cache_dir(ccbf_config* config, const char* dir) {
  return guarded([&] {
    require(config, "config");
    config->value.cache_dir = dir ? dir : "";
  });
}

ccbf_status ccbf_config_num_users(const ccbf_config* config, size_t* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = config->value.scene.num_users;
  });
}

ccbf_status ccbf_config_to_json(const ccbf_config* config, char** json) {
  return guarded([&] {
    require(config, "config");
    require(json, "json");
    *json = dup_string(ccbf::run_config_to_json(config->value).dump(2));
  });
}

void ccbf_config_free(ccbf_config* config) { delete config; }

ccbf_status ccbf_generate(const ccbf_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    config->value.validate();
    ccbf::generate_stage(config->value.scene, out_dir);
  });
}

ccbf_status ccbf_chart(const char* dataset_dir, const char* mode, int dim, int k,
                       double split_fraction, uint64_t split_seed, const char* out_dir) {
  return guarded([&] {
    require(dataset_dir, "dataset_dir");
    require(mode, "mode");
    require(out_dir, "out_dir");
    const ccbf::ChartMode m = ccbf::chart_mode_from_string(mode);
    if (m == ccbf::ChartMode::kNone) throw ccbf::ConfigError("chart mode must not be 'none'");
    if (dim < 1) throw ccbf::ConfigError("chart dimension must be positive");
    if (k < 1) throw ccbf::ConfigError("neighbour count must be positive");
    ccbf::chart_stage(dataset_dir, m, dim, static_cast<std::size_t>(k), split_fraction,
                      split_seed, out_dir);
  });
}

ccbf_status ccbf_train(const ccbf_train_args* args, const ccbf_config* config,
                       const char* out_dir) {
  return guarded([&] {
    require(args, "args");
    require(args->dataset_dir, "args->dataset_dir");
    require(args->target, "args->target");
    require(out_dir, "out_dir");
    ccbf::TrainRequest req;
    if (args->variant) req.variant = args->variant;
    req.dataset_dir = args->dataset_dir;
    if (args->chart_dir) {
      req.input = ccbf::LbbInput::kChart;
      req.chart_dir = args->chart_dir;
    } else {
      req.input = ccbf::LbbInput::kTrueLocation;
    }
    req.target = ccbf::band_from_string(args->target);
    req.split_fraction = args->split_fraction;
    req.split_seed = args->split_seed;
    if (config) {
      config->value.validate();
      req.nn = config->value.nn;
    }
    ccbf::train_stage(req, out_dir);
  });
}

ccbf_status ccbf_eval(const char* model_dir, const char* dataset_dir, const char* out_dir,
                      ccbf_report** report) {
  return guarded([&] {
    require(model_dir, "model_dir");
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    ccbf::EvalReport r = ccbf::eval_stage(model_dir, dataset_dir, out_dir);
    if (report) *report = new ccbf_report{std::move(r)};
  });
}

ccbf_status ccbf_run(const char* variant, const ccbf_config* config, const char* out_dir,
                     ccbf_report** report) {
  return guarded([&] {
    require(variant, "variant");
    require(config, "config");
    require(out_dir, "out_dir");
    const auto spec = ccbf::VariantSpec::preset(variant, config->value.chart_dim);
    ccbf::EvalReport r = ccbf::run_variant(spec, config->value, out_dir);
    if (report) *report = new ccbf_report{std::move(r)};
  });
}

ccbf_status ccbf_report_load(const char* dir, ccbf_report** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new ccbf_report{ccbf::load_report(dir)};
  });
}

ccbf_status ccbf_report_summary(const ccbf_report* report, ccbf_summary* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& r = report->value;
    *out = ccbf_summary{r.summary.count, r.summary.mean, r.summary.median, r.summary.p10,
                        r.excluded, r.overhead.chart_floats, r.overhead.raw_floats,
                        r.overhead.ratio};
  });
}

const char* ccbf_report_variant(const ccbf_report* report) {
  return report ? report->value.variant.c_str() : "";
}

ccbf_status ccbf_report_eta(const ccbf_report* report, double* values, size_t capacity,
                            size_t* count) {
  return guarded([&] {
    require(report, "report");
    const auto& eta = report->value.eta;
    if (count) *count = eta.size();
    if (values) {
      const size_t n = capacity < eta.size() ? capacity : eta.size();
      std::copy_n(eta.begin(), n, values);
    }
  });
}

void ccbf_report_free(ccbf_report* report) { delete report; }

ccbf_status ccbf_compare(const ccbf_report* const* reports, size_t count, const char* out_dir,
                         char** table) {
  return guarded([&] {
    require(reports, "reports");
    require(out_dir, "out_dir");
    std::vector<ccbf::EvalReport> list;
    for (size_t i = 0; i < count; ++i) {
      require(reports[i], "reports[i]");
      list.push_back(reports[i]->value);
    }
    const ccbf::Comparison c = ccbf::compare(list);
    ccbf::export_comparison(c, out_dir);
    if (table) *table = dup_string(c.to_table());
  });
}

void ccbf_string_free(char* s) { std::free(s); }

}  // extern "C"
