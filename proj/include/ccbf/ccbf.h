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


// C interface to the ccbf library. All functions return a ccbf_status; on
// failure ccbf_last_error() holds a message for the calling thread.

#ifndef CCBF_CCBF_H_
#define CCBF_CCBF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CCBF_BUILDING_LIBRARY)
#define CCBF_API __attribute__((visibility("default")))
#else
#define CCBF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccbf_status {
  CCBF_OK = 0,
  CCBF_ERR_INTERNAL = 1,
  CCBF_ERR_CONFIG = 2,
  CCBF_ERR_NUMERICAL = 3,
  CCBF_ERR_IO = 4,
  CCBF_ERR_INVALID_ARGUMENT = 5,
  CCBF_ERR_DOMAIN = 6
} ccbf_status;

typedef enum ccbf_log_level { CCBF_LOG_INFO = 0, CCBF_LOG_WARNING = 1 } ccbf_log_level;

typedef void (*ccbf_log_fn)(ccbf_log_level level, const char* message, void* user);

typedef struct ccbf_config ccbf_config;
typedef struct ccbf_report ccbf_report;

typedef struct ccbf_summary {
  size_t count;
  double mean;
  double median;
  double p10;
  size_t excluded;
  int overhead_chart_floats;
  int overhead_raw_floats;
  double overhead_ratio;
} ccbf_summary;

typedef struct ccbf_train_args {
  const char* variant;      // label stored with the model, may be NULL
  const char* dataset_dir;
  const char* chart_dir;    // NULL trains on true locations
  const char* target;       // "bs1_ul" or "bs2_dl"
  double split_fraction;    // only used with true locations
  uint64_t split_seed;
} ccbf_train_args;

CCBF_API const char* ccbf_version(void);
CCBF_API const char* ccbf_last_error(void);
CCBF_API const char* ccbf_status_name(ccbf_status status);

// NULL restores the default (stderr).
CCBF_API void ccbf_set_log_callback(ccbf_log_fn fn, void* user);

CCBF_API ccbf_status ccbf_config_default(ccbf_config** out);
CCBF_API ccbf_status ccbf_config_load(const char* path, ccbf_config** out);
CCBF_API ccbf_status ccbf_config_set_cache_dir(ccbf_config* config, const char* dir);
CCBF_API ccbf_status ccbf_config_num_users(const ccbf_config* config, size_t* out);
// Caller releases *json with ccbf_string_free.
CCBF_API ccbf_status ccbf_config_to_json(const ccbf_config* config, char** json);
CCBF_API void ccbf_config_free(ccbf_config* config);

CCBF_API ccbf_status ccbf_generate(const ccbf_config* config, const char* out_dir);
// mode is "one_shot" or "on_the_fly".
CCBF_API ccbf_status ccbf_chart(const char* dataset_dir, const char* mode, int dim, int k,
                                double split_fraction, uint64_t split_seed,
                                const char* out_dir);
// Network hyperparameters come from config (NULL for defaults).
CCBF_API ccbf_status ccbf_train(const ccbf_train_args* args, const ccbf_config* config,
                                const char* out_dir);
// report may be NULL.
CCBF_API ccbf_status ccbf_eval(const char* model_dir, const char* dataset_dir,
                               const char* out_dir, ccbf_report** report);
// variant is one of V1..V5.
CCBF_API ccbf_status ccbf_run(const char* variant, const ccbf_config* config,
                              const char* out_dir, ccbf_report** report);

CCBF_API ccbf_status ccbf_report_load(const char* dir, ccbf_report** out);
CCBF_API ccbf_status ccbf_report_summary(const ccbf_report* report, ccbf_summary* out);
CCBF_API const char* ccbf_report_variant(const ccbf_report* report);
// Copies up to capacity values; *count receives the total.
CCBF_API ccbf_status ccbf_report_eta(const ccbf_report* report, double* values,
                                     size_t capacity, size_t* count);
CCBF_API void ccbf_report_free(ccbf_report* report);

// Writes comparison.json and comparison.txt; table may be NULL.
CCBF_API ccbf_status ccbf_compare(const ccbf_report* const* reports, size_t count,
                                  const char* out_dir, char** table);

CCBF_API void ccbf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif  // CCBF_CCBF_H_
