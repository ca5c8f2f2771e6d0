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

#ifndef CCBF_PIPELINE_HPP_
#define CCBF_PIPELINE_HPP_

// End-to-end variants: dataset, chart (one-shot or on the fly), LBB
// training and evaluation, with every stage persisted to disk and expensive
// stages cached by a hash of their inputs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/beamform.hpp"
#include "ccbf/chart.hpp"
#include "ccbf/config.hpp"
#include "ccbf/dataset.hpp"
#include "ccbf/io.hpp"
#include "ccbf/nn.hpp"

namespace ccbf {

enum class LbbInput { kTrueLocation, kChart };
enum class ChartMode { kNone, kOneShot, kOnTheFly };

std::string to_string(ChartMode mode);
ChartMode chart_mode_from_string(const std::string& s);
std::string to_string(Band band);  // "bs1_ul" / "bs2_dl"
Band band_from_string(const std::string& s);

struct VariantSpec {
  std::string id;
  LbbInput input = LbbInput::kChart;
  ChartMode chart_mode = ChartMode::kOneShot;
  int chart_dim = 5;
  Band target = Band::kUplinkBs1;
  // False for anything other than the five shipped presets.
  bool paper_preset = false;

  // V1..V5. `dim` is the default chart dimension (V4 always uses 3).
  static VariantSpec preset(const std::string& id, int dim = 5);
  static std::vector<VariantSpec> presets(int dim = 5);
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded permutation; the first floor(fraction * U) entries train.
Split split_users(std::size_t num_users, double fraction, std::uint64_t seed);

// Records which dataset users' channels each stage touched.
class AccessLog {
 public:
  void record(const std::string& stage, std::span<const std::size_t> users);
  const std::map<std::string, std::vector<std::size_t>>& entries() const { return entries_; }
  std::vector<std::size_t> users(const std::string& stage) const;

 private:
  std::map<std::string, std::vector<std::size_t>> entries_;
};

struct ChartArtifact {
  ChartMode mode = ChartMode::kOneShot;
  Split split;
  std::vector<std::size_t> anchor_users;  // dataset index of each chart column
  Chart chart;
  Eigen::MatrixXd embedding;  // D x U, a chart location for every user
  std::size_t oos_underflows = 0;
  std::string dataset_hash;
};

// One-shot charts every user and then splits; on the fly charts the train
// users only and embeds the test users out of sample.
ChartArtifact build_chart(const Dataset& dataset, ChartMode mode, int dim, std::size_t k,
                          const Split& split, AccessLog* log = nullptr,
                          const EigenSolverOptions& solver = {});

// manifest.json, z.f64 (D x N), embedding.f64 (D x U), both row-major.
// Anchor channels are referenced by dataset index, not duplicated.
void save_chart(const ChartArtifact& chart, const fs::path& dir);
// With a dataset, anchor channels are restored so oos_embed works.
ChartArtifact load_chart(const fs::path& dir, const Dataset* dataset = nullptr);

// Stable content hash of a dataset directory.
std::string dataset_hash(const fs::path& dir);

// user,x,y,split,z1..zD for every user (split is train or test).
void export_chart_csv(const ChartArtifact& chart, const Dataset& dataset, const fs::path& file);

// Cached stage entry points. Each returns the artifact directory.
fs::path ensure_dataset(const SceneConfig& scene, const fs::path& cache_dir);
fs::path ensure_chart(const fs::path& dataset_dir, const Dataset& dataset, ChartMode mode,
                      int dim, std::size_t k, double fraction, std::uint64_t split_seed,
                      const fs::path& cache_dir, AccessLog* log = nullptr);

struct TrainRequest {
  std::string variant = "custom";
  LbbInput input = LbbInput::kChart;
  fs::path chart_dir;    // when input is kChart
  fs::path dataset_dir;
  Band target = Band::kUplinkBs1;
  double split_fraction = 0.7;      // used with true locations
  std::uint64_t split_seed = 7;     // used with true locations
  TrainConfig nn;
};

struct TrainOutcome {
  LbbModel model;
  double initial_loss = 0.0;
  std::vector<double> loss_history;
};

// Trains on the train split and writes the checkpoint to out_dir.
TrainOutcome train_stage(const TrainRequest& request, const fs::path& out_dir);

// Evaluates a checkpoint on its test split and exports the report.
EvalReport eval_stage(const fs::path& model_dir, const fs::path& dataset_dir,
                      const fs::path& out_dir);

// Writes the dataset for a scene to out_dir (no caching).
void generate_stage(const SceneConfig& scene, const fs::path& out_dir);

// Builds a chart for a dataset directory (no caching).
void chart_stage(const fs::path& dataset_dir, ChartMode mode, int dim, std::size_t k,
                 double fraction, std::uint64_t split_seed, const fs::path& out_dir);

// Full variant. Artifacts: <cache>/dataset-*, <cache>/chart-*, out/model,
// out/cdf_<id>.csv, out/spatial_<id>.csv, out/summary.json, out/run.json.
EvalReport run_variant(const VariantSpec& spec, const RunConfig& config,
                       const fs::path& out_dir, AccessLog* log = nullptr);

struct ComparisonRow {
  std::string variant;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  // median_diff[i][j] = median(i) - median(j)
  std::vector<std::vector<double>> median_diff;

  Json to_json() const;
  std::string to_table() const;
};

Comparison compare(std::span<const EvalReport> reports);
void export_comparison(const Comparison& comparison, const fs::path& out_dir);

}  // namespace ccbf

#endif  // CCBF_PIPELINE_HPP_
