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

#ifndef CCBF_BEAMFORM_HPP_
#define CCBF_BEAMFORM_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/io.hpp"
#include "ccbf/nn.hpp"

namespace ccbf {

// Unit-norm complex precoder for the central subcarrier.
struct Precoder {
  Eigen::VectorXcd w;
  std::string source;
};

// w[a] = raw[a] + j raw[A + a], normalized. Throws ZeroPrecoder.
Precoder complexify_normalize(const Eigen::Ref<const Eigen::VectorXd>& raw,
                              std::string source = {});

// Normalized correlation |w^H g|^2 / |g|^2. Throws ZeroChannel.
double eta(const Eigen::Ref<const Eigen::VectorXcd>& w,
           const Eigen::Ref<const Eigen::VectorXcd>& g);
inline double eta(const Precoder& p, const Eigen::Ref<const Eigen::VectorXcd>& g) {
  return eta(p.w, g);
}

// log2(1 + eta * snr_opt) in bits/s/Hz.
double spectral_efficiency(double eta, double snr_opt);

struct CdfPoint {
  double eta = 0.0;
  double probability = 0.0;
};

// (sorted value, rank / N) pairs.
std::vector<CdfPoint> empirical_cdf(std::span<const double> values);

// Linear interpolation between order statistics, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
};

Summary summarize(std::span<const double> values);

// Per-user backhaul cost of sending the chart location instead of the raw
// channel.
struct Overhead {
  int chart_floats = 0;  // D
  int raw_floats = 0;    // 2 * A * S
  double ratio = 0.0;
};

Overhead transfer_overhead(int dim, int antennas, int subcarriers);

struct SpatialRecord {
  std::size_t user = 0;
  double x = 0.0;
  double y = 0.0;
  double eta = 0.0;
  bool los_bs1 = false;
  bool los_bs2 = false;
};

struct EvalReport {
  std::string variant;
  std::vector<std::size_t> users;  // dataset indices, in evaluation order
  std::vector<double> eta;
  std::vector<CdfPoint> cdf;
  Summary summary;
  std::vector<SpatialRecord> spatial;
  Overhead overhead;
  std::size_t excluded = 0;  // users with a zero target channel
};

// What evaluation needs about each test user.
struct EvalSet {
  std::vector<std::size_t> users;
  Eigen::MatrixXd inputs;     // model inputs, one column per user
  Eigen::MatrixXcd targets;   // central-subcarrier target channels
  Eigen::Matrix<double, 3, Eigen::Dynamic> locations;
  std::vector<std::array<bool, 2>> los;
};

struct OverheadShape {
  int dim = 0;
  int antennas = 0;
  int subcarriers = 0;
};

EvalReport evaluate(const LbbModel& model, const EvalSet& set,
                    const std::string& variant, const OverheadShape& shape);

// Same bookkeeping for externally supplied precoders (e.g. baselines).
EvalReport evaluate_precoders(std::span<const Precoder> precoders,
                              const EvalSet& set, const std::string& variant,
                              const OverheadShape& shape);

// Writes cdf_<variant>.csv, spatial_<variant>.csv and summary.json.
void export_report(const EvalReport& report, const fs::path& dir);
Json summary_json(const EvalReport& report);

// Reads back what export_report wrote (users and per-user eta come from the
// spatial CSV).
EvalReport load_report(const fs::path& dir);

}  // namespace ccbf

#endif  // CCBF_BEAMFORM_HPP_
