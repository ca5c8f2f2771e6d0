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

#include "ccbf/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ccbf/error.hpp"
#include "ccbf/parallel.hpp"

namespace ccbf {
namespace {

constexpr double kZeroNorm = 1e-30;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

EvalReport assemble(std::vector<double> etas, std::vector<unsigned char> valid,
                    const EvalSet& set, const std::string& variant,
                    const OverheadShape& shape) {
  EvalReport r;
  r.variant = variant;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!valid[i]) {
      ++r.excluded;
      continue;
    }
    const auto col = static_cast<Eigen::Index>(i);
    r.users.push_back(set.users[i]);
    r.eta.push_back(etas[i]);
    r.spatial.push_back({set.users[i], set.locations(0, col), set.locations(1, col), etas[i],
                         set.los[i][0], set.los[i][1]});
  }
  r.cdf = empirical_cdf(r.eta);
  r.summary = summarize(r.eta);
  r.overhead = transfer_overhead(shape.dim, shape.antennas, shape.subcarriers);
  return r;
}

void check_set(const EvalSet& set) {
  const auto n = static_cast<Eigen::Index>(set.users.size());
  if (set.targets.cols() != n || set.locations.cols() != n ||
      set.los.size() != set.users.size()) {
    throw InvalidArgument("evaluation set fields differ in length");
  }
}

}  // namespace

Precoder complexify_normalize(const Eigen::Ref<const Eigen::VectorXd>& raw,
                              std::string source) {
  if (raw.size() % 2 != 0) throw InvalidArgument("complexify_normalize: odd length");
  const Eigen::Index A = raw.size() / 2;
  Eigen::VectorXcd w(A);
  for (Eigen::Index a = 0; a < A; ++a) w[a] = {raw[a], raw[A + a]};
  const double norm = w.norm();
  if (norm < kZeroNorm) throw ZeroPrecoder("complexify_normalize: zero precoder", 0);
  return {w / norm, std::move(source)};
}

double eta(const Eigen::Ref<const Eigen::VectorXcd>& w,
           const Eigen::Ref<const Eigen::VectorXcd>& g) {
  if (w.size() != g.size()) throw InvalidArgument("eta: length mismatch");
  const double gg = g.squaredNorm();
  if (std::sqrt(gg) < kZeroNorm) throw ZeroChannel("eta: zero channel", 0);
  return std::norm(w.dot(g)) / gg;
}

double spectral_efficiency(double eta, double snr_opt) {
  if (snr_opt < 0.0) throw InvalidArgument("spectral_efficiency: negative SNR");
  return std::log2(1.0 + eta * snr_opt);
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cdf.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return cdf;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  s.median = percentile(sorted, 0.5);
  s.p10 = percentile(sorted, 0.1);
  return s;
}

Overhead transfer_overhead(int dim, int antennas, int subcarriers) {
  Overhead o;
  o.chart_floats = dim;
  o.raw_floats = 2 * antennas * subcarriers;
  o.ratio = static_cast<double>(o.chart_floats) / static_cast<double>(o.raw_floats);
  return o;
}

EvalReport evaluate_precoders(std::span<const Precoder> precoders,
                              const EvalSet& set, const std::string& variant,
                              const OverheadShape& shape) {
  check_set(set);
  if (precoders.size() != set.users.size()) {
    throw InvalidArgument("evaluate_precoders: one precoder per user required");
  }
  std::vector<double> etas(set.users.size(), 0.0);
  std::vector<unsigned char> valid(set.users.size(), 0);
  parallel_for(0, set.users.size(), [&](std::size_t i) {
    const auto g = set.targets.col(static_cast<Eigen::Index>(i));
    if (g.norm() < kZeroNorm) return;
    etas[i] = eta(precoders[i], g);
    valid[i] = 1;
  });
  return assemble(std::move(etas), std::move(valid), set, variant, shape);
}

EvalReport evaluate(const LbbModel& model, const EvalSet& set,
                    const std::string& variant, const OverheadShape& shape) {
  check_set(set);
  const Eigen::MatrixXd raw = model.predict(set.inputs);
  std::vector<Precoder> precoders(set.users.size());
  for (std::size_t i = 0; i < set.users.size(); ++i) {
    try {
      precoders[i] = complexify_normalize(raw.col(static_cast<Eigen::Index>(i)), variant);
    } catch (const ZeroPrecoder&) {
      throw ZeroPrecoder("evaluate: zero precoder for user " + std::to_string(set.users[i]),
                         set.users[i]);
    }
  }
  return evaluate_precoders(precoders, set, variant, shape);
}

Json summary_json(const EvalReport& r) {
  Json j;
  j["variant"] = r.variant;
  j["count"] = r.summary.count;
  j["excluded"] = r.excluded;
  j["mean"] = r.summary.mean;
  j["median"] = r.summary.median;
  j["p10"] = r.summary.p10;
  Json se;
  for (double snr_db : {0.0, 10.0, 20.0}) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    std::vector<double> rates;
    rates.reserve(r.eta.size());
    for (double e : r.eta) rates.push_back(spectral_efficiency(e, snr));
    se[format_double(snr_db) + "dB"] =
        rates.empty() ? 0.0 : pairwise_sum(rates) / static_cast<double>(rates.size());
  }
  j["mean_spectral_efficiency_bits_per_hz"] = se;
  j["overhead"] = {{"chart_floats_per_user", r.overhead.chart_floats},
                   {"raw_channel_floats_per_user", r.overhead.raw_floats},
                   {"ratio", r.overhead.ratio}};
  return j;
}

void export_report(const EvalReport& r, const fs::path& dir) {
  ensure_directory(dir);
  std::string cdf = "eta,cdf\n";
  for (const auto& p : r.cdf) {
    cdf += format_double(p.eta) + "," + format_double(p.probability) + "\n";
  }
  write_text(dir / ("cdf_" + r.variant + ".csv"), cdf);

  std::string spatial = "x,y,eta,los_bs1,los_bs2\n";
  for (const auto& s : r.spatial) {
    spatial += format_double(s.x) + "," + format_double(s.y) + "," + format_double(s.eta) +
               "," + (s.los_bs1 ? "1" : "0") + "," + (s.los_bs2 ? "1" : "0") + "\n";
  }
  write_text(dir / ("spatial_" + r.variant + ".csv"), spatial);
  write_json(dir / "summary.json", summary_json(r));
}

EvalReport load_report(const fs::path& dir) {
  const Json s = read_json(dir / "summary.json");
  EvalReport r;
  r.variant = s.at("variant").get<std::string>();
  r.excluded = s.value("excluded", std::size_t{0});
  const auto& o = s.at("overhead");
  r.overhead.chart_floats = o.at("chart_floats_per_user").get<int>();
  r.overhead.raw_floats = o.at("raw_channel_floats_per_user").get<int>();
  r.overhead.ratio = o.at("ratio").get<double>();

  const fs::path file = dir / ("spatial_" + r.variant + ".csv");
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "x,y,eta,los_bs1,los_bs2") throw IoError(file.string() + ": unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw IoError(file.string() + ": malformed row");
    SpatialRecord rec;
    rec.user = r.spatial.size();
    rec.x = std::stod(cells[0]);
    rec.y = std::stod(cells[1]);
    rec.eta = std::stod(cells[2]);
    rec.los_bs1 = cells[3] == "1";
    rec.los_bs2 = cells[4] == "1";
    r.eta.push_back(rec.eta);
    r.spatial.push_back(rec);
  }
  r.cdf = empirical_cdf(r.eta);
  r.summary = summarize(r.eta);
  return r;
}

}  // namespace ccbf
