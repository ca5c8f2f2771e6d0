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


// Acceptance checks. One PASS/FAIL line per criterion; exit status is
// nonzero when any criterion fails.
//
//   ccbf_acceptance [--config FILE] [--work DIR] [--keep]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "ccbf/beamform.hpp"
#include "ccbf/chart.hpp"
#include "ccbf/config.hpp"
#include "ccbf/io.hpp"
#include "ccbf/log.hpp"
#include "ccbf/nn.hpp"
#include "ccbf/pipeline.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ccbf;
using cd = std::complex<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++g_failures;
  std::printf("%s  %-22s %s  [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.c_str(), secs, limit_seconds, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome metric_exactness() {
  std::mt19937_64 gen(1001);
  std::uniform_int_distribution<int> len(2, 64);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = len(gen);
    const Eigen::VectorXcd g = oracle::random_complex(gen, n);
    worst = std::max(worst, std::abs(eta(g.normalized(), g) - 1.0));
    // Gram-Schmidt a random vector against g
    Eigen::VectorXcd w = oracle::random_complex(gen, n);
    const Eigen::VectorXcd u = g.normalized();
    w -= u * u.dot(w);
    worst = std::max(worst, std::abs(eta(w.normalized(), g)));
  }
  return {worst < 1e-12, fmt("max |error| = %.3g (tol 1e-12, 1000 instances)", worst)};
}

Outcome phase_insensitivity() {
  std::mt19937_64 gen(1002);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  std::uniform_int_distribution<int> len(2, 64);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = len(gen);
    const Eigen::VectorXcd h1 = oracle::random_complex(gen, n);
    const Eigen::VectorXcd h2 = oracle::random_complex(gen, n);
    const cd a = std::polar(mag(gen), phase(gen));
    const cd b = std::polar(mag(gen), phase(gen));
    const Eigen::VectorXcd s1 = h1 * a;
    const Eigen::VectorXcd s2 = h2 * b;
    worst = std::max(worst, std::abs(pi_distance(s1, s2) - pi_distance(h1, h2)));
  }
  return {worst < 1e-9, fmt("max deviation = %.3g (tol 1e-9, 1000 draws)", worst)};
}

Outcome mds_oracle() {
  std::mt19937_64 gen(1003);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  Eigen::MatrixXd pts(2, 50);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = coord(gen);
  DistanceMatrix dm(50);
  double diameter = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = i + 1; j < 50; ++j) {
      const double d = (pts.col(i) - pts.col(j)).norm();
      dm.set(i, j, d);
      diameter = std::max(diameter, d);
    }
  const double res = oracle::procrustes_residual(classical_mds(dm, 2).coordinates, pts);
  return {res < 1e-6 * diameter,
          fmt("residual/diameter = %.3g (tol 1e-6, diameter %.1f)", res / diameter, diameter)};
}

Outcome geodesic_oracle() {
  std::mt19937_64 gen(1004);
  std::uniform_int_distribution<int> w(1, 100);
  std::bernoulli_distribution keep(0.15);
  const std::size_t n = 20;
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t mismatches = 0, compared = 0;
  for (int g = 0; g < 50; ++g) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1, w(gen));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j)
        if (keep(gen)) edges.emplace_back(i, j, w(gen));
    NeighborGraph graph;
    graph.k = 1;
    graph.adjacency.resize(n);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, inf));
    for (std::size_t i = 0; i < n; ++i) dense[i][i] = 0.0;
    for (auto [a, b, wt] : edges) {
      graph.adjacency[a].push_back({b, wt});
      graph.adjacency[b].push_back({a, wt});
      dense[a][b] = dense[b][a] = std::min(dense[a][b], wt);
    }
    for (auto& adj : graph.adjacency)
      std::sort(adj.begin(), adj.end(), [](const Edge& x, const Edge& y) { return x.to < y.to; });
    const auto fw = oracle::floyd_warshall(dense);
    const DistanceMatrix d = geodesic_distances(graph);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        ++compared;
        if (d(i, j) != fw[i][j]) ++mismatches;
      }
  }
  return {mismatches == 0, fmt("%.0f of %.0f pairs differ (50 graphs x 20 nodes, exact)",
                               static_cast<double>(mismatches), static_cast<double>(compared))};
}

Outcome gradient_suite() {
  std::mt19937_64 gen(1005);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const gradcheck::Case k = gradcheck::random_case(gen);
    worst = std::max(worst, gradcheck::max_relative_error(k, 5000 + c));
  }
  return {worst < 1e-4, fmt("max relative error = %.3g (tol 1e-4, 20 configurations)", worst)};
}

Outcome rff_fidelity() {
  const double lengthscale = 1.0;
  const int dim = 5;
  const RffLayer layer = rff_init(dim, 600, lengthscale, 1006);
  std::mt19937_64 gen(1007);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> sep(0.0, 2.5 * lengthscale);
  double mae = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd z1(dim), dir(dim);
    for (int i = 0; i < dim; ++i) {
      z1[i] = nd(gen);
      dir[i] = nd(gen);
    }
    const Eigen::VectorXd z2 = z1 + sep(gen) * dir.normalized();
    const double est = rff_features(layer, z1).dot(rff_features(layer, z2));
    const double exact = std::exp(-(z1 - z2).squaredNorm() / (2 * lengthscale * lengthscale));
    mae += std::abs(est - exact) / 100.0;
  }
  return {mae < 0.05, fmt("MAE = %.4f (tol 0.05, F = 600, 100 pairs)", mae)};
}

double chart_spearman(const ChartArtifact& art, const Dataset& ds) {
  const auto& test = art.split.test;
  std::vector<double> chart_d, space_d;
  for (std::size_t a = 0; a < test.size(); ++a)
    for (std::size_t b = a + 1; b < test.size(); ++b) {
      chart_d.push_back((art.embedding.col(test[a]) - art.embedding.col(test[b])).norm());
      space_d.push_back((ds.locations.col(test[a]) - ds.locations.col(test[b])).norm());
    }
  return oracle::spearman(chart_d, space_d);
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(fa), {}) ==
         std::string(std::istreambuf_iterator<char>(fb), {});
}

}  // namespace

int main(int argc, char** argv) {
  fs::path config_file = fs::path(CCBF_SOURCE_DIR) / "configs" / "default.json";
  fs::path work = fs::temp_directory_path() / "ccbf-acceptance";
  bool keep = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_file = argv[++i];
    else if (a == "--work" && i + 1 < argc) work = argv[++i];
    else if (a == "--keep") keep = true;
    else {
      std::fprintf(stderr, "usage: %s [--config FILE] [--work DIR] [--keep]\n", argv[0]);
      return 2;
    }
  }
  set_log_sink([](LogLevel, const std::string&) {});

  report("metric_exactness", 1, metric_exactness);
  report("phase_insensitivity", 1, phase_insensitivity);
  report("mds_oracle", 5, mds_oracle);
  report("geodesic_oracle", 5, geodesic_oracle);
  report("gradient_suite", 30, gradient_suite);
  report("rff_kernel_fidelity", 5, rff_fidelity);

  RunConfig config;
  try {
    config = load_run_config(config_file);
  } catch (const std::exception& e) {
    std::printf("FAIL  %-22s cannot load %s: %s\n", "config", config_file.string().c_str(), e.what());
    return 1;
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  config.cache_dir = (work / "cache").string();

  report("chart_quality", 600, [&]() -> Outcome {
    const fs::path ds_dir = ensure_dataset(config.scene, config.cache_dir);
    const Dataset ds = load_dataset(ds_dir);
    const fs::path dir = ensure_chart(ds_dir, ds, ChartMode::kOnTheFly, config.chart_dim,
                                      static_cast<std::size_t>(config.isomap_k),
                                      config.split_fraction, config.split_seed, config.cache_dir);
    const double rho = chart_spearman(load_chart(dir, &ds), ds);
    char buf[200];
    std::snprintf(buf, sizeof buf, "Spearman = %.4f (tol > 0.8, U = %zu, D = %d, k = %d, test users)",
                  rho, ds.size(), config.chart_dim, config.isomap_k);
    return {rho > 0.8, buf};
  });

  std::vector<EvalReport> reports;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    for (const VariantSpec& spec : VariantSpec::presets(config.chart_dim))
      reports.push_back(run_variant(spec, config, work / spec.id));
  } catch (const std::exception& e) {
    std::printf("FAIL  %-22s exception: %s\n", "five_variants", e.what());
    ++g_failures;
  }
  const double run_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (reports.size() == 5) {
    double med[5];
    for (int i = 0; i < 5; ++i) med[i] = reports[i].summary.median;
    std::printf("      medians: V1 %.4f  V2 %.4f  V3 %.4f  V4 %.4f  V5 %.4f  (%.1f s)\n", med[0], med[1],
                med[2], med[3], med[4], run_secs);
    const bool in_time = run_secs < 1800;
    auto line = [&](const char* name, bool ok, const std::string& detail) {
      const bool pass = ok && in_time;
      if (!pass) ++g_failures;
      std::printf("%s  %-22s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    };
    line("variants_a", med[1] >= med[0] - 0.05,
         fmt("V2 %.4f >= V1 - 0.05 = %.4f", med[1], med[0] - 0.05));
    line("variants_b", med[3] <= med[1] + 0.01,
         fmt("V4 %.4f <= V2 + 0.01 = %.4f", med[3], med[1] + 0.01));
    line("variants_c", med[4] <= med[1] && med[4] <= med[2],
         fmt("V5 %.4f <= min(V2, V3) = %.4f", med[4], std::min(med[1], med[2])));
    double lo = med[0];
    for (double m : med) lo = std::min(lo, m);
    line("variants_d", lo >= 0.6, fmt("min median %.4f >= 0.6", lo));

    bool exact = true;
    std::string detail;
    for (const EvalReport& r : reports) {
      const int dim = r.overhead.chart_floats;
      const double want = static_cast<double>(dim) /
                          (2.0 * config.scene.array_shape.size() * config.scene.num_subcarriers);
      exact = exact && r.overhead.ratio == want;
      detail += r.variant + " " + std::to_string(r.overhead.chart_floats) + "/" +
                std::to_string(r.overhead.raw_floats) + "  ";
    }
    const Overhead paper = transfer_overhead(5, 64, 16);
    exact = exact && paper.ratio == 5.0 / 2048.0;
    line("overhead", exact, detail + "(D=5, A=64, S=16 gives " + fmt("%.9g", paper.ratio) + ")");
  }

  report("determinism", 180, [&]() -> Outcome {
    RunConfig small = config;
    small.scene.num_users = 500;
    const VariantSpec v5 = VariantSpec::preset("V5", small.chart_dim);
    std::vector<fs::path> outs;
    for (int run = 0; run < 2; ++run) {
      small.cache_dir = (work / ("det-cache-" + std::to_string(run))).string();
      outs.push_back(work / ("det-" + std::to_string(run)));
      run_variant(v5, small, outs.back());
    }
    std::size_t files = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = outs[1] / entry.path().filename();
      if (!fs::exists(other) || !same_bytes(entry.path(), other)) ++differ;
    }
    return {files > 0 && differ == 0,
            fmt("%.0f CSV files, %.0f differ (V5, U = 500, fresh cache each run)",
                static_cast<double>(files), static_cast<double>(differ))};
  });

  if (!keep) fs::remove_all(work, ec);
  std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "ALL PASS" : "SOME FAIL", g_failures);
  return g_failures == 0 ? 0 : 1;
}
