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

#include "ccbf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "ccbf/error.hpp"
#include "ccbf/log.hpp"
#include "ccbf/random.hpp"

namespace ccbf {
namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double>& v, Eigen::Index rows,
                               Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[pos++];
  }
  return m;
}

Eigen::MatrixXcd gather_columns(const Eigen::MatrixXcd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXcd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(cols[i]));
  }
  return out;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(cols[i]));
  }
  return out;
}

Eigen::MatrixXcd central_targets(const Dataset& ds, Band band,
                                 std::span<const std::size_t> users) {
  Eigen::MatrixXcd out(ds.scene.antennas(), static_cast<Eigen::Index>(users.size()));
  for (std::size_t i = 0; i < users.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = ds.central(band, users[i]);
  }
  return out;
}

Json split_json(const Split& s) { return {{"train", s.train}, {"test", s.test}}; }

Split split_from_json(const Json& j) {
  return {j.at("train").get<std::vector<std::size_t>>(),
          j.at("test").get<std::vector<std::size_t>>()};
}

std::string unique_suffix() {
  std::ostringstream os;
  os << ".tmp-" << ::getpid() << "-" << std::this_thread::get_id();
  return os.str();
}

// Moves a fully written staging directory into place. If another writer won
// the race, its (identical) artifact is kept.
void publish(const fs::path& staging, const fs::path& final_dir) {
  std::error_code ec;
  fs::rename(staging, final_dir, ec);
  if (ec) {
    fs::remove_all(staging, ec);
    if (!fs::exists(final_dir / "manifest.json")) {
      throw IoError("could not publish artifact " + final_dir.string());
    }
  }
}

}  // namespace

std::string to_string(ChartMode mode) {
  switch (mode) {
    case ChartMode::kNone: return "none";
    case ChartMode::kOneShot: return "one_shot";
    case ChartMode::kOnTheFly: return "on_the_fly";
  }
  return "none";
}

ChartMode chart_mode_from_string(const std::string& s) {
  if (s == "one_shot") return ChartMode::kOneShot;
  if (s == "on_the_fly") return ChartMode::kOnTheFly;
  if (s == "none") return ChartMode::kNone;
  throw ConfigError("unknown chart mode '" + s + "' (expected one_shot or on_the_fly)");
}

std::string to_string(Band band) {
  return band == Band::kUplinkBs1 ? "bs1_ul" : "bs2_dl";
}

Band band_from_string(const std::string& s) {
  if (s == "bs1_ul") return Band::kUplinkBs1;
  if (s == "bs2_dl") return Band::kDownlinkBs2;
  throw ConfigError("unknown target '" + s + "' (expected bs1_ul or bs2_dl)");
}

VariantSpec VariantSpec::preset(const std::string& id, int dim) {
  VariantSpec v;
  v.id = id;
  v.paper_preset = true;
  v.chart_dim = dim;
  if (id == "V1") {
    v.input = LbbInput::kTrueLocation;
    v.chart_mode = ChartMode::kNone;
    v.target = Band::kUplinkBs1;
  } else if (id == "V2") {
    v.chart_mode = ChartMode::kOneShot;
    v.target = Band::kUplinkBs1;
  } else if (id == "V3") {
    v.chart_mode = ChartMode::kOneShot;
    v.target = Band::kDownlinkBs2;
  } else if (id == "V4") {
    v.chart_mode = ChartMode::kOneShot;
    v.target = Band::kUplinkBs1;
    v.chart_dim = 3;
  } else if (id == "V5") {
    v.chart_mode = ChartMode::kOnTheFly;
    v.target = Band::kDownlinkBs2;
  } else {
    throw ConfigError("unknown variant '" + id + "' (expected V1..V5)");
  }
  return v;
}

std::vector<VariantSpec> VariantSpec::presets(int dim) {
  std::vector<VariantSpec> out;
  for (const char* id : {"V1", "V2", "V3", "V4", "V5"}) out.push_back(preset(id, dim));
  return out;
}

Split split_users(std::size_t num_users, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> perm(num_users);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(num_users)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return s;
}

void AccessLog::record(const std::string& stage, std::span<const std::size_t> users) {
  auto& v = entries_[stage];
  v.insert(v.end(), users.begin(), users.end());
}

std::vector<std::size_t> AccessLog::users(const std::string& stage) const {
  const auto it = entries_.find(stage);
  return it == entries_.end() ? std::vector<std::size_t>{} : it->second;
}

ChartArtifact build_chart(const Dataset& ds, ChartMode mode, int dim, std::size_t k,
                          const Split& split, AccessLog* log,
                          const EigenSolverOptions& solver) {
  ChartArtifact art;
  art.mode = mode;
  art.split = split;
  const std::size_t U = ds.size();
  if (mode == ChartMode::kOneShot) {
    art.anchor_users.resize(U);
    std::iota(art.anchor_users.begin(), art.anchor_users.end(), std::size_t{0});
  } else if (mode == ChartMode::kOnTheFly) {
    art.anchor_users = split.train;
  } else {
    throw InvalidArgument("build_chart: chart mode 'none' has no chart");
  }
  if (log) log->record("chart", art.anchor_users);
  art.chart = isomap(gather_columns(ds.uplink, art.anchor_users), k, dim, solver);

  art.embedding.resize(dim, static_cast<Eigen::Index>(U));
  for (std::size_t i = 0; i < art.anchor_users.size(); ++i) {
    art.embedding.col(static_cast<Eigen::Index>(art.anchor_users[i])) =
        art.chart.z.col(static_cast<Eigen::Index>(i));
  }
  if (mode == ChartMode::kOnTheFly) {
    if (log) log->record("oos", split.test);
    const Eigen::MatrixXd oos =
        oos_embed_all(art.chart, gather_columns(ds.uplink, split.test), &art.oos_underflows);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      art.embedding.col(static_cast<Eigen::Index>(split.test[i])) =
          oos.col(static_cast<Eigen::Index>(i));
    }
  }
  return art;
}

void save_chart(const ChartArtifact& art, const fs::path& dir) {
  ensure_directory(dir);
  write_f64(dir / "z.f64", row_major(art.chart.z));
  write_f64(dir / "embedding.f64", row_major(art.embedding));
  Json m;
  m["format"] = "ccbf-chart";
  m["version"] = 1;
  m["endianness"] = "little";
  m["mode"] = to_string(art.mode);
  m["N"] = art.chart.size();
  m["D"] = art.chart.dim();
  m["U"] = art.embedding.cols();
  m["k"] = art.chart.k;
  m["sigma"] = art.chart.sigma;
  m["solver"] = {{"iterations", art.chart.solver.iterations},
                 {"residual", art.chart.solver.residual},
                 {"eigenvalues", art.chart.solver.eigenvalues},
                 {"clamped_negative_eigenvalues", art.chart.solver.clamped}};
  m["oos_underflows"] = art.oos_underflows;
  m["dataset_hash"] = art.dataset_hash;
  m["anchors"] = {{"source", "dataset uplink channels (BS1)"}, {"users", art.anchor_users}};
  m["split"] = split_json(art.split);
  m["files"] = {{"z", {{"name", "z.f64"}, {"dtype", "float64"}, {"shape", {art.chart.dim(), art.chart.size()}}}},
                {"embedding", {{"name", "embedding.f64"}, {"dtype", "float64"},
                               {"shape", {art.embedding.rows(), art.embedding.cols()}}}}};
  write_json(dir / "manifest.json", m);
}

ChartArtifact load_chart(const fs::path& dir, const Dataset* dataset) {
  const Json m = read_json(dir / "manifest.json");
  if (m.value("format", "") != "ccbf-chart") throw IoError(dir.string() + ": not a ccbf chart");
  ChartArtifact art;
  art.mode = chart_mode_from_string(m.at("mode").get<std::string>());
  const auto N = m.at("N").get<Eigen::Index>();
  const auto D = m.at("D").get<Eigen::Index>();
  const auto U = m.at("U").get<Eigen::Index>();
  art.chart.k = m.at("k").get<std::size_t>();
  art.chart.sigma = m.at("sigma").get<double>();
  const auto& solver = m.at("solver");
  art.chart.solver.iterations = solver.at("iterations").get<int>();
  art.chart.solver.residual = solver.at("residual").get<double>();
  art.chart.solver.eigenvalues = solver.at("eigenvalues").get<std::vector<double>>();
  art.chart.solver.clamped = solver.at("clamped_negative_eigenvalues").get<int>();
  art.oos_underflows = m.value("oos_underflows", std::size_t{0});
  art.dataset_hash = m.value("dataset_hash", "");
  art.anchor_users = m.at("anchors").at("users").get<std::vector<std::size_t>>();
  art.split = split_from_json(m.at("split"));
  art.chart.z = from_row_major(read_f64(dir / "z.f64", static_cast<std::size_t>(D * N)), D, N);
  art.chart.solver.coordinates = art.chart.z;
  art.embedding =
      from_row_major(read_f64(dir / "embedding.f64", static_cast<std::size_t>(D * U)), D, U);
  if (dataset) {
    if (static_cast<Eigen::Index>(dataset->size()) != U) {
      throw IoError(dir.string() + ": chart and dataset disagree on the number of users");
    }
    art.chart.anchors = gather_columns(dataset->uplink, art.anchor_users);
  }
  return art;
}

std::string dataset_hash(const fs::path& dir) {
  std::uint64_t h = fnv1a64("ccbf-dataset-v1");
  for (const char* name : {"manifest.json", "locations.f64", "uplink.f64", "downlink.f64", "los.u8"}) {
    h = hash_file(dir / name, h);
  }
  return hex64(h);
}

void export_chart_csv(const ChartArtifact& art, const Dataset& ds, const fs::path& file) {
  const Eigen::Index D = art.embedding.rows();
  std::vector<char> is_test(ds.size(), 0);
  for (std::size_t u : art.split.test) is_test[u] = 1;
  std::string out = "user,x,y,split";
  for (Eigen::Index d = 0; d < D; ++d) out += ",z" + std::to_string(d + 1);
  out += "\n";
  for (std::size_t u = 0; u < ds.size(); ++u) {
    const auto c = static_cast<Eigen::Index>(u);
    out += std::to_string(u) + "," + format_double(ds.locations(0, c)) + "," +
           format_double(ds.locations(1, c)) + (is_test[u] ? ",test" : ",train");
    for (Eigen::Index d = 0; d < D; ++d) out += "," + format_double(art.embedding(d, c));
    out += "\n";
  }
  write_text(file, out);
}

fs::path ensure_dataset(const SceneConfig& scene, const fs::path& cache_dir) {
  const std::string key = hex64(fnv1a64(scene_to_json(scene).dump()));
  const fs::path dir = cache_dir / ("dataset-" + key);
  if (fs::exists(dir / "manifest.json")) return dir;
  ensure_directory(cache_dir);
  const fs::path staging = fs::path(dir.string() + unique_suffix());
  save_dataset(generate_dataset(scene), staging);
  publish(staging, dir);
  return dir;
}

fs::path ensure_chart(const fs::path& dataset_dir, const Dataset& dataset, ChartMode mode,
                      int dim, std::size_t k, double fraction, std::uint64_t split_seed,
                      const fs::path& cache_dir, AccessLog* log) {
  const std::string ds_hash = dataset_hash(dataset_dir);
  Json key = {{"dataset", ds_hash}, {"mode", to_string(mode)}, {"dim", dim}, {"k", k},
              {"fraction", fraction}, {"split_seed", split_seed}};
  const fs::path dir = cache_dir / ("chart-" + hex64(fnv1a64(key.dump())));
  if (fs::exists(dir / "manifest.json")) {
    if (log) {
      const ChartArtifact cached = load_chart(dir);
      log->record("chart", cached.anchor_users);
      if (cached.mode == ChartMode::kOnTheFly) log->record("oos", cached.split.test);
    }
    return dir;
  }
  ensure_directory(cache_dir);
  const Split split = split_users(dataset.size(), fraction, split_seed);
  ChartArtifact art = build_chart(dataset, mode, dim, k, split, log);
  art.dataset_hash = ds_hash;
  const fs::path staging = fs::path(dir.string() + unique_suffix());
  save_chart(art, staging);
  publish(staging, dir);
  return dir;
}

void generate_stage(const SceneConfig& scene, const fs::path& out_dir) {
  save_dataset(generate_dataset(scene), out_dir);
}

void chart_stage(const fs::path& dataset_dir, ChartMode mode, int dim, std::size_t k,
                 double fraction, std::uint64_t split_seed, const fs::path& out_dir) {
  const Dataset ds = load_dataset(dataset_dir);
  ChartArtifact art = build_chart(ds, mode, dim, k, split_users(ds.size(), fraction, split_seed));
  art.dataset_hash = dataset_hash(dataset_dir);
  save_chart(art, out_dir);
  export_chart_csv(art, ds, out_dir / "chart.csv");
}

TrainOutcome train_stage(const TrainRequest& req, const fs::path& out_dir) {
  const Dataset ds = load_dataset(req.dataset_dir);
  const std::string ds_hash = dataset_hash(req.dataset_dir);
  Split split;
  Eigen::MatrixXd all_inputs;
  Json input_json;
  if (req.input == LbbInput::kChart) {
    const ChartArtifact art = load_chart(req.chart_dir);
    if (!art.dataset_hash.empty() && art.dataset_hash != ds_hash) {
      throw ConfigError("chart " + req.chart_dir.string() + " was built from a different dataset");
    }
    split = art.split;
    all_inputs = art.embedding;
    input_json = {{"kind", "chart"}, {"chart_dir", fs::absolute(req.chart_dir).lexically_normal().string()},
                  {"chart_mode", to_string(art.mode)}};
  } else {
    split = split_users(ds.size(), req.split_fraction, req.split_seed);
    all_inputs = ds.locations;
    input_json = {{"kind", "locations"}, {"split_fraction", req.split_fraction},
                  {"split_seed", req.split_seed}};
  }
  if (all_inputs.cols() != static_cast<Eigen::Index>(ds.size())) {
    throw ConfigError("model inputs do not cover every dataset user");
  }
  const Eigen::MatrixXd inputs = gather_columns(all_inputs, split.train);
  const Eigen::MatrixXcd targets = central_targets(ds, req.target, split.train);
  const double lengthscale = resolve_lengthscale(inputs, req.nn);
  LbbModel model = make_lbb_model(static_cast<int>(inputs.rows()), ds.scene.antennas(),
                                  lengthscale, req.nn);
  TrainResult tr = train(std::move(model), inputs, targets, req.nn);

  Json extra;
  extra["variant"] = req.variant;
  extra["input"] = input_json;
  extra["target"] = to_string(req.target);
  extra["dataset_hash"] = ds_hash;
  extra["subcarriers"] = ds.scene.num_subcarriers;
  extra["training"] = train_config_to_json(req.nn);
  extra["initial_loss"] = tr.initial_loss;
  extra["loss_history"] = tr.loss_history;
  save_model(tr.model, extra, out_dir);
  write_json(out_dir / "split.json", split_json(split));
  return {std::move(tr.model), tr.initial_loss, std::move(tr.loss_history)};
}

EvalReport eval_stage(const fs::path& model_dir, const fs::path& dataset_dir,
                      const fs::path& out_dir) {
  Json manifest;
  const LbbModel model = load_model(model_dir, &manifest);
  const Dataset ds = load_dataset(dataset_dir);
  if (manifest.value("dataset_hash", "") != dataset_hash(dataset_dir)) {
    throw ConfigError("model " + model_dir.string() + " was trained on a different dataset");
  }
  const Split split = split_from_json(read_json(model_dir / "split.json"));
  const Json& input = manifest.at("input");
  Eigen::MatrixXd all_inputs;
  if (input.at("kind") == "chart") {
    all_inputs = load_chart(input.at("chart_dir").get<std::string>()).embedding;
  } else {
    all_inputs = ds.locations;
  }
  const Band target = band_from_string(manifest.at("target").get<std::string>());

  EvalSet set;
  set.users = split.test;
  set.inputs = gather_columns(all_inputs, split.test);
  set.targets = central_targets(ds, target, split.test);
  set.locations.resize(3, static_cast<Eigen::Index>(split.test.size()));
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    set.locations.col(static_cast<Eigen::Index>(i)) =
        ds.locations.col(static_cast<Eigen::Index>(split.test[i]));
    set.los.push_back({ds.los_at(split.test[i], 0), ds.los_at(split.test[i], 1)});
  }
  const OverheadShape shape{model.input_dim(), ds.scene.antennas(), ds.scene.num_subcarriers};
  EvalReport report = evaluate(model, set, manifest.value("variant", "custom"), shape);
  export_report(report, out_dir);
  return report;
}

EvalReport run_variant(const VariantSpec& spec, const RunConfig& config,
                       const fs::path& out_dir, AccessLog* log) {
  config.validate();
  if (spec.input == LbbInput::kChart && spec.chart_mode == ChartMode::kNone) {
    throw ConfigError("variant " + spec.id + ": chart input needs a chart mode");
  }
  if (!spec.paper_preset) log_info("variant " + spec.id + " is a custom (non-preset) variant");
  ensure_directory(out_dir);
  const fs::path cache = config.cache_dir.empty() ? out_dir / "cache" : fs::path(config.cache_dir);

  const fs::path ds_dir = ensure_dataset(config.scene, cache);
  TrainRequest req;
  req.variant = spec.id;
  req.input = spec.input;
  req.dataset_dir = ds_dir;
  req.target = spec.target;
  req.split_fraction = config.split_fraction;
  req.split_seed = config.split_seed;
  req.nn = config.nn;
  if (spec.input == LbbInput::kChart) {
    const Dataset ds = load_dataset(ds_dir);
    req.chart_dir = ensure_chart(ds_dir, ds, spec.chart_mode, spec.chart_dim,
                                 static_cast<std::size_t>(config.isomap_k), config.split_fraction,
                                 config.split_seed, cache, log);
    export_chart_csv(load_chart(req.chart_dir), ds, out_dir / ("chart_" + spec.id + ".csv"));
  }
  const TrainOutcome trained = train_stage(req, out_dir / "model");
  EvalReport report = eval_stage(out_dir / "model", ds_dir, out_dir);

  Json run;
  run["variant"] = {{"id", spec.id},
                    {"paper_preset", spec.paper_preset},
                    {"lbb_input", spec.input == LbbInput::kChart ? "chart" : "true_location"},
                    {"chart_mode", to_string(spec.chart_mode)},
                    {"chart_dim", spec.input == LbbInput::kChart ? spec.chart_dim : 0},
                    {"target", to_string(spec.target)}};
  run["config"] = run_config_to_json(config);
  run["artifacts"] = {{"dataset", ds_dir.string()},
                      {"chart", req.chart_dir.string()},
                      {"model", (out_dir / "model").string()}};
  run["initial_loss"] = trained.initial_loss;
  run["loss_history"] = trained.loss_history;
  run["summary"] = summary_json(report);
  write_json(out_dir / "run.json", run);
  return report;
}

Json Comparison::to_json() const {
  Json j;
  j["variants"] = Json::array();
  for (const auto& r : rows) {
    j["variants"].push_back({{"variant", r.variant}, {"count", r.count}, {"mean", r.mean},
                             {"median", r.median}, {"p10", r.p10}});
  }
  Json diff = Json::object();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (i != k) diff[rows[i].variant + "-" + rows[k].variant] = median_diff[i][k];
    }
  }
  j["median_differences"] = diff;
  return j;
}

std::string Comparison::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %8s %9s %9s %9s\n", "variant", "count", "mean",
                "median", "p10");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %8zu %9.4f %9.4f %9.4f\n", r.variant.c_str(),
                  r.count, r.mean, r.median, r.p10);
    out += line;
  }
  if (rows.size() > 1) {
    out += "\nmedian difference (row - column)\n";
    std::snprintf(line, sizeof(line), "%-10s", "");
    out += line;
    for (const auto& r : rows) {
      std::snprintf(line, sizeof(line), " %9s", r.variant.c_str());
      out += line;
    }
    out += "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::snprintf(line, sizeof(line), "%-10s", rows[i].variant.c_str());
      out += line;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        std::snprintf(line, sizeof(line), " %9.4f", median_diff[i][k]);
        out += line;
      }
      out += "\n";
    }
  }
  return out;
}

Comparison compare(std::span<const EvalReport> reports) {
  Comparison c;
  for (const auto& r : reports) {
    c.rows.push_back({r.variant, r.summary.count, r.summary.mean, r.summary.median, r.summary.p10});
  }
  c.median_diff.assign(c.rows.size(), std::vector<double>(c.rows.size(), 0.0));
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    for (std::size_t k = 0; k < c.rows.size(); ++k) {
      c.median_diff[i][k] = c.rows[i].median - c.rows[k].median;
    }
  }
  return c;
}

void export_comparison(const Comparison& comparison, const fs::path& out_dir) {
  ensure_directory(out_dir);
  write_json(out_dir / "comparison.json", comparison.to_json());
  write_text(out_dir / "comparison.txt", comparison.to_table());
}

}  // namespace ccbf
