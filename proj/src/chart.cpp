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

#include "ccbf/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "ccbf/error.hpp"
#include "ccbf/log.hpp"
#include "ccbf/parallel.hpp"

namespace ccbf {
namespace {

constexpr double kZeroNorm = 1e-30;

double distance_from_parts(std::complex<double> inner, double n1, double n2) {
  const double c = std::norm(inner) / (n1 * n2);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * c));
}

}  // namespace

Eigen::MatrixXd DistanceMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                            static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = values_[index(i, j)];
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return d;
}

DistanceMatrix DistanceMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw InvalidArgument("distance matrix must be square");
  DistanceMatrix dm(static_cast<std::size_t>(dense.rows()));
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < dense.cols(); ++j) {
      dm.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
             dense(i, j));
    }
  }
  return dm;
}

double pi_distance(const Eigen::Ref<const Eigen::VectorXcd>& h1,
                   const Eigen::Ref<const Eigen::VectorXcd>& h2) {
  if (h1.size() != h2.size()) throw InvalidArgument("pi_distance: length mismatch");
  const double n1 = h1.squaredNorm();
  const double n2 = h2.squaredNorm();
  if (std::sqrt(n1) < kZeroNorm) throw ZeroChannel("pi_distance: zero channel", 0);
  if (std::sqrt(n2) < kZeroNorm) throw ZeroChannel("pi_distance: zero channel", 1);
  return distance_from_parts(h1.dot(h2), n1, n2);
}

DistanceMatrix pairwise_distances(const ChannelColumns& channels) {
  const std::size_t n = static_cast<std::size_t>(channels.cols());
  if (n < 2) throw InvalidArgument("pairwise_distances needs at least 2 channels");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = channels.col(static_cast<Eigen::Index>(i)).squaredNorm();
    if (std::sqrt(norms[i]) < kZeroNorm) {
      throw ZeroChannel("pairwise_distances: zero channel at index " +
                            std::to_string(i),
                        i);
    }
  }
  DistanceMatrix dm(n);
  auto out = dm.condensed();
  // Rows get shorter towards the end; interleave them so static chunks
  // carry similar work.
  parallel_for(0, n, [&](std::size_t r) {
    const std::size_t i = (r % 2 == 0) ? r / 2 : n - 1 - r / 2;
    const auto hi = channels.col(static_cast<Eigen::Index>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto hj = channels.col(static_cast<Eigen::Index>(j));
      out[dm.index(i, j)] = distance_from_parts(hi.dot(hj), norms[i], norms[j]);
    }
  });
  return dm;
}

std::size_t NeighborGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency) twice += adj.size();
  return twice / 2;
}

NeighborGraph knn_graph(const DistanceMatrix& dm, std::size_t k) {
  const std::size_t n = dm.size();
  if (k < 1 || k >= n) throw InvalidArgument("knn_graph: need 1 <= k < N");
  std::vector<std::vector<std::size_t>> nearest(n);
  parallel_for(0, n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(dm(i, j), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                      cand.end());
    nearest[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) nearest[i].push_back(cand[t].second);
  });

  NeighborGraph g;
  g.k = k;
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nearest[i]) {
      g.adjacency[i].push_back({j, dm(i, j)});
      g.adjacency[j].push_back({i, dm(i, j)});
    }
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end(),
              [](const Edge& a, const Edge& b) { return a.to < b.to; });
    adj.erase(std::unique(adj.begin(), adj.end(),
                          [](const Edge& a, const Edge& b) { return a.to == b.to; }),
              adj.end());
  }
  return g;
}

std::vector<std::size_t> component_sizes(const NeighborGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::size_t count = 0;
    stack.push_back(s);
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      ++count;
      for (const Edge& e : graph.adjacency[u]) {
        if (!seen[e.to]) {
          seen[e.to] = true;
          stack.push_back(e.to);
        }
      }
    }
    sizes.push_back(count);
  }
  return sizes;
}

DistanceMatrix geodesic_distances(const NeighborGraph& graph) {
  const std::size_t n = graph.size();
  const auto sizes = component_sizes(graph);
  if (sizes.size() > 1) {
    std::string list;
    for (std::size_t s : sizes) list += (list.empty() ? "" : ", ") + std::to_string(s);
    throw DisconnectedGraph("neighbor graph has " + std::to_string(sizes.size()) +
                                " components (sizes " + list + ")",
                            sizes);
  }
  DistanceMatrix out(n);
  auto values = out.condensed();
  parallel_for(0, n, [&](std::size_t source) {
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (const Edge& e : graph.adjacency[u]) {
        const double nd = d + e.weight;
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          heap.emplace(nd, e.to);
        }
      }
    }
    for (std::size_t j = source + 1; j < n; ++j) values[out.index(source, j)] = dist[j];
  });
  // Each unordered pair was written from its lower-index source. Shortest
  // path lengths are symmetric in exact arithmetic; rounding can differ by
  // direction, and the lower-index source is the one kept.
  return out;
}

double mean_kth_neighbor_distance(const DistanceMatrix& dm, std::size_t k) {
  const std::size_t n = dm.size();
  if (k < 1 || k >= n) throw InvalidArgument("mean_kth_neighbor_distance: need 1 <= k < N");
  std::vector<double> kth(n);
  parallel_for(0, n, [&](std::size_t i) {
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dm(i, j));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    kth[i] = row[k - 1];
  });
  double sum = 0.0;
  for (double v : kth) sum += v;
  return sum / static_cast<double>(n);
}

double oos_bandwidth(double kth_distance, std::size_t anchors) {
  if (anchors < 2) throw InvalidArgument("oos_bandwidth: need at least two anchors");
  return kth_distance / std::sqrt(2.0 * std::log(static_cast<double>(anchors)));
}

Chart isomap(const ChannelColumns& channels, std::size_t k, int dim,
             const EigenSolverOptions& options) {
  const DistanceMatrix dm = pairwise_distances(channels);
  const NeighborGraph graph = knn_graph(dm, k);
  const DistanceMatrix geo = geodesic_distances(graph);
  Chart chart;
  chart.solver = classical_mds(geo, dim, options);
  chart.z = chart.solver.coordinates;
  chart.anchors = channels;
  chart.sigma = oos_bandwidth(mean_kth_neighbor_distance(dm, k), dm.size());
  chart.k = k;
  return chart;
}

Eigen::VectorXd oos_embed(const Chart& chart,
                          const Eigen::Ref<const Eigen::VectorXcd>& h,
                          const OosOptions& options,
                          OosDiagnostics* diagnostics) {
  const std::size_t n = chart.size();
  if (n == 0) throw InvalidArgument("oos_embed: empty chart");
  if (!(chart.sigma > 0.0)) throw InvalidArgument("oos_embed: sigma must be positive");
  const double hn = h.squaredNorm();
  if (std::sqrt(hn) < kZeroNorm) throw ZeroChannel("oos_embed: zero channel", 0);

  const double inv_two_sigma2 = 1.0 / (2.0 * chart.sigma * chart.sigma);
  Eigen::VectorXd weights(static_cast<Eigen::Index>(n));
  double total = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t nearest = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const auto anchor = chart.anchors.col(static_cast<Eigen::Index>(a));
    const double d = distance_from_parts(h.dot(anchor), hn, anchor.squaredNorm());
    if (d < best) {
      best = d;
      nearest = a;
    }
    const double s = std::exp(-d * d * inv_two_sigma2);
    weights[static_cast<Eigen::Index>(a)] = s;
    total += s;
  }
  if (diagnostics) {
    diagnostics->underflow = !(total > 0.0);
    diagnostics->nearest_anchor = nearest;
  }
  if (!(total > 0.0)) {
    if (options.strict) {
      throw NumericalUnderflow("oos_embed: all anchor similarities underflowed");
    }
    log_warning("oos_embed: similarities underflowed; using nearest anchor " +
                std::to_string(nearest));
    return chart.z.col(static_cast<Eigen::Index>(nearest));
  }
  return chart.z * (weights / total);
}

Eigen::MatrixXd oos_embed_all(const Chart& chart, const ChannelColumns& channels,
                              std::size_t* underflow_count) {
  const auto m = channels.cols();
  Eigen::MatrixXd out(chart.dim(), m);
  std::vector<unsigned char> under(static_cast<std::size_t>(m), 0);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t i) {
    OosDiagnostics diag;
    out.col(static_cast<Eigen::Index>(i)) =
        oos_embed(chart, channels.col(static_cast<Eigen::Index>(i)), {}, &diag);
    under[i] = diag.underflow ? 1 : 0;
  });
  if (underflow_count) {
    *underflow_count = 0;
    for (auto u : under) *underflow_count += u;
  }
  return out;
}

}  // namespace ccbf
