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

#ifndef CCBF_CHART_HPP_
#define CCBF_CHART_HPP_

// Channel charting: phase-insensitive dissimilarity, k-NN graph, graph
// geodesics and classical MDS (Isomap), plus kernel-regression embedding of
// channels that were not part of the chart.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/io.hpp"

namespace ccbf {

// Symmetric N x N matrix with zero diagonal, stored as the strict upper
// triangle in row order (same order as scipy's condensed form).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n)
      : n_(n), values_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

  std::size_t size() const { return n_; }
  std::span<double> condensed() { return values_; }
  std::span<const double> condensed() const { return values_; }

  // Position of (i, j), i < j, in the condensed array.
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return i < j ? values_[index(i, j)] : values_[index(j, i)];
  }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i < j ? index(i, j) : index(j, i)] = v;
  }

  Eigen::MatrixXd to_dense() const;
  static DistanceMatrix from_dense(const Eigen::MatrixXd& dense);

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// Rows of a channel matrix are not copied: charting works on column views.
using ChannelColumns = Eigen::Ref<const Eigen::MatrixXcd>;

// sqrt(max(0, 2 - 2 |<h1, h2>|^2 / (|h1|^2 |h2|^2))): the Frobenius distance
// between the normalized outer products. Throws ZeroChannel (index 0 or 1)
// when a norm is below 1e-30.
double pi_distance(const Eigen::Ref<const Eigen::VectorXcd>& h1,
                   const Eigen::Ref<const Eigen::VectorXcd>& h2);

// Pairwise pi_distance over the columns of `channels`.
DistanceMatrix pairwise_distances(const ChannelColumns& channels);

struct Edge {
  std::size_t to;
  double weight;
};

struct NeighborGraph {
  std::size_t k = 0;
  // Sorted by target index.
  std::vector<std::vector<Edge>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  std::size_t edge_count() const;
};

// Each node links to its k nearest neighbors (ties by lower index); the
// result is symmetrized by union.
NeighborGraph knn_graph(const DistanceMatrix& dm, std::size_t k);

// All-pairs shortest paths via Dijkstra from every source. Throws
// DisconnectedGraph listing the component sizes.
DistanceMatrix geodesic_distances(const NeighborGraph& graph);

// Sizes of connected components, ordered by their smallest node.
std::vector<std::size_t> component_sizes(const NeighborGraph& graph);

struct EigenSolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
  std::uint64_t seed = 0x5eed;
  // Extra vectors carried beyond the requested dimension.
  int guard_vectors = 2;
};

struct MdsResult {
  Eigen::MatrixXd coordinates;  // D x N, columns centered
  std::vector<double> eigenvalues;  // top D of the centered Gram matrix
  int iterations = 0;
  double residual = 0.0;
  int clamped = 0;  // negative eigenvalues set to zero
};

// Top-D eigenpairs of the symmetric matrix by block subspace iteration with
// Rayleigh-Ritz and locking of converged vectors. Eigenvalues are returned
// in descending algebraic order. Throws ConvergenceFailure.
struct SymmetricEigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int iterations = 0;
  double residual = 0.0;
};
SymmetricEigenResult top_eigenpairs(const Eigen::MatrixXd& matrix, int count,
                                    const EigenSolverOptions& options = {});

MdsResult classical_mds(const DistanceMatrix& dm, int dim,
                        const EigenSolverOptions& options = {});

struct Chart {
  Eigen::MatrixXd z;        // D x N latent locations
  Eigen::MatrixXcd anchors; // A*S x N training channels
  double sigma = 0.0;       // similarity kernel bandwidth
  std::size_t k = 0;
  MdsResult solver;

  int dim() const { return static_cast<int>(z.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(z.cols()); }
};

// Mean over nodes of the distance to the k-th nearest neighbor.
double mean_kth_neighbor_distance(const DistanceMatrix& dm, std::size_t k);

// Kernel bandwidth for N anchors: similarity at the mean k-th neighbour
// distance equals 1/N, i.e. sigma = d_k / sqrt(2 ln N).
double oos_bandwidth(double kth_distance, std::size_t anchors);

Chart isomap(const ChannelColumns& channels, std::size_t k, int dim,
             const EigenSolverOptions& options = {});

struct OosOptions {
  // Throw NumericalUnderflow instead of falling back to the nearest anchor.
  bool strict = false;
};

struct OosDiagnostics {
  bool underflow = false;
  std::size_t nearest_anchor = 0;
};

// Kernel regression over the anchors: Gaussian similarity of the
// pi_distance, normalized to a convex combination of chart columns.
Eigen::VectorXd oos_embed(const Chart& chart,
                          const Eigen::Ref<const Eigen::VectorXcd>& h,
                          const OosOptions& options = {},
                          OosDiagnostics* diagnostics = nullptr);

// Embeds every column; parallel over columns.
Eigen::MatrixXd oos_embed_all(const Chart& chart, const ChannelColumns& channels,
                              std::size_t* underflow_count = nullptr);

}  // namespace ccbf

#endif  // CCBF_CHART_HPP_
