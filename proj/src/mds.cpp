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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ccbf/chart.hpp"
#include "ccbf/error.hpp"
#include "ccbf/log.hpp"
#include "ccbf/random.hpp"

namespace ccbf {
namespace {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

// Removes the span of `locked` from `x` (twice, for numerical safety) and
// re-orthonormalizes.
Eigen::MatrixXd orthonormal_against(Eigen::MatrixXd x, const Eigen::MatrixXd& locked) {
  if (locked.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) x -= locked * (locked.transpose() * x);
  }
  return orthonormal_columns(x);
}

struct RitzPairs {
  Eigen::VectorXd values;   // descending magnitude
  Eigen::MatrixXd vectors;  // X * V
  Eigen::MatrixXd images;   // (B + shift) X * V
};

RitzPairs rayleigh_ritz(const Eigen::MatrixXd& x, const Eigen::MatrixXd& bx) {
  Eigen::MatrixXd h = x.transpose() * bx;
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::Index p = h.rows();
  // Order by decreasing magnitude: that is the order in which subspace
  // iteration converges.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  Eigen::MatrixXd v(p, p);
  RitzPairs r;
  r.values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    v.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    r.values[j] = es.eigenvalues()[order[static_cast<std::size_t>(j)]];
  }
  r.vectors = x * v;
  r.images = bx * v;
  return r;
}

struct SubspaceOutcome {
  Eigen::VectorXd values;  // of the shifted operator
  Eigen::MatrixXd vectors;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Dominant `count` eigenpairs of (matrix + shift * I). Converged leading
// Ritz vectors are locked and deflated from the active block.
SubspaceOutcome subspace_iteration(const Eigen::MatrixXd& matrix, double shift,
                                   int count, const EigenSolverOptions& opt) {
  const Eigen::Index n = matrix.rows();
  const int block = std::min<int>(count + opt.guard_vectors, static_cast<int>(n));

  Rng rng(opt.seed);
  Eigen::MatrixXd start(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) start(i, j) = rng.normal();
  }
  Eigen::MatrixXd active = orthonormal_columns(start);
  Eigen::MatrixXd locked(n, 0);
  std::vector<double> locked_values;
  double scale = 0.0;

  SubspaceOutcome out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd bx = matrix * active + shift * active;
    RitzPairs rr = rayleigh_ritz(active, bx);
    scale = std::max(scale, rr.values.cwiseAbs().maxCoeff());
    for (double v : locked_values) scale = std::max(scale, std::abs(v));
    const double floor = scale > 0.0 ? scale : 1.0;

    // Lock converged leading pairs, in order.
    Eigen::Index take = 0;
    double worst_unlocked = 0.0;
    const auto needed = static_cast<Eigen::Index>(count) - locked.cols();
    for (Eigen::Index j = 0; j < rr.values.size(); ++j) {
      const double res =
          (rr.images.col(j) - rr.values[j] * rr.vectors.col(j)).norm() / floor;
      if (j < needed) {
        if (take == j && res < opt.tolerance) {
          ++take;
          out.residual = std::max(out.residual, res);
        } else {
          worst_unlocked = std::max(worst_unlocked, res);
        }
      }
    }
    if (take > 0) {
      const Eigen::Index old = locked.cols();
      locked.conservativeResize(n, old + take);
      locked.rightCols(take) = rr.vectors.leftCols(take);
      for (Eigen::Index j = 0; j < take; ++j) locked_values.push_back(rr.values[j]);
    }
    if (locked.cols() >= count) {
      out.converged = true;
      break;
    }
    if (it == opt.max_iterations) {
      out.residual = std::max(out.residual, worst_unlocked);
      break;
    }
    // Next block: images of the unlocked Ritz vectors.
    active = orthonormal_against(rr.images.rightCols(rr.values.size() - take), locked);
  }
  out.values = Eigen::Map<const Eigen::VectorXd>(locked_values.data(),
                                                 static_cast<Eigen::Index>(locked_values.size()));
  out.vectors = locked;
  return out;
}

}  // namespace

SymmetricEigenResult top_eigenpairs(const Eigen::MatrixXd& matrix, int count,
                                    const EigenSolverOptions& options) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n) throw InvalidArgument("top_eigenpairs: matrix must be square");
  if (count < 1 || count > n) throw InvalidArgument("top_eigenpairs: bad eigenpair count");

  SymmetricEigenResult result;
  const double norm = matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm == 0.0) {
    result.values = Eigen::VectorXd::Zero(count);
    result.vectors = Eigen::MatrixXd::Identity(n, count);
    return result;
  }

  // Subspace iteration finds the eigenvalues largest in magnitude. When a
  // negative eigenvalue outranks a wanted positive one, retry on
  // matrix + shift*I with the shift set to the most negative value seen.
  double shift = 0.0;
  int total_iterations = 0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    SubspaceOutcome o = subspace_iteration(matrix, shift, count, options);
    total_iterations += o.iterations;
    if (!o.converged) {
      throw ConvergenceFailure("subspace iteration did not converge after " +
                                   std::to_string(o.iterations) +
                                   " iterations (relative residual " +
                                   std::to_string(o.residual) + ")",
                               o.residual);
    }
    Eigen::VectorXd values = o.values.array() - shift;
    // A negative value of the shifted operator among the dominant ones means
    // it outranked a wanted positive eigenvalue. The most negative eigenvalue
    // is then among those found, and shifting by it makes the operator
    // positive semidefinite.
    const bool polluted = o.values.minCoeff() < 0.0;
    if (!polluted) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
      result.values.resize(count);
      result.vectors.resize(n, count);
      for (int i = 0; i < count; ++i) {
        result.values[i] = values[order[static_cast<std::size_t>(i)]];
        result.vectors.col(i) = o.vectors.col(order[static_cast<std::size_t>(i)]);
      }
      result.iterations = total_iterations;
      result.residual = o.residual;
      return result;
    }
    shift = -values.minCoeff();
  }
  throw ConvergenceFailure("subspace iteration could not separate negative eigenvalues", 0.0);
}

MdsResult classical_mds(const DistanceMatrix& dm, int dim,
                        const EigenSolverOptions& options) {
  const std::size_t n = dm.size();
  if (dim < 1) throw InvalidArgument("classical_mds: dim must be >= 1");
  if (n < 1 || static_cast<std::size_t>(dim) > n) {
    throw InvalidArgument("classical_mds: dim exceeds number of points");
  }
  const auto N = static_cast<Eigen::Index>(n);

  // Double centering of the squared distances.
  Eigen::MatrixXd b(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    b(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < N; ++j) {
      const double d = dm(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      b(i, j) = d * d;
      b(j, i) = d * d;
    }
  }
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const double grand = row_mean.mean();
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < N; ++i) {
      b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
    }
  }

  const SymmetricEigenResult eig = top_eigenpairs(b, dim, options);
  MdsResult out;
  out.iterations = eig.iterations;
  out.residual = eig.residual;
  out.coordinates.resize(dim, N);
  for (int d = 0; d < dim; ++d) {
    double lambda = eig.values[d];
    if (lambda < 0.0) {
      ++out.clamped;
      lambda = 0.0;
    }
    out.eigenvalues.push_back(lambda);
    out.coordinates.row(d) = std::sqrt(lambda) * eig.vectors.col(d).transpose();
  }
  if (out.clamped > 0) {
    log_warning("classical_mds: clamped " + std::to_string(out.clamped) +
                " negative eigenvalue(s) to zero");
  }
  const Eigen::VectorXd mean = out.coordinates.rowwise().mean();
  out.coordinates.colwise() -= mean;
  return out;
}

}  // namespace ccbf
