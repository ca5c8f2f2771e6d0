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

#ifndef CCBF_ERROR_HPP_
#define CCBF_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccbf {

// Broad classes of failure. Values double as CLI exit codes where they
// overlap (config = 2, numerical = 3).
enum class ErrorKind {
  kConfig = 2,
  kNumerical = 3,
  kIo = 4,
  kInvalidArgument = 5,
  kDomain = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

// Input outside the mathematical domain of an operation (e.g. a departure
// direction behind an array).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kDomain, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

class EmptyPathSet : public NumericalError {
 public:
  explicit EmptyPathSet(const std::string& what) : NumericalError(what) {}
};

class ZeroChannel : public NumericalError {
 public:
  ZeroChannel(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ZeroPrecoder : public NumericalError {
 public:
  ZeroPrecoder(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DisconnectedGraph : public NumericalError {
 public:
  DisconnectedGraph(const std::string& what,
                    std::vector<std::size_t> component_sizes)
      : NumericalError(what), component_sizes_(std::move(component_sizes)) {}
  const std::vector<std::size_t>& component_sizes() const noexcept {
    return component_sizes_;
  }

 private:
  std::vector<std::size_t> component_sizes_;
};

class ConvergenceFailure : public NumericalError {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class NonFiniteLoss : public NumericalError {
 public:
  NonFiniteLoss(const std::string& what, int epoch, int batch)
      : NumericalError(what), epoch_(epoch), batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

class NumericalUnderflow : public NumericalError {
 public:
  explicit NumericalUnderflow(const std::string& what) : NumericalError(what) {}
};

}  // namespace ccbf

#endif  // CCBF_ERROR_HPP_
