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

#include "ccbf/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace ccbf {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& current_sink() {
  static LogSink sink;
  return sink;
}

void emit(LogLevel level, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (auto& sink = current_sink()) {
    sink(level, message);
    return;
  }
  std::cerr << (level == LogLevel::kWarning ? "[ccbf warning] " : "[ccbf] ")
            << message << '\n';
}

}  // namespace

LogSink set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  return std::exchange(current_sink(), std::move(sink));
}

void log_info(const std::string& message) { emit(LogLevel::kInfo, message); }

void log_warning(const std::string& message) {
  emit(LogLevel::kWarning, message);
}

}  // namespace ccbf
