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

#ifndef CCBF_IO_HPP_
#define CCBF_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ccbf {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Raw little-endian blobs. The host byte order is checked at compile time
// in io.cpp; big-endian hosts are not supported.
void write_f64(const fs::path& file, std::span<const double> values);
std::vector<double> read_f64(const fs::path& file, std::size_t expected_count);
void write_u8(const fs::path& file, std::span<const std::uint8_t> values);
std::vector<std::uint8_t> read_u8(const fs::path& file,
                                  std::size_t expected_count);

void write_json(const fs::path& file, const Json& value);
Json read_json(const fs::path& file);

void write_text(const fs::path& file, std::string_view text);

// Shortest representation that round-trips; stable across runs.
std::string format_double(double value);

// 64-bit FNV-1a. Used for content-addressed artifact caching.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const fs::path& file, std::uint64_t seed);
std::string hex64(std::uint64_t value);

void ensure_directory(const fs::path& dir);

}  // namespace ccbf

#endif  // CCBF_IO_HPP_
