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

#include "ccbf/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ccbf/error.hpp"

namespace ccbf {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need a "
              "byte-swapping reader");

namespace {

template <typename T>
void write_raw(const fs::path& file, std::span<const T> values) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw IoError("write failed: " + file.string());
}

template <typename T>
std::vector<T> read_raw(const fs::path& file, std::size_t expected_count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + file.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected_count * sizeof(T)) {
    throw IoError(file.string() + ": expected " +
                  std::to_string(expected_count * sizeof(T)) +
                  " bytes, found " + std::to_string(bytes));
  }
  in.seekg(0);
  std::vector<T> values(expected_count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed: " + file.string());
  return values;
}

}  // namespace

void write_f64(const fs::path& file, std::span<const double> values) {
  write_raw(file, values);
}

std::vector<double> read_f64(const fs::path& file,
                             std::size_t expected_count) {
  return read_raw<double>(file, expected_count);
}

void write_u8(const fs::path& file, std::span<const std::uint8_t> values) {
  write_raw(file, values);
}

std::vector<std::uint8_t> read_u8(const fs::path& file,
                                  std::size_t expected_count) {
  return read_raw<std::uint8_t>(file, expected_count);
}

void write_json(const fs::path& file, const Json& value) {
  write_text(file, value.dump(2) + "\n");
}

Json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open for reading: " + file.string());
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void write_text(const fs::path& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + file.string());
}

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const fs::path& file, std::uint64_t seed) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + file.string());
  std::uint64_t h = seed;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())),
                h);
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << value;
  return os.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " +
                        ec.message());
}

}  // namespace ccbf
