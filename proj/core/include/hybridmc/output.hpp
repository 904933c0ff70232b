// Copyright 2026 The hybridmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYBRIDMC_OUTPUT_HPP
#define HYBRIDMC_OUTPUT_HPP

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace hybridmc {

/// Shortest decimal text that parses back to the same double ("inf"/"nan"
/// for non-finite values).
std::string format_double(double value);

/// Minimal CSV emitter. Doubles are written round-trip exact so outputs are
/// byte-stable across runs.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((write_field(fields, first)), ...);
    out_ << '\n';
  }

 private:
  template <class T>
  void write_field(const T& value, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::floating_point<T>) {
      out_ << format_double(static_cast<double>(value));
    } else if constexpr (std::is_same_v<T, bool>) {
      out_ << (value ? 1 : 0);
    } else {
      out_ << value;
    }
  }

  std::ostream& out_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hybridmc

#endif  // HYBRIDMC_OUTPUT_HPP
