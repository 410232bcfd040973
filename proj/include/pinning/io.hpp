// Copyright 2026 The heavytail-pinning Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pinning/disorder.hpp"
#include "pinning/renewal.hpp"

namespace pinning {

/// Shortest round-trip decimal form of a double ("inf", "-inf", "nan" for non-finite).
std::string format_double(double x);

/// Writes to path + ".tmp" and renames over path.
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Columns n, K, u for n = 0..N.
std::string kernel_csv(const RenewalKernel& kernel, const RenewalMassTable& mass);

nlohmann::ordered_json spec_to_json(const DisorderSpec& spec);
DisorderSpec spec_from_json(const nlohmann::json& j);

/// Columns n, omega_n for n = 0..N.
std::string env_csv(const EnvironmentSample& env);
EnvironmentSample env_from_csv(const std::string& text, const DisorderSpec& spec);

/// Little-endian binary: "PINENV01", u64 N, u64 seed, f64 gamma, f64 omega[0..N].
std::vector<std::uint8_t> env_binary(const EnvironmentSample& env);
EnvironmentSample env_from_binary(const std::vector<std::uint8_t>& bytes);

void write_env(const std::string& path, const EnvironmentSample& env);
/// Format chosen by extension: ".bin" binary, anything else CSV.
EnvironmentSample read_env(const std::string& path, const DisorderSpec& spec);

/// CSV with RFC 4180 quoting for text cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace pinning
