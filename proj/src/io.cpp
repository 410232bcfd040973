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

#include "pinning/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pinning/errors.hpp"

namespace pinning {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw std::runtime_error("rename to '" + path + "' failed: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string kernel_csv(const RenewalKernel& kernel, const RenewalMassTable& mass) {
  CsvWriter csv({"n", "K", "u"});
  for (std::size_t n = 0; n <= mass.length(); ++n) {
    csv.add_row({std::to_string(n), format_double(kernel(n)), format_double(mass.u[n])});
  }
  return csv.str();
}

nlohmann::ordered_json spec_to_json(const DisorderSpec& spec) {
  nlohmann::ordered_json j;
  j["gamma"] = spec.gamma;
  j["family"] = to_string(spec.family);
  return j;
}

DisorderSpec spec_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("gamma"), "disorder spec: missing 'gamma'");
  auto spec = make_spec(j.at("gamma").get<double>());
  if (j.contains("family")) spec.family = family_from_string(j.at("family").get<std::string>());
  return spec;
}

std::string env_csv(const EnvironmentSample& env) {
  CsvWriter csv({"n", "omega_n"});
  for (std::size_t n = 0; n < env.values.size(); ++n) {
    csv.add_row({std::to_string(n), format_double(env.values[n])});
  }
  return csv.str();
}

EnvironmentSample env_from_csv(const std::string& text, const DisorderSpec& spec) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "environment CSV: empty input");
  require(line.rfind("n,omega_n", 0) == 0, "environment CSV: header must be 'n,omega_n'");
  EnvironmentSample env;
  env.spec = spec;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, "environment CSV: malformed row '" + line + "'");
    const std::size_t n = std::stoull(line.substr(0, comma));
    require(n == expected, "environment CSV: rows must be n = 0, 1, 2, ...");
    const double w = std::stod(line.substr(comma + 1));
    require(w >= -1.0, "environment CSV: omega_n must be >= -1");
    env.values.push_back(w);
    ++expected;
  }
  require(!env.values.empty(), "environment CSV: no rows");
  return env;
}

namespace {

constexpr char kMagic[8] = {'P', 'I', 'N', 'E', 'N', 'V', '0', '1'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), "environment binary: truncated input");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> env_binary(const EnvironmentSample& env) {
  static_assert(sizeof(double) == 8, "64-bit doubles required");
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put<std::uint64_t>(out, env.size());
  put<std::uint64_t>(out, env.seed);
  put<double>(out, env.spec.gamma);
  for (double w : env.values) put<double>(out, w);
  return out;
}

EnvironmentSample env_from_binary(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) == 0,
          "environment binary: bad magic");
  std::size_t pos = 8;
  EnvironmentSample env;
  const auto n = get<std::uint64_t>(bytes, pos);
  env.seed = get<std::uint64_t>(bytes, pos);
  env.spec = make_spec(get<double>(bytes, pos));
  require(bytes.size() == pos + 8 * (n + 1), "environment binary: length mismatch");
  env.values.resize(n + 1);
  for (auto& w : env.values) w = get<double>(bytes, pos);
  return env;
}

void write_env(const std::string& path, const EnvironmentSample& env) {
  if (std::filesystem::path(path).extension() == ".bin") {
    const auto bytes = env_binary(env);
    atomic_write(path, std::string(bytes.begin(), bytes.end()));
  } else {
    atomic_write(path, env_csv(env));
  }
}

EnvironmentSample read_env(const std::string& path, const DisorderSpec& spec) {
  const auto text = read_file(path);
  if (std::filesystem::path(path).extension() == ".bin") {
    return env_from_binary(std::vector<std::uint8_t>(text.begin(), text.end()));
  }
  return env_from_csv(text, spec);
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += quote(header[i]);
  }
  text_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  require(cells.size() == width_, "CsvWriter: row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += quote(cells[i]);
  }
  text_ += '\n';
  ++rows_;
}

std::string CsvWriter::str() const { return text_; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pinning
