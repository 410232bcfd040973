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
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace pinning {

struct ModelConfig {
  double alpha = 0.5;
  std::size_t horizon = 1u << 14;
  bool infinite_tail = false;  ///< zeta normaliser with explicit tail mass
};

struct DisorderConfig {
  double gamma = 1.5;
};

/// Cartesian grid. An empty axis falls back to the scalar default.
struct SweepConfig {
  std::vector<double> beta;
  std::vector<double> h;
  std::vector<std::size_t> n;
};

struct RunConfig {
  std::size_t n = 1024;
  std::size_t replicas = 64;
  std::uint64_t master_seed = 1;
  int parallelism = 0;  ///< 0: OpenMP default or PINNING_THREADS
  double beta = 0.1;
  double h = 0.0;
};

/// Knobs used by individual tasks.
struct TaskParams {
  double p = 1.3;
  double q = 0.5;
  std::size_t L = 64;
  std::size_t n_max = 256;
  std::size_t k = 0;        ///< 0: k from h via the k(h) rule
  double c1 = 1.0;
  double c2 = 0.05;
  double delta = 0.0;
  double eta = 0.5;
  double tol = 0.01;
  double threshold = 0.0;  ///< positivity threshold for hc-scan
  bool force = false;
  bool use_rho = true;
};

struct OutputConfig {
  std::string csv_path;
  std::string json_path;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::string> tasks;  ///< quench, moments, second-moment, certify-deloc, certify-irrel, hc-scan
  ModelConfig model;
  DisorderConfig disorder;
  SweepConfig sweep;
  RunConfig run;
  TaskParams params;
  OutputConfig outputs;
};

/// Accepts the nested layout {model, disorder, sweep, run, params, outputs}
/// or flat keys {alpha, gamma, beta, h, n, replicas, seed, ...}. Unknown
/// keys and type errors are rejected with the JSON path of the offender.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Same rules, layered on top of an existing config (later keys win).
void apply_config_json(ExperimentConfig& config, const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
/// FNV-1a of the canonical config dump. Output paths are excluded.
std::string config_hash(const ExperimentConfig& config);

ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// One estimate in the long-format result table.
struct ResultRow {
  std::string task;
  std::size_t point_index = 0;
  std::size_t replica_begin = 0;
  std::size_t replica_end = 0;
  std::uint64_t seed = 0;  ///< seed the replicas of this point were derived from
  double beta = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  double order = 0.0;      ///< p, q or theta, depending on the task
  std::size_t size = 0;    ///< k or L, depending on the task
  std::string quantity;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double stderr_value = 0.0;
  int flag = 0;            ///< certificate / check outcome, -1 when not applicable
};

struct CampaignResult {
  std::string config_hash;
  std::vector<ResultRow> rows;
  nlohmann::ordered_json summary;
  nlohmann::ordered_json timing;  ///< wall times, kept out of the reproducible outputs
  bool certificate_sought = false;
  bool certificate_obtained = true;
};

CampaignResult run_campaign(const ExperimentConfig& config, std::ostream* log = nullptr);

std::string rows_csv(const CampaignResult& result, const ExperimentConfig& config);

/// Writes CSV, JSON summary and a timing sidecar (json_path + ".timing.json").
void write_outputs(const CampaignResult& result, const ExperimentConfig& config);

/// Assigns default output paths inside dir when none are configured.
void set_output_dir(ExperimentConfig& config, const std::string& dir);

/// Invariant suite. Returns 0 iff every check passes.
struct VerifyOptions {
  std::uint64_t seed = 7;
  std::string inject;  ///< "", or "corrupt-kernel"
};

int verify(const VerifyOptions& options, std::ostream& out);

}  // namespace pinning
