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


#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pinning/campaign.hpp"
#include "pinning/errors.hpp"
#include "pinning/io.hpp"

using namespace pinning;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  return config_from_json(json::parse(R"({
    "name": "small",
    "tasks": ["quench", "moments"],
    "model": {"alpha": 0.6, "horizon": 512},
    "disorder": {"gamma": 1.5},
    "sweep": {"h": [0.0, 0.1], "n": [64, 128]},
    "run": {"replicas": 32, "master_seed": 11, "beta": 0.3},
    "params": {"p": 1.2}
  })"));
}

std::string error_of(const std::string& text) {
  try {
    config_from_json(json::parse(text));
  } catch (const PreconditionError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("nested and flat configs agree") {
  const auto nested = small_config();
  const auto flat = config_from_json(json::parse(R"({
    "name": "small", "tasks": ["quench", "moments"], "alpha": 0.6, "horizon": 512,
    "gamma": 1.5, "h": [0.0, 0.1], "n": [64, 128], "replicas": 32, "seed": 11,
    "beta": 0.3, "p": 1.2
  })"));
  CHECK(config_hash(nested) == config_hash(flat));
  CHECK(nested.sweep.h == std::vector<double>{0.0, 0.1});
  CHECK(nested.sweep.n == std::vector<std::size_t>{64, 128});
  CHECK(nested.run.beta == 0.3);
}

TEST_CASE("canonical JSON round trips") {
  auto c = small_config();
  c.outputs.csv_path = "x.csv";
  const auto back = config_from_json(json::parse(config_to_json(c).dump()));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.outputs.csv_path == "x.csv");
  CHECK(config_to_json(back).dump() == config_to_json(c).dump());
}

TEST_CASE("grids") {
  const auto c = config_from_json(json::parse(R"({
    "sweep": {"beta": {"from": 0.1, "to": 0.3, "points": 3},
              "h": {"log_from": 0.001, "log_to": 0.1, "points": 3},
              "n": {"pow2_from": 4, "pow2_to": 6}}})"));
  REQUIRE(c.sweep.beta.size() == 3);
  CHECK(c.sweep.beta[1] == doctest::Approx(0.2));
  CHECK(c.sweep.h[1] == doctest::Approx(0.01));
  CHECK(c.sweep.n == std::vector<std::size_t>{16, 32, 64});
}

TEST_CASE("config errors name the offending path") {
  CHECK(error_of(R"({"model": {"alpha": "x"}})").find("model.alpha") != std::string::npos);
  CHECK(error_of(R"({"model": {"colour": 1}})").find("model.colour: unknown key") != std::string::npos);
  CHECK(error_of(R"({"bogus": 1})").find("bogus: unknown key") != std::string::npos);
  CHECK(error_of(R"({"disorder": {"gamma": 2.5}})").find("disorder.gamma") != std::string::npos);
  CHECK(error_of(R"({"sweep": {"beta": [0.1, 1.5]}})").find("sweep.beta[1]") != std::string::npos);
  CHECK(error_of(R"({"sweep": {"h": {"log_from": 0, "log_to": 1, "points": 2}}})").find("sweep.h") !=
        std::string::npos);
  CHECK(error_of(R"({"run": {"replicas": 2.5}})").find("run.replicas") != std::string::npos);
  CHECK(error_of(R"({"tasks": ["quench", "dance"]})").find("tasks[1]") != std::string::npos);
  CHECK(error_of("[1, 2]").find("JSON object") != std::string::npos);
}

TEST_CASE("later keys override earlier ones") {
  auto c = small_config();
  apply_config_json(c, json::parse(R"({"run": {"replicas": 40}, "tasks": ["hc-scan"]})"));
  CHECK(c.run.replicas == 40);
  CHECK(c.tasks == std::vector<std::string>{"hc-scan"});
  CHECK(c.sweep.h.size() == 2);
}

TEST_CASE("hash ignores outputs and worker count") {
  auto a = small_config();
  auto b = a;
  b.outputs.csv_path = "elsewhere.csv";
  b.run.parallelism = 3;
  CHECK(config_hash(a) == config_hash(b));
  b.run.master_seed = 12;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 2);
  const auto p1 = preset("theorem-2.1");
  CHECK(p1.model.alpha == 0.4);
  CHECK(p1.disorder.gamma == 1.8);
  CHECK(!p1.tasks.empty());
  const auto p2 = preset("theorem-2.2");
  CHECK(p2.model.alpha == 0.9);
  CHECK(p2.disorder.gamma == 1.5);
  CHECK(p2.sweep.beta.size() >= 4);
  CHECK_THROWS_AS(preset("theorem-9"), PreconditionError);
}

TEST_CASE("campaigns are reproducible and thread invariant") {
  auto c = small_config();
  c.run.parallelism = 1;
  const auto a = run_campaign(c);
  c.run.parallelism = 4;
  const auto b = run_campaign(c);
  CHECK(rows_csv(a, c) == rows_csv(b, c));
  CHECK(a.rows.size() == 4 * 6 + 4);
  CHECK(!a.certificate_sought);
  // Distinct points get distinct seeds.
  CHECK(a.rows.front().seed != a.rows.back().seed);
  auto c2 = c;
  c2.run.master_seed = 12;
  CHECK(rows_csv(run_campaign(c2), c2) != rows_csv(a, c));
}

TEST_CASE("a campaign without tasks is rejected") {
  ExperimentConfig c;
  CHECK_THROWS_AS(run_campaign(c), PreconditionError);
}

TEST_CASE("outputs: CSV, JSON and the timing sidecar") {
  auto c = small_config();
  c.tasks = {"quench"};
  const auto dir = fs::temp_directory_path() / "pinning_campaign_test";
  fs::remove_all(dir);
  set_output_dir(c, dir.string());
  const auto r = run_campaign(c);
  write_outputs(r, c);
  const auto csv = read_file((dir / "small.csv").string());
  CHECK(csv.rfind("config_hash,module_version,master_seed,task,point_index,point_seed,", 0) == 0);
  const auto j = json::parse(read_file((dir / "small.json").string()));
  CHECK(j["config_hash"] == r.config_hash);
  CHECK(j["rows"] == r.rows.size());
  CHECK(j.contains("summary"));
  CHECK(!j["config"].contains("outputs"));
  CHECK(fs::exists(dir / "small.timing.json"));
  CHECK(csv.find(r.config_hash) != std::string::npos);
}

TEST_CASE("self-verification") {
  std::ostringstream clean;
  CHECK(verify({7, ""}, clean) == 0);
  CHECK(clean.str().find("all suites passed") != std::string::npos);
  std::ostringstream bad;
  CHECK(verify({7, "corrupt-kernel"}, bad) != 0);
  CHECK(bad.str().find("residual") != std::string::npos);
  CHECK(bad.str().find("normalisation") != std::string::npos);
  for (std::uint64_t seed : {1, 2, 3}) {
    std::ostringstream out;
    CHECK_MESSAGE(verify({seed, ""}, out) == 0, out.str());
  }
}
