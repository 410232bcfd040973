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

// pinning: command line front end.
// Exit codes: 0 ran, 2 precondition violated (or bad command line),
// 3 certificate sought but not obtained, 1 anything else.

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinning/campaign.hpp"
#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/estimators.hpp"
#include "pinning/io.hpp"
#include "pinning/partition.hpp"
#include "pinning/renewal.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace pinning;

constexpr int kExitPrecondition = 2;
constexpr int kExitNoCertificate = 3;

// Flags shared by every experiment subcommand. Unset options leave the config alone.
struct Overrides {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = "results";
  std::string name;
  std::optional<double> alpha, gamma, beta, h, p, q, c1, c2, delta, tol, threshold;
  std::optional<std::size_t> n, horizon, replicas, L, n_max, k;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool infinite_tail = false;
  bool force = false;
  bool no_rho = false;
  bool quiet = false;
};

void add_experiment_flags(CLI::App* app, Overrides& o, bool allow_preset) {
  app->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  if (allow_preset) {
    app->add_option("--preset", o.preset_name, "built-in campaign")
        ->check(CLI::IsMember(preset_names()));
  }
  app->add_option("--out-dir", o.out_dir, "directory for CSV/JSON outputs");
  app->add_option("--name", o.name, "experiment name (output file stem)");
  app->add_option("--alpha", o.alpha, "renewal tail exponent");
  app->add_option("--gamma", o.gamma, "disorder tail exponent in (1,2)");
  app->add_option("--beta", o.beta, "disorder strength in [0,1)");
  app->add_option("--h", o.h, "pinning reward");
  app->add_option("--n", o.n, "system size");
  app->add_option("--horizon", o.horizon, "kernel support");
  app->add_option("--replicas", o.replicas, "disorder replicas");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--threads", o.threads, "worker threads (0: PINNING_THREADS or OpenMP default)");
  app->add_option("--p", o.p, "moment order");
  app->add_option("--q", o.q, "fractional exponent for the irrelevance certificate");
  app->add_option("--L", o.L, "gap truncation");
  app->add_option("--n-max", o.n_max, "largest n evaluated by the irrelevance certificate");
  app->add_option("--k", o.k, "coarse-graining length (0: from h)");
  app->add_option("--c1", o.c1, "constant in N_beta");
  app->add_option("--c2", o.c2, "constant in h2_beta");
  app->add_option("--delta", o.delta, "exponent slack in N_beta");
  app->add_option("--tol", o.tol, "bisection width for hc-scan");
  app->add_option("--threshold", o.threshold, "positivity threshold for hc-scan");
  app->add_flag("--infinite-tail", o.infinite_tail, "zeta-normalised kernel with explicit tail");
  app->add_flag("--force", o.force, "allow moment orders at or above gamma");
  app->add_flag("--no-rho", o.no_rho, "hc-scan without the rho certificate");
  app->add_flag("--quiet", o.quiet, "no progress lines on stderr");
}

ExperimentConfig build_config(const Overrides& o, const std::vector<std::string>& tasks) {
  ExperimentConfig c;
  if (!o.preset_name.empty()) c = preset(o.preset_name);
  if (!o.config_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(o.config_path));
    } catch (const json::parse_error& e) {
      throw PreconditionError("config: " + o.config_path + ": " + e.what());
    }
    apply_config_json(c, j);
  }
  if (!tasks.empty()) c.tasks = tasks;
  if (!o.name.empty()) c.name = o.name;
  else if (o.preset_name.empty() && o.config_path.empty() && !tasks.empty()) c.name = tasks.front();
  if (o.alpha) c.model.alpha = *o.alpha;
  if (o.horizon) c.model.horizon = *o.horizon;
  if (o.infinite_tail) c.model.infinite_tail = true;
  if (o.gamma) c.disorder.gamma = *o.gamma;
  if (o.beta) { c.run.beta = *o.beta; c.sweep.beta.clear(); }
  if (o.h) { c.run.h = *o.h; c.sweep.h.clear(); }
  if (o.n) { c.run.n = *o.n; c.sweep.n.clear(); }
  if (o.replicas) c.run.replicas = *o.replicas;
  if (o.seed) c.run.master_seed = *o.seed;
  if (o.threads) c.run.parallelism = *o.threads;
  if (o.p) c.params.p = *o.p;
  if (o.q) c.params.q = *o.q;
  if (o.L) c.params.L = *o.L;
  if (o.n_max) c.params.n_max = *o.n_max;
  if (o.k) c.params.k = *o.k;
  if (o.c1) c.params.c1 = *o.c1;
  if (o.c2) c.params.c2 = *o.c2;
  if (o.delta) c.params.delta = *o.delta;
  if (o.tol) c.params.tol = *o.tol;
  if (o.threshold) c.params.threshold = *o.threshold;
  if (o.force) c.params.force = true;
  if (o.no_rho) c.params.use_rho = false;
  // Re-run the config validator over the final values.
  apply_config_json(c, json::object());
  set_output_dir(c, o.out_dir);
  return c;
}

int run_experiment(const Overrides& o, const std::vector<std::string>& tasks) {
  auto config = build_config(o, tasks);
  const auto result = run_campaign(config, o.quiet ? nullptr : &std::cerr);
  write_outputs(result, config);
  ordered_json j;
  j["config_hash"] = result.config_hash;
  j["csv"] = config.outputs.csv_path;
  j["json"] = config.outputs.json_path;
  j["rows"] = result.rows.size();
  j["certificate_sought"] = result.certificate_sought;
  j["certificate_obtained"] = result.certificate_obtained;
  j["summary"] = result.summary;
  std::cout << j.dump(2) << "\n";
  return result.certificate_sought && !result.certificate_obtained ? kExitNoCertificate : 0;
}

struct KernelArgs {
  double alpha = 0.5;
  std::size_t horizon = 1u << 14;
  std::size_t n = 0;
  bool infinite_tail = false;
  std::string out;
};

int run_kernel(const KernelArgs& a) {
  const auto kernel = a.infinite_tail ? make_kernel_infinite(a.alpha, a.horizon)
                                      : make_kernel(a.alpha, a.horizon);
  const auto mass = mass_table(kernel, a.n ? a.n : a.horizon);
  const auto text = kernel_csv(kernel, mass);
  if (a.out.empty()) std::cout << text;
  else atomic_write(a.out, text);
  std::cerr << "renewal residual " << renewal_residual(mass) << "\n";
  return 0;
}

struct PartitionArgs {
  double alpha = 0.5, gamma = 1.5, beta = 0.1, h = 0.0;
  std::size_t n = 1024, horizon = 1u << 14;
  std::uint64_t seed = 1;
  std::string env_path;
};

int run_partition(const PartitionArgs& a) {
  const auto kernel = make_kernel(a.alpha, a.horizon);
  const auto spec = make_spec(a.gamma);
  auto env = a.env_path.empty() ? sample_env(spec, a.n, a.seed) : read_env(a.env_path, spec);
  require(env.size() >= a.n, "partition: environment shorter than n");
  const auto r = partition({a.beta, a.h, a.n}, env, kernel);
  ordered_json j;
  j["alpha"] = a.alpha;
  j["gamma"] = a.gamma;
  j["beta"] = a.beta;
  j["h"] = a.h;
  j["n"] = a.n;
  j["seed"] = a.seed;
  j["log_z_constrained"] = r.log_z_constrained;
  j["log_z_free"] = r.log_z_free;
  j["expected_contacts"] = r.expected_contacts;
  j["contact_fraction"] = r.expected_contacts / static_cast<double>(a.n);
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct EnvArgs {
  double gamma = 1.5;
  std::size_t n = 1024;
  std::uint64_t seed = 1;
  std::string path;
};

int run_env_export(const EnvArgs& a) {
  write_env(a.path, sample_env(make_spec(a.gamma), a.n, a.seed));
  return 0;
}

int run_env_import(const EnvArgs& a) {
  const auto env = read_env(a.path, make_spec(a.gamma));
  double mean = 0.0, top = -1.0;
  for (std::size_t i = 1; i <= env.size(); ++i) {
    mean += env[i];
    top = std::max(top, env[i]);
  }
  ordered_json j;
  j["n"] = env.size();
  j["gamma"] = env.spec.gamma;
  j["seed"] = env.seed;
  j["mean"] = env.size() ? mean / static_cast<double>(env.size()) : 0.0;
  j["max"] = top;
  j["fnv1a"] = fnv1a_hex(env_csv(env));
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct FitArgs {
  std::string in;
  std::string x = "h";
  std::string y = "estimate";
  std::string quantity;
  bool already_log = false;
  double target = std::nan("");
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

int run_fit(const FitArgs& a) {
  std::istringstream in(read_file(a.in));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "fit: empty CSV");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto xi = col(a.x), yi = col(a.y), qi = col("quantity");
  require(xi && yi, "fit: columns '" + a.x + "' and '" + a.y + "' must exist");
  require(a.quantity.empty() || qi, "fit: --quantity needs a 'quantity' column");
  std::vector<double> xs, ys;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    require(cells.size() == header.size(), "fit: ragged CSV row");
    if (!a.quantity.empty() && cells[*qi] != a.quantity) continue;
    double x = std::stod(cells[*xi]), y = std::stod(cells[*yi]);
    if (!a.already_log) {
      if (!(x > 0 && y > 0)) { ++skipped; continue; }
      x = std::log(x);
      y = std::log(y);
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  const auto fit = fit_exponent(xs, ys, a.x + " vs " + a.y);
  ordered_json j;
  j["points"] = xs.size();
  j["skipped_nonpositive"] = skipped;
  j["slope"] = fit.slope;
  j["stderr"] = fit.stderr_slope;
  j["intercept"] = fit.intercept;
  j["residuals"] = fit.residuals;
  if (!std::isnan(a.target)) {
    j["target"] = a.target;
    j["relative_deviation"] = std::abs(fit.slope - a.target) / std::abs(a.target);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered pinning with heavy-tailed disorder: estimators and certificates"};
  // --h is the pinning reward, so help is long-form only.
  app.set_help_flag("--help", "print help and exit");
  app.set_version_flag("--version", std::string(PINNING_VERSION));
  app.require_subcommand(1);

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "write K(n) and u(n) as CSV");
  kernel->add_option("--alpha", ka.alpha)->required();
  kernel->add_option("--horizon", ka.horizon);
  kernel->add_option("--n", ka.n, "rows of u (default: horizon)");
  kernel->add_flag("--infinite-tail", ka.infinite_tail);
  kernel->add_option("--out", ka.out, "CSV path (default stdout)");

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "log Z for one environment, printed as JSON");
  part->add_option("--alpha", pa.alpha);
  part->add_option("--gamma", pa.gamma);
  part->add_option("--beta", pa.beta);
  part->add_option("--h", pa.h);
  part->add_option("--n", pa.n);
  part->add_option("--horizon", pa.horizon);
  part->add_option("--seed", pa.seed);
  part->add_option("--env", pa.env_path, "read omega from a CSV or .bin file")->check(CLI::ExistingFile);

  EnvArgs ea;
  auto* env = app.add_subcommand("env", "environment export and import");
  env->require_subcommand(1);
  auto* env_export = env->add_subcommand("export", "sample omega_0..omega_N to CSV or .bin");
  env_export->add_option("--gamma", ea.gamma);
  env_export->add_option("--n", ea.n);
  env_export->add_option("--seed", ea.seed);
  env_export->add_option("--out", ea.path)->required();
  auto* env_import = env->add_subcommand("import", "read an environment file and summarise it");
  env_import->add_option("--in", ea.path)->required()->check(CLI::ExistingFile);
  env_import->add_option("--gamma", ea.gamma);
  env->require_subcommand(1);

  const std::vector<std::string> tasks = {"quench",        "moments",       "second-moment",
                                          "certify-deloc", "certify-irrel", "hc-scan"};
  std::vector<Overrides> task_flags(tasks.size());
  std::vector<CLI::App*> task_apps;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto* sub = app.add_subcommand(tasks[i], "run the " + tasks[i] + " task over the configured grid");
    add_experiment_flags(sub, task_flags[i], true);
    task_apps.push_back(sub);
  }

  Overrides co;
  auto* campaign = app.add_subcommand("campaign", "run every task of a preset or config");
  add_experiment_flags(campaign, co, true);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "least-squares exponent from two CSV columns");
  fit->add_option("--in", fa.in)->required()->check(CLI::ExistingFile);
  fit->add_option("--x", fa.x, "x column");
  fit->add_option("--y", fa.y, "y column");
  fit->add_option("--quantity", fa.quantity, "keep rows with this quantity only");
  fit->add_flag("--log-input", fa.already_log, "columns already hold logarithms");
  fit->add_option("--target", fa.target, "expected slope, reported as a relative deviation");

  VerifyOptions vo;
  auto* ver = app.add_subcommand("verify", "invariant suites; exit 0 iff all pass");
  ver->add_option("--seed", vo.seed);
  ver->add_option("--inject", vo.inject, "fault injection")->check(CLI::IsMember({"corrupt-kernel"}));
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitPrecondition;
  }

  try {
    if (*kernel) return run_kernel(ka);
    if (*part) return run_partition(pa);
    if (*env_export) return run_env_export(ea);
    if (*env_import) return run_env_import(ea);
    if (*fit) return run_fit(fa);
    if (*ver) return verify(vo, std::cout);
    if (*campaign) {
      if (co.preset_name.empty() && co.config_path.empty()) {
        std::cerr << "campaign: --preset or --config is required\n";
        return kExitPrecondition;
      }
      return run_experiment(co, {});
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (*task_apps[i]) return run_experiment(task_flags[i], {tasks[i]});
    }
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
