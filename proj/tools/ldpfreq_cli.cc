// Copyright 2026 The ldpfreq Authors
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

// Command-line front end: bench, params, bounds, construct-wss, verify.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ldpfreq/core.h"
#include "ldpfreq/harness.h"
#include "ldpfreq/mechanisms.h"
#include "ldpfreq/theory.h"
#include "ldpfreq/verify.h"

namespace {

using json = nlohmann::json;
using namespace ldpfreq;

int cmd_bench(const std::string& config_path, const std::string& output) {
  ExperimentConfig config = load_config(config_path);
  if (!output.empty()) config.output = output;
  const LossReport report = run_experiment(config);
  if (config.output.empty()) {
    std::cout << report_csv(report);
  } else {
    std::cerr << "wrote " << report.rows.size() << " rows to " << config.output << "\n";
  }
  for (const LossRow& r : report.rows) {
    if (r.status != "ok") return 2;
  }
  return 0;
}

int cmd_params(int d, double epsilon, std::optional<int> k) {
  const PrivacyBudget budget(epsilon);
  const int k_opt = optimal_support_size(d, budget);
  const SchemeParams p = scheme_params(d, budget, k.value_or(k_opt));
  json out = {{"d", d},
              {"epsilon", epsilon},
              {"e_eps", budget.e_eps()},
              {"k", p.k},
              {"optimal_k", k_opt},
              {"p_star", p.p_star},
              {"q_star", p.q_star},
              {"variance_f0_n1", osc_variance(0.0, d, budget, p.k, 1, EstimationMode::kFrequency)},
              {"l2_of_k_n1", l2_of_k(d, budget, 1, p.k, EstimationMode::kFrequency)}};
  const OcmsScheme s = ocms_new(d, budget);
  out["sketch"] = {{"d_prime", s.d_prime}, {"B", s.B},          {"p_true", s.p_true},
                   {"collision", s.collision}, {"q_star", s.q_star}, {"p_alpha", s.p_alpha},
                   {"k_hi", s.k_hi},        {"k_lo", s.k_lo}};
  if (d > budget.e_eps() + 1.0) {
    const DeviationFactors f = ocms_deviation_factors(d, s.d_prime, budget);
    out["sketch"]["alpha"] = f.alpha;
    out["sketch"]["beta"] = f.beta;
    out["sketch"]["product_excess"] = f.product_excess;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_bounds(int d, double epsilon, std::int64_t n, const std::string& mode_text) {
  const PrivacyBudget budget(epsilon);
  const EstimationMode mode = parse_estimation_mode(mode_text);
  const LossBound real = optimal_loss_bound(d, budget, n, mode, false);
  const LossBound integer = optimal_loss_bound(d, budget, n, mode, true);
  json out = {{"d", d},
              {"epsilon", epsilon},
              {"n", n},
              {"mode", std::string(to_string(mode))},
              {"real_k", {{"k", real.k_used}, {"l1", real.l1}, {"l2", real.l2}}},
              {"integer_k", {{"k", integer.k_used}, {"l1", integer.l1}, {"l2", integer.l2}}},
              {"comm_bound_bits", comm_bound_bits(d)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_construct_wss(int d, double epsilon, std::optional<int> k, const std::string& out_path,
                      std::uint64_t seed, int max_attempts) {
  const PrivacyBudget budget(epsilon);
  Rng rng(seed);
  WssOptions opts;
  opts.max_attempts = max_attempts;
  const WssScheme w = wss_construct(d, budget, k.value_or(optimal_support_size(d, budget)), rng, opts);
  save_scheme(w.scheme, out_path);
  json out = {{"d", d},
              {"epsilon", epsilon},
              {"k", w.params.k},
              {"responses", w.scheme.responses()},
              {"response_bound", d * (d - 1) / 2 + 1},
              {"attempts", w.attempts},
              {"out", out_path}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& suite) {
  bool all_ok = true;
  for (const CheckResult& c : run_verify_suite(suite)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all_ok = all_ok && c.passed;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal frequency and distribution estimation under local differential privacy"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto* bench = app.add_subcommand("bench", "Run a benchmark grid from a JSON config");
  bench->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  bench->add_option("--output", output, "Override the config's CSV output path");

  int d = 0;
  double epsilon = 0.0;
  std::optional<int> k;
  auto* params = app.add_subcommand("params", "Scheme parameters as JSON");
  params->add_option("--d", d, "Dictionary size")->required();
  params->add_option("--epsilon", epsilon, "Privacy parameter")->required();
  params->add_option("--k", k, "Support size (default: optimal)");

  std::int64_t n = 0;
  std::string mode = "frequency";
  auto* bounds = app.add_subcommand("bounds", "L1/L2 lower bounds and communication bound");
  bounds->add_option("--d", d)->required();
  bounds->add_option("--epsilon", epsilon)->required();
  bounds->add_option("--n", n)->required();
  bounds->add_option("--mode", mode)->check(CLI::IsMember({"frequency", "distribution"}));

  std::string out_path;
  std::uint64_t seed = 1;
  int max_attempts = 20;
  auto* wss = app.add_subcommand("construct-wss", "Build a weighted subset selection scheme");
  wss->add_option("--d", d)->required();
  wss->add_option("--epsilon", epsilon)->required();
  wss->add_option("--k", k);
  wss->add_option("--out", out_path, "Scheme JSON output")->required();
  wss->add_option("--seed", seed);
  wss->add_option("--max-attempts", max_attempts);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run an oracle suite");
  verify->add_option("--suite", suite)->check(CLI::IsMember(verify_suite_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) return cmd_bench(config_path, output);
    if (*params) return cmd_params(d, epsilon, k);
    if (*bounds) return cmd_bounds(d, epsilon, n, mode);
    if (*wss) return cmd_construct_wss(d, epsilon, k, out_path, seed, max_attempts);
    if (*verify) return cmd_verify(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
