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

#include "ldpfreq/harness.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "ldpfreq/estimation.h"
#include "ldpfreq/mechanisms.h"
#include "ldpfreq/oracle.h"
#include "ldpfreq/theory.h"

namespace ldpfreq {
namespace {

using json = nlohmann::json;

constexpr int kWssConstructionCap = 16;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Prepared {
  FrequencyVector truth;
  int d;
  std::int64_t n;
};

Prepared prepare_dataset(const ExperimentConfig& c) {
  if (c.dataset.kind == "file") {
    Transactions t = ingest_transactions(c.dataset.path, c.dataset.max_objects);
    if (c.d != 0 && c.d != t.d) {
      throw std::invalid_argument("config d=" + std::to_string(c.d) +
                                  " but the file has " + std::to_string(t.d) +
                                  " distinct values");
    }
    const std::int64_t n = c.n > 0 ? c.n : static_cast<std::int64_t>(t.objects.size());
    return Prepared{empirical_distribution(t.objects, t.d), t.d, n};
  }
  if (c.n < 1) throw std::invalid_argument("n must be >= 1");
  if (c.dataset.kind == "zipf") {
    return Prepared{zipf_distribution(c.d, c.dataset.exponent), c.d, c.n};
  }
  if (c.dataset.kind == "uniform") return Prepared{FrequencyVector::uniform(c.d), c.d, c.n};
  throw std::invalid_argument("unknown dataset type '" + c.dataset.kind + "'");
}

LossRow blank_row(const MechanismSpec& m, double eps, const Prepared& data,
                  const ExperimentConfig& c) {
  LossRow row;
  row.mechanism = m.label();
  row.epsilon = eps;
  row.d = data.d;
  row.n = data.n;
  row.runs = c.runs;
  row.l1_emp = row.l2_emp = row.l2_std = kNaN;
  row.l2_theory_int = row.l1_theory_int = kNaN;
  row.l2_theory_real = l2_star(data.d, PrivacyBudget(eps), data.n, c.mode, false);
  row.l1_theory_real = l1_from_l2(data.d, row.l2_theory_real);
  row.seed = row_seed(c.seed, row.mechanism, eps);
  row.status = "ok";
  return row;
}

void set_int_theory(LossRow& row, double l2) {
  row.l2_theory_int = l2;
  row.l1_theory_int = l1_from_l2(row.d, l2);
}

bool is_optimal_symmetric(const SupportScheme& s) {
  const int k = s.constant_support_size();
  if (k == 0 || k > s.dictionary_size() - 1) return false;
  const SchemeParams p = scheme_params(s.dictionary_size(), s.budget(), k);
  const SymmetryReport r = verify_symmetric(s, p.p_star, p.q_star);
  return r.max_self_deviation <= 1e-8 && r.max_pair_deviation <= 1e-8;
}

std::optional<Mechanism> build_row(const MechanismSpec& m, const PrivacyBudget& budget,
                                   const Prepared& data, const ExperimentConfig& c,
                                   LossRow& row) {
  const int d = data.d;
  if (m.kind == "ss") {
    SubsetSelectionScheme s = ss_new(d, budget);
    set_int_theory(row, l2_of_k(d, budget, data.n, s.params.k, c.mode));
    return s;
  }
  if (m.kind == "ocms") {
    OcmsScheme s = ocms_new(d, budget);
    if (s.k_lo >= 1) {
      set_int_theory(row, ocms_l2(s, data.n, c.mode));
    } else {
      // Buckets can be empty, so the two-configuration mixture does not
      // apply; use the exact variance of the affine estimator instead.
      set_int_theory(row, d * symmetric_variance(1.0 / d, s.p_star, s.q_star, data.n,
                                                 c.mode));
    }
    return s;
  }
  if (m.kind == "wss") {
    const int k = optimal_support_size(d, budget);
    set_int_theory(row, l2_of_k(d, budget, data.n, k, c.mode));
    if (d > kWssConstructionCap) {
      row.status = "wss_dictionary_too_large";
      return std::nullopt;
    }
    Rng rng(derive_seed(row.seed, {~std::uint64_t{0}}));
    try {
      return wss_construct(d, budget, k, rng);
    } catch (const ConstructionFailed&) {
      row.status = "construction_failed";
      return std::nullopt;
    }
  }
  if (m.kind == "scheme") {
    SupportScheme s = load_scheme(m.path);
    if (s.dictionary_size() != d) {
      throw std::invalid_argument("scheme " + m.path + " has d=" +
                                  std::to_string(s.dictionary_size()) +
                                  ", dataset has d=" + std::to_string(d));
    }
    if (std::abs(s.budget().epsilon() - budget.epsilon()) > 1e-12) {
      row.status = "epsilon_mismatch";
      return std::nullopt;
    }
    if (is_optimal_symmetric(s)) {
      set_int_theory(row, l2_of_k(d, budget, data.n, s.constant_support_size(), c.mode));
      return wss_from_scheme(std::move(s));
    }
    LinearMechanism lin(s.perturbation_matrix());
    set_int_theory(row, linear_variance(lin.p, lin.q, FrequencyVector::uniform(d), data.n,
                                        c.mode)
                            .sum());
    return lin;
  }
  throw std::invalid_argument("unknown mechanism '" + m.kind + "'");
}

}  // namespace

FrequencyVector zipf_distribution(int d, double exponent) {
  if (d < 1) throw std::invalid_argument("zipf_distribution needs d >= 1");
  Vector v(d);
  for (int x = 0; x < d; ++x) v[x] = std::pow(x + 1.0, -exponent);
  return FrequencyVector(v / v.sum());
}

Dataset sample_dataset(const FrequencyVector& dist, std::int64_t n, Rng& rng,
                       EstimationMode mode) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const int d = dist.size();
  Dataset out{{}, dist};
  out.values.reserve(static_cast<std::size_t>(n));
  if (mode == EstimationMode::kFrequency) {
    const auto counts = largest_remainder_counts(dist, n);
    Vector realized(d);
    for (int x = 0; x < d; ++x) {
      out.values.insert(out.values.end(), static_cast<std::size_t>(counts[x]), x);
      realized[x] = static_cast<double>(counts[x]) / static_cast<double>(n);
    }
    out.truth = FrequencyVector(realized / realized.sum());
    return out;
  }
  std::vector<double> cumulative(static_cast<std::size_t>(d));
  double acc = 0.0;
  int last_positive = 0;
  for (int x = 0; x < d; ++x) {
    acc += dist[x];
    cumulative[x] = acc;
    if (dist[x] > 0.0) last_positive = x;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const int x = internal::search_cumulative(cumulative, uniform_unit(rng) * acc);
    out.values.push_back(std::min(x, last_positive));
  }
  return out;
}

Transactions parse_transactions(std::string_view text,
                                std::optional<std::int64_t> max_objects) {
  Transactions t;
  std::unordered_map<std::uint64_t, int> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      const std::string_view tok = line.substr(i, j - i);
      std::uint64_t value = 0;
      bool ok = !tok.empty() && tok.size() <= 19;
      for (char ch : tok) {
        if (ch < '0' || ch > '9') {
          ok = false;
          break;
        }
        value = value * 10 + static_cast<std::uint64_t>(ch - '0');
      }
      if (!ok) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": unparsable token '" + std::string(tok) + "'");
      }
      if (max_objects && static_cast<std::int64_t>(t.objects.size()) >= *max_objects) {
        break;
      }
      auto [it, inserted] = ids.emplace(value, static_cast<int>(ids.size()));
      t.objects.push_back(it->second);
      i = j;
    }
    if (max_objects && static_cast<std::int64_t>(t.objects.size()) >= *max_objects) break;
    pos = end + 1;
  }
  if (t.objects.empty()) throw std::runtime_error("no objects in transaction data");
  t.d = static_cast<int>(ids.size());
  return t;
}

Transactions ingest_transactions(const std::string& path,
                                 std::optional<std::int64_t> max_objects) {
  return parse_transactions(read_file(path), max_objects);
}

FrequencyVector empirical_distribution(const std::vector<int>& objects, int d) {
  if (objects.empty()) throw std::invalid_argument("no objects");
  Vector v = Vector::Zero(d);
  for (int x : objects) {
    if (x < 0 || x >= d) throw std::out_of_range("object outside the dictionary");
    v[x] += 1.0;
  }
  return FrequencyVector(v / v.sum());
}

std::string MechanismSpec::label() const {
  if (kind == "scheme") {
    const auto slash = path.find_last_of('/');
    return "scheme:" + (slash == std::string::npos ? path : path.substr(slash + 1));
  }
  return kind;
}

ExperimentConfig parse_config(std::string_view json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig c;
  for (const json& m : j.at("mechanisms")) {
    if (m.is_string()) {
      const std::string kind = m.get<std::string>();
      if (kind != "ss" && kind != "ocms" && kind != "wss") {
        throw std::invalid_argument("unknown mechanism '" + kind + "'");
      }
      c.mechanisms.push_back({kind, ""});
    } else {
      c.mechanisms.push_back({"scheme", m.at("scheme_file").get<std::string>()});
    }
  }
  if (c.mechanisms.empty()) throw std::invalid_argument("no mechanisms configured");
  c.d = j.value("d", 0);
  c.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (c.epsilons.empty()) throw std::invalid_argument("no epsilons configured");
  for (double e : c.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("epsilons must be > 0");
  }
  c.n = j.value("n", std::int64_t{0});
  c.runs = j.at("runs").get<int>();
  if (c.runs < 1) throw std::invalid_argument("runs must be >= 1");
  c.seed = j.value("seed", std::uint64_t{0});
  c.mode = parse_estimation_mode(j.value("mode", std::string("distribution")));
  if (j.contains("dataset")) {
    const json& ds = j.at("dataset");
    c.dataset.kind = ds.at("type").get<std::string>();
    c.dataset.exponent = ds.value("exponent", 2.0);
    c.dataset.path = ds.value("path", std::string());
    if (ds.contains("max_objects")) c.dataset.max_objects = ds.at("max_objects").get<std::int64_t>();
  }
  if (c.dataset.kind != "file") {
    if (c.d < 2) throw std::invalid_argument("d must be >= 2");
    if (c.n < 1) throw std::invalid_argument("n must be >= 1");
  }
  c.output = j.value("output", std::string());
  c.threads = j.value("threads", 0);
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::uint64_t row_seed(std::uint64_t master, std::string_view label, double epsilon) {
  return derive_seed(master, {fnv1a(label.data(), label.size()),
                              std::bit_cast<std::uint64_t>(epsilon)});
}

LossReport run_experiment(const ExperimentConfig& config) {
  const Prepared data = prepare_dataset(config);
  if (data.d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  LossReport report;
  for (const MechanismSpec& m : config.mechanisms) {
    for (double eps : config.epsilons) {
      const PrivacyBudget budget(eps);
      LossRow row = blank_row(m, eps, data, config);
      std::optional<Mechanism> mech = build_row(m, budget, data, config, row);
      if (mech) {
        if (config.runs >= 2) {
          MonteCarloOptions opts;
          opts.mode = config.mode;
          opts.threads = config.threads;
          const MonteCarloResult r =
              monte_carlo_loss(*mech, data.truth, data.n, config.runs, row.seed, opts);
          row.l1_emp = r.mean_l1;
          row.l2_emp = r.mean_l2;
          row.l2_std = r.std_l2;
        } else {
          // A single run has no spread; report its losses with l2_std = 0.
          MonteCarloOptions opts;
          opts.mode = config.mode;
          opts.threads = 1;
          const MonteCarloResult r =
              monte_carlo_loss(*mech, data.truth, data.n, 2, row.seed, opts);
          row.l1_emp = r.per_run[0].l1;
          row.l2_emp = r.per_run[0].l2;
          row.l2_std = 0.0;
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const LossRow& a, const LossRow& b) {
                     if (a.mechanism != b.mechanism) return a.mechanism < b.mechanism;
                     return a.epsilon < b.epsilon;
                   });
  if (!config.output.empty()) write_report(report, config);
  return report;
}

std::string report_csv(const LossReport& report) {
  std::string out =
      "mechanism,epsilon,d,n,runs,l1_emp,l2_emp,l1_theory_int,l2_theory_int,"
      "l1_theory_real,l2_theory_real,l2_std,seed,status\n";
  for (const LossRow& r : report.rows) {
    out += r.mechanism + ',' + format_real(r.epsilon) + ',' + std::to_string(r.d) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.runs) + ',' +
           format_real(r.l1_emp) + ',' + format_real(r.l2_emp) + ',' +
           format_real(r.l1_theory_int) + ',' + format_real(r.l2_theory_int) + ',' +
           format_real(r.l1_theory_real) + ',' + format_real(r.l2_theory_real) + ',' +
           format_real(r.l2_std) + ',' + std::to_string(r.seed) + ',' + r.status + '\n';
  }
  return out;
}

std::string report_json(const LossReport& report, const ExperimentConfig& config) {
  json rows = json::array();
  for (const LossRow& r : report.rows) {
    rows.push_back({{"mechanism", r.mechanism},
                    {"epsilon", r.epsilon},
                    {"d", r.d},
                    {"n", r.n},
                    {"runs", r.runs},
                    {"l1_emp", real_or_null(r.l1_emp)},
                    {"l2_emp", real_or_null(r.l2_emp)},
                    {"l1_theory_int", real_or_null(r.l1_theory_int)},
                    {"l2_theory_int", real_or_null(r.l2_theory_int)},
                    {"l1_theory_real", real_or_null(r.l1_theory_real)},
                    {"l2_theory_real", real_or_null(r.l2_theory_real)},
                    {"l2_std", real_or_null(r.l2_std)},
                    {"seed", r.seed},
                    {"status", r.status}});
  }
  json mechs = json::array();
  for (const MechanismSpec& m : config.mechanisms) {
    if (m.kind == "scheme") {
      mechs.push_back({{"scheme_file", m.path}});
    } else {
      mechs.push_back(m.kind);
    }
  }
  json dataset = {{"type", config.dataset.kind}};
  if (config.dataset.kind == "zipf") dataset["exponent"] = config.dataset.exponent;
  if (config.dataset.kind == "file") {
    dataset["path"] = config.dataset.path;
    if (config.dataset.max_objects) dataset["max_objects"] = *config.dataset.max_objects;
  }
  json cfg = {{"mechanisms", mechs},
              {"d", config.d},
              {"epsilons", config.epsilons},
              {"n", config.n},
              {"runs", config.runs},
              {"seed", config.seed},
              {"mode", std::string(to_string(config.mode))},
              {"dataset", dataset},
              {"output", config.output}};
  return json{{"config", cfg}, {"rows", rows}}.dump(2) + "\n";
}

void write_report(const LossReport& report, const ExperimentConfig& config) {
  write_file(config.output, report_csv(report));
  std::string json_path = config.output;
  const auto dot = json_path.find_last_of('.');
  const auto slash = json_path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    json_path.resize(dot);
  }
  write_file(json_path + ".json", report_json(report, config));
}

}  // namespace ldpfreq
