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

#ifndef LDPFREQ_HARNESS_H_
#define LDPFREQ_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ldpfreq/core.h"
#include "ldpfreq/random.h"

namespace ldpfreq {

// values[x] proportional to (x + 1)^-exponent.
FrequencyVector zipf_distribution(int d, double exponent = 2.0);

struct Dataset {
  std::vector<int> values;
  // dist itself in distribution mode, the realized composition otherwise.
  FrequencyVector truth;
};

// Distribution mode: n i.i.d. draws. Frequency mode: the largest-remainder
// composition of n, ties to the lower index, in ascending value order.
Dataset sample_dataset(const FrequencyVector& dist, std::int64_t n, Rng& rng,
                       EstimationMode mode);

struct Transactions {
  std::vector<int> objects;
  int d = 0;
};

// Whitespace-separated nonnegative integer tokens, one object per token,
// ids compacted to [0, d) in order of first appearance. Blank lines are
// skipped. Throws std::runtime_error naming the line of a bad token.
Transactions ingest_transactions(const std::string& path,
                                 std::optional<std::int64_t> max_objects = std::nullopt);
Transactions parse_transactions(std::string_view text,
                                std::optional<std::int64_t> max_objects = std::nullopt);

FrequencyVector empirical_distribution(const std::vector<int>& objects, int d);

struct MechanismSpec {
  // "ss", "ocms", "wss" or "scheme".
  std::string kind;
  // Scheme file path for kind == "scheme".
  std::string path;

  std::string label() const;
};

struct DatasetSpec {
  // "zipf", "uniform" or "file".
  std::string kind = "zipf";
  double exponent = 2.0;
  std::string path;
  std::optional<std::int64_t> max_objects;
};

struct ExperimentConfig {
  std::vector<MechanismSpec> mechanisms;
  int d = 0;
  std::vector<double> epsilons;
  std::int64_t n = 0;
  int runs = 0;
  std::uint64_t seed = 0;
  EstimationMode mode = EstimationMode::kDistribution;
  DatasetSpec dataset;
  // CSV path; the JSON report goes next to it with a .json extension.
  // Empty: nothing is written.
  std::string output;
  int threads = 0;
};

// JSON schema mirrors ExperimentConfig field for field. mechanisms entries
// are strings or {"scheme_file": path}; dataset is {"type": ...}.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

struct LossRow {
  std::string mechanism;
  double epsilon;
  int d;
  std::int64_t n;
  int runs;
  double l1_emp;
  double l2_emp;
  double l1_theory_int;
  double l2_theory_int;
  double l1_theory_real;
  double l2_theory_real;
  double l2_std;
  std::uint64_t seed;
  // "ok", or a failure tag such as "construction_failed".
  std::string status;
};

struct LossReport {
  std::vector<LossRow> rows;
};

// Rows sorted by mechanism label, then epsilon. Per-row failures are
// recorded in the status column; I/O failures throw.
LossReport run_experiment(const ExperimentConfig& config);

std::string report_csv(const LossReport& report);
std::string report_json(const LossReport& report, const ExperimentConfig& config);
void write_report(const LossReport& report, const ExperimentConfig& config);

// Seed of the (mechanism, epsilon) row; runs derive from it by index.
std::uint64_t row_seed(std::uint64_t master, std::string_view label, double epsilon);

}  // namespace ldpfreq

#endif  // LDPFREQ_HARNESS_H_
