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

#ifndef LDPFREQ_ORACLE_H_
#define LDPFREQ_ORACLE_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "ldpfreq/core.h"
#include "ldpfreq/estimation.h"
#include "ldpfreq/mechanisms.h"

namespace ldpfreq {

// Every k-subset of [0, d) as a response, uniform base probability
// d / (C(d, k) (k(e^eps - 1) + d)). Limited to C(d, k) <= 1e6.
SupportScheme full_subset_scheme(int d, int k, const PrivacyBudget& budget);

struct SymmetryReport {
  double measured_p_star;
  double measured_q_star;
  double max_self_deviation;
  double max_pair_deviation;
};

// Self-support e^eps sum_o S(o,x) p_o per x, and cross-support
// (e^eps - 1) sum_o S(o,i) S(o,j) p_o + sum_o S(o,j) p_o per ordered pair.
// Deviations are taken against reference values when given, otherwise
// against the measured means.
SymmetryReport verify_symmetric(const SupportScheme& scheme,
                                std::optional<double> p_ref = std::nullopt,
                                std::optional<double> q_ref = std::nullopt);

// (1/d!) sum over permutation matrices Z of Z^T A Z. Requires d <= 6.
Matrix permutation_average(const Matrix& a);

struct UrpVariance {
  Vector variance;
  // Mean diagonal and mean off-diagonal of (Q o Q) P.
  double alpha;
  double beta;
};

// Exact average of linear_variance(P Z, Z^T Q) over all d! relabelings.
UrpVariance urp_exact_variance(const PerturbationMatrix& p,
                               const ReconstructionMatrix& q,
                               const FrequencyVector& truth, std::int64_t n,
                               EstimationMode mode);

struct HashCensus {
  int d_prime;
  int B;
  std::int64_t functions;  // d'(d' - 1)
  // Number of (a, b) with h(x1) = h(x2), identical for every ordered pair
  // x1 != x2 when pair_uniform holds.
  std::int64_t collisions_per_pair;
  double collision;
  std::vector<int> bucket_sizes;
  // Every ordered input pair reaches every ordered pair of distinct values
  // of (a x + b) mod d' exactly once.
  bool pairwise_distinct;
  bool pair_uniform;
};

// Exhaustive over all d'(d' - 1) hash functions; O(d'^4). Requires d' prime
// and d' <= 200.
HashCensus hash_family_census(int d_prime, int B);

// Exact composition of n objects following dist: floor(n f) plus the
// leftover units to the largest remainders, ties to the lower index.
std::vector<std::int64_t> largest_remainder_counts(const FrequencyVector& dist,
                                                   std::int64_t n);

// Cyclic-orbit extremal scheme: every orbit {T + s mod d : s in [0, d)} of
// a base subset T enters with a relative weight. Each value lies in |T| of
// the d shifts, so the column identity holds after one global rescale.
SupportScheme orbit_scheme(int d,
                           const std::vector<std::pair<std::vector<int>, double>>& orbits,
                           const PrivacyBudget& budget);

// orbit_scheme over `orbits` random nonempty proper subsets with random
// weights in [0.1, 1).
SupportScheme random_orbit_scheme(int d, int orbits, const PrivacyBudget& budget, Rng& rng);

// Strictly positive column-stochastic m x d matrix, entries before
// normalization uniform in [0.05, 1).
PerturbationMatrix random_perturbation_matrix(int d, int m, Rng& rng);

using Mechanism =
    std::variant<SubsetSelectionScheme, OcmsScheme, WssScheme, LinearMechanism>;

struct MonteCarloOptions {
  EstimationMode mode = EstimationMode::kDistribution;
  // 0: LDPFREQ_THREADS if set, else the hardware concurrency.
  int threads = 0;
  bool keep_estimates = false;
};

struct MonteCarloResult {
  double mean_l1;
  double mean_l2;
  double std_l2;
  std::vector<Losses> per_run;
  // Filled when keep_estimates is set, one per run.
  std::vector<EstimateVector> estimates;
  // Truth each run was scored against (the realized composition in
  // frequency mode).
  FrequencyVector scored_truth;
};

// Run r draws from the stream derive_seed(seed, {r}), so the result does not
// depend on the number of worker threads.
MonteCarloResult monte_carlo_loss(const Mechanism& mechanism,
                                  const FrequencyVector& truth, std::int64_t n,
                                  int runs, std::uint64_t seed,
                                  const MonteCarloOptions& options = {});

// Worker count for parallel runs, honoring LDPFREQ_THREADS.
int worker_count(int requested, int jobs);

}  // namespace ldpfreq

#endif  // LDPFREQ_ORACLE_H_
