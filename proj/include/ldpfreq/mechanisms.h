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

#ifndef LDPFREQ_MECHANISMS_H_
#define LDPFREQ_MECHANISMS_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldpfreq/core.h"
#include "ldpfreq/random.h"

namespace ldpfreq {

// ---------------------------------------------------------------------------
// Subset selection

struct SubsetSelectionScheme {
  SchemeParams params;
};

// k defaults to optimal_support_size(d, budget).
SubsetSelectionScheme ss_new(int d, const PrivacyBudget& budget,
                             std::optional<int> k = std::nullopt);

// Reusable sampler. Keeps a permutation of the dictionary between calls so
// each draw costs O(k) instead of O(d). Not thread-safe; use one per thread.
class SubsetSampler {
 public:
  explicit SubsetSampler(const SubsetSelectionScheme& scheme);

  // Overwrites out with the k elements of one response, unordered.
  void sample(int x, Rng& rng, std::vector<int>& out);

  const SchemeParams& params() const { return params_; }

 private:
  void swap_slots(int i, int j);

  SchemeParams params_;
  std::vector<int> perm_;
  std::vector<int> pos_;
};

// One response as a sorted k-subset.
std::vector<int> ss_perturb(const SubsetSelectionScheme& scheme, int x, Rng& rng);

// ---------------------------------------------------------------------------
// Response encodings

// C(n, k) as an unsigned 64-bit integer; std::overflow_error if it does not fit.
std::uint64_t binomial(int n, int k);

// Colexicographic rank: rank({x_1 < ... < x_k}) = sum_i C(x_i, i).
std::uint64_t combination_rank(const std::vector<int>& subset, int d, int k);
std::vector<int> combination_unrank(std::uint64_t code, int d, int k);

bool is_prime(std::int64_t n);
// Smallest prime >= d, by trial division.
int next_prime(int d);

// ---------------------------------------------------------------------------
// Optimized count-mean sketch

struct OcmsScheme {
  int d;
  int d_prime;
  int B;
  PrivacyBudget budget;
  double p_true;
  double collision;
  double p_star;
  double q_star;
  double p_alpha;
  int k_hi;
  int k_lo;
};

OcmsScheme ocms_new(int d, const PrivacyBudget& budget);

struct OcmsResponse {
  std::int64_t a;  // in [1, d' - 1]
  std::int64_t b;  // in [0, d' - 1]
  int z;           // in [0, B - 1]
};

inline int ocms_hash(const OcmsScheme& s, std::int64_t a, std::int64_t b,
                     std::int64_t x) {
  return static_cast<int>(((a * x + b) % s.d_prime) % s.B);
}

OcmsResponse ocms_perturb(const OcmsScheme& scheme, int x, Rng& rng);

inline bool ocms_supports(const OcmsScheme& s, const OcmsResponse& r, int x) {
  return ocms_hash(s, r.a, r.b, x) == r.z;
}

// Calls fn(x) for every x in [0, d) supported by the response. Walks the
// preimage of bucket z through the inverse of x -> a x + b mod d', so the
// cost is O(d'/B) rather than O(d).
template <typename Fn>
void ocms_for_each_supported(const OcmsScheme& s, const OcmsResponse& r, Fn&& fn);

std::uint64_t ocms_pack(const OcmsScheme& scheme, const OcmsResponse& r);
OcmsResponse ocms_unpack(const OcmsScheme& scheme, std::uint64_t code);

// Mixture closed form p_alpha Var(k_hi) + (1 - p_alpha) Var(k_lo) over the
// extended dictionary d'. Throws std::domain_error when k_lo = 0.
double ocms_variance(const OcmsScheme& scheme, double f, std::int64_t n,
                     EstimationMode mode);
// Sum over the d real coordinates at the uniform frequency 1/d.
double ocms_l2(const OcmsScheme& scheme, std::int64_t n, EstimationMode mode);

// Every (a, b, z) as an explicit response row, restricted to the d real
// columns. Only for small d' (at most 64).
SupportScheme ocms_support_scheme(const OcmsScheme& scheme);

// ---------------------------------------------------------------------------
// Weighted subset selection

class ConstructionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WssOptions {
  int max_attempts = 20;
  // Distinct candidate subsets per attempt; 0 means d^2. Capped at C(d, k).
  int candidates = 0;
  double residual_tol = 1e-9;
  double prune_tol = 1e-12;
  double verify_tol = 1e-8;
};

struct WssScheme {
  SupportScheme scheme;
  SchemeParams params;
  // cumulative[x][o] = sum_{o' <= o} Pr(response o' | x).
  std::vector<std::vector<double>> cumulative;
  // Attempts used by wss_construct; 0 for schemes built from a file.
  int attempts = 0;
};

WssScheme wss_construct(int d, const PrivacyBudget& budget, int k, Rng& rng,
                        const WssOptions& options = {});

// Wraps an existing constant-support scheme. Throws std::invalid_argument if
// the support size varies.
WssScheme wss_from_scheme(SupportScheme scheme);

// Row index of the sampled response.
int wss_perturb(const WssScheme& scheme, int x, Rng& rng);

// ---------------------------------------------------------------------------
// Generic perturbation from an explicit matrix

class MatrixSampler {
 public:
  explicit MatrixSampler(const PerturbationMatrix& p);

  int sample(int x, Rng& rng) const;
  int responses() const { return responses_; }
  int dictionary_size() const { return static_cast<int>(cumulative_.size()); }

 private:
  int responses_;
  std::vector<std::vector<double>> cumulative_;
};

int perturb_from_matrix(const PerturbationMatrix& p, int x, Rng& rng);

// ---------------------------------------------------------------------------

namespace internal {
// Inverse of a modulo a prime p, 0 < a < p.
std::int64_t mod_inverse(std::int64_t a, std::int64_t p);
// Index of the first cumulative entry strictly above u, clamped to the last.
int search_cumulative(const std::vector<double>& cumulative, double u);
}  // namespace internal

template <typename Fn>
void ocms_for_each_supported(const OcmsScheme& s, const OcmsResponse& r, Fn&& fn) {
  const std::int64_t p = s.d_prime;
  const std::int64_t inv = internal::mod_inverse(r.a, p);
  for (std::int64_t y = r.z; y < p; y += s.B) {
    std::int64_t x = ((y - r.b) % p + p) % p;
    x = (x * inv) % p;
    if (x < s.d) fn(static_cast<int>(x));
  }
}

}  // namespace ldpfreq

#endif  // LDPFREQ_MECHANISMS_H_
