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

#ifndef LDPFREQ_CORE_H_
#define LDPFREQ_CORE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ldpfreq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Binary support matrices, rows are responses and columns dictionary values.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Tolerances used by invariant checks. Probabilities are never compared for
// exact equality.
inline constexpr double kColumnSumTolerance = 1e-9;
inline constexpr double kFrequencySumTolerance = 1e-12;

enum class EstimationMode { kFrequency, kDistribution };

std::string_view to_string(EstimationMode mode);
// Accepts "frequency" or "distribution".
EstimationMode parse_estimation_mode(std::string_view text);

// The privacy parameter epsilon together with its exponential.
class PrivacyBudget {
 public:
  explicit PrivacyBudget(double epsilon);

  double epsilon() const { return epsilon_; }
  double e_eps() const { return e_eps_; }

 private:
  double epsilon_;
  double e_eps_;
};

// (d, k, epsilon, p*, q*) for an optimal symmetric configuration. Built by
// scheme_params(); the fields are checked there.
struct SchemeParams {
  int d;
  int k;
  PrivacyBudget budget;
  double p_star;
  double q_star;
};

// Column-stochastic m x d matrix, entry (o, x) = Pr(M(x) = o).
class PerturbationMatrix {
 public:
  explicit PerturbationMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  int responses() const { return static_cast<int>(entries_.rows()); }
  int dictionary_size() const { return static_cast<int>(entries_.cols()); }

 private:
  Matrix entries_;
};

struct LdpReport {
  bool satisfied;
  // max over rows of max_x P(o,x) / min_x P(o,x); +inf if a row has zeros.
  double worst_ratio;
  int worst_row;
};

// epsilon-LDP predicate. A row of zeros is rejected with an exception,
// a row with some zero entries reports an infinite ratio.
LdpReport validate_ldp(const PerturbationMatrix& p, const PrivacyBudget& budget);

// Extremal-configuration representation: P = diag(p_o) [(e^eps - 1) S + J].
class SupportScheme {
 public:
  // Validates the per-column total-probability identity.
  SupportScheme(BinaryMatrix support, Vector base_prob, PrivacyBudget budget);

  // Skips the identity check. For diagnostics on deliberately broken input.
  static SupportScheme unchecked(BinaryMatrix support, Vector base_prob,
                                 PrivacyBudget budget);

  const BinaryMatrix& support() const { return support_; }
  const Vector& base_prob() const { return base_prob_; }
  const PrivacyBudget& budget() const { return budget_; }
  int responses() const { return static_cast<int>(support_.rows()); }
  int dictionary_size() const { return static_cast<int>(support_.cols()); }

  // Row sums k_o.
  Eigen::VectorXi support_sizes() const;
  // The common k_o, or 0 if the support size varies across responses.
  int constant_support_size() const;
  // max_x |(e^eps - 1) sum_o S(o,x) p_o + sum_o p_o - 1|.
  double column_identity_error() const;
  // sum_o S(o,x) p_o for every x.
  Vector support_mass() const;

  PerturbationMatrix perturbation_matrix() const;

 private:
  struct NoCheck {};
  SupportScheme(BinaryMatrix support, Vector base_prob, PrivacyBudget budget,
                NoCheck);

  BinaryMatrix support_;
  Vector base_prob_;
  PrivacyBudget budget_;
};

// A point of the probability simplex.
class FrequencyVector {
 public:
  explicit FrequencyVector(Vector values);

  const Vector& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int x) const { return values_[x]; }

  static FrequencyVector uniform(int d);

 private:
  Vector values_;
};

// Unbiased estimate; entries may be negative and are never clipped.
struct EstimateVector {
  Vector values;
};

// counts[x] = number of responses supporting x, n = number of responses.
struct SupportCounts {
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;

  explicit SupportCounts(int d = 0) : counts(static_cast<std::size_t>(d), 0) {}

  SupportCounts& operator+=(const SupportCounts& other);
};

// Scheme files: {d, epsilon, k, responses: [{support: [...], base_prob}]}
// with 0-based element ids; k is 0 when the support size is not constant.
std::string serialize_scheme(const SupportScheme& scheme);
SupportScheme parse_scheme(std::string_view json_text);
void save_scheme(const SupportScheme& scheme, const std::string& path);
SupportScheme load_scheme(const std::string& path);

}  // namespace ldpfreq

#endif  // LDPFREQ_CORE_H_
