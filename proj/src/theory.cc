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

#include "ldpfreq/theory.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ldpfreq/linalg.h"

namespace ldpfreq {
namespace {

void check_support_size(int d, int k) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  if (k < 1 || k > d - 1) {
    throw std::invalid_argument("support size k=" + std::to_string(k) +
                                " outside [1, d-1] for d=" + std::to_string(d));
  }
}

void check_n(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("dataset size n must be >= 1");
}

double sampling_term(double f, std::int64_t n, EstimationMode mode) {
  return mode == EstimationMode::kDistribution ? (f - f * f) / n : 0.0;
}

}  // namespace

SchemeParams scheme_params(int d, const PrivacyBudget& budget, int k) {
  check_support_size(d, k);
  const double e = budget.e_eps();
  const double denom = k * (e - 1.0) + d;
  const double p = e * k / denom;
  const double q = (e - 1.0) * k * (k - 1.0) / ((d - 1.0) * denom) + k / denom;
  return SchemeParams{d, k, budget, p, q};
}

double symmetric_variance(double f, double p_star, double q_star, std::int64_t n,
                          EstimationMode mode) {
  check_n(n);
  if (!(p_star > q_star)) throw std::invalid_argument("requires p* > q*");
  const double gap = p_star - q_star;
  return q_star * (1.0 - q_star) / (n * gap * gap) +
         f * (1.0 - p_star - q_star) / (n * gap) + sampling_term(f, n, mode);
}

double osc_variance(double f, int d, const PrivacyBudget& budget, int k,
                    std::int64_t n, EstimationMode mode) {
  check_support_size(d, k);
  check_n(n);
  if (f < 0.0 || f > 1.0) throw std::invalid_argument("frequency outside [0, 1]");
  const double em1 = budget.e_eps() - 1.0;
  const double ke = k * em1;
  const double base = (ke + d - 1.0) * (ke + d - budget.e_eps()) /
                      (static_cast<double>(n) * k * (d - k) * em1 * em1);
  const double slope = ((d - 1.0) * (d - 2.0 * k) - em1 * k * (k - 1.0)) /
                       (static_cast<double>(n) * k * em1 * (d - k));
  return base + f * slope + sampling_term(f, n, mode);
}

double l2_of_k(int d, const PrivacyBudget& budget, std::int64_t n, int k,
               EstimationMode mode) {
  // d identical coordinates at f = 1/d.
  return d * osc_variance(1.0 / d, d, budget, k, n, mode);
}

int optimal_support_size(int d, const PrivacyBudget& budget) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  const double ratio = d / (budget.e_eps() + 1.0);
  if (ratio <= 1.0) return 1;
  const int lo = std::clamp(static_cast<int>(std::floor(ratio)), 1, d - 1);
  const int hi = std::clamp(static_cast<int>(std::ceil(ratio)), 1, d - 1);
  if (lo == hi) return lo;
  const double l_lo = l2_of_k(d, budget, 1, lo, EstimationMode::kFrequency);
  const double l_hi = l2_of_k(d, budget, 1, hi, EstimationMode::kFrequency);
  return l_hi < l_lo ? hi : lo;
}

double l2_star(int d, const PrivacyBudget& budget, std::int64_t n,
               EstimationMode mode, bool integer_k) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  check_n(n);
  if (integer_k) {
    return l2_of_k(d, budget, n, optimal_support_size(d, budget), mode);
  }
  const double e = budget.e_eps();
  const double em1 = e - 1.0;
  double bound;
  if (d >= e + 1.0) {
    bound = (d - 1.0) * (4.0 * d * e - (e + 1.0) * (e + 1.0)) /
            (static_cast<double>(n) * d * em1 * em1);
  } else {
    bound = (d - 1.0) * (d + 2.0 * e - 2.0) / (static_cast<double>(n) * em1 * em1);
  }
  if (mode == EstimationMode::kDistribution) bound += (1.0 - 1.0 / d) / n;
  return bound;
}

double l1_from_l2(int d, double l2) {
  return std::sqrt(2.0 * d * l2 / std::numbers::pi);
}

double l1_star(int d, const PrivacyBudget& budget, std::int64_t n,
               EstimationMode mode, bool integer_k) {
  return l1_from_l2(d, l2_star(d, budget, n, mode, integer_k));
}

LossBound optimal_loss_bound(int d, const PrivacyBudget& budget, std::int64_t n,
                             EstimationMode mode, bool integer_k) {
  const double l2 = l2_star(d, budget, n, mode, integer_k);
  double k_used;
  if (integer_k) {
    k_used = optimal_support_size(d, budget);
  } else {
    k_used = std::max(1.0, d / (budget.e_eps() + 1.0));
  }
  return LossBound{l1_from_l2(d, l2), l2, mode, n, k_used};
}

double rounding_deviation_alpha(int d, const PrivacyBudget& budget) {
  const double e = budget.e_eps();
  if (d < e + 1.0) {
    throw std::domain_error("rounding deviation requires d >= e^eps + 1");
  }
  const double e1 = e + 1.0;
  // Rounding down by one half is the larger of the two deviations.
  return (d - 1.0) * std::pow(e1, 4) /
         ((2.0 * d - e1) * (2.0 * d * e + e1) * (4.0 * d * e - e1 * e1));
}

DeviationFactors ocms_deviation_factors(int d, int d_prime,
                                        const PrivacyBudget& budget) {
  const double e = budget.e_eps();
  if (d < 2 || d_prime < d) {
    throw std::invalid_argument("requires d_prime >= d >= 2");
  }
  if (!(d > e + 1.0)) {
    throw std::domain_error("deviation factors require d > e^eps + 1");
  }
  const double e1 = e + 1.0;
  const double core = 4.0 * d * e - e1 * e1;
  const double alpha =
      (d - 1.0) * std::pow(e1, 4) / (core * (d - e1) * (d * e + e1));
  const double dp = d_prime;
  const double beta = (dp - d) * e1 * e1 * (2.0 * d * dp - d - dp) /
                      (dp * dp * (d - 1.0) * core);
  return DeviationFactors{alpha, beta, (1.0 + alpha) * (1.0 + beta) - 1.0};
}

FisherBound fisher_lower_bound(const PerturbationMatrix& p,
                               const FrequencyVector& theta, std::int64_t n) {
  check_n(n);
  const Matrix& pm = p.entries();
  if (theta.size() != p.dictionary_size()) {
    throw std::invalid_argument("theta length does not match the dictionary size");
  }
  const Vector out = pm * theta.values();
  if ((out.array() <= 0.0).any()) {
    throw std::domain_error("an output has zero probability under theta");
  }
  const Matrix info = pm.transpose() * out.cwiseInverse().asDiagonal() * pm;
  const Matrix info_inv = invert(info);
  const Matrix pseudo = info_inv - theta.values() * theta.values().transpose();
  FisherBound bound{pseudo.trace() / n, 0.0};
  for (Eigen::Index x = 0; x < pseudo.rows(); ++x) {
    // Clamp tiny negative round-off on the diagonal.
    const double v = std::max(0.0, pseudo(x, x));
    bound.l1 += std::sqrt(2.0 * v / (static_cast<double>(n) * std::numbers::pi));
  }
  return bound;
}

double comm_bound_bits(int d) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  const double dd = d;
  return std::log2(dd * (dd - 1.0) / 2.0 + 1.0);
}

}  // namespace ldpfreq
