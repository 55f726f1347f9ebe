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

#ifndef LDPFREQ_THEORY_H_
#define LDPFREQ_THEORY_H_

#include <cstdint>

#include "ldpfreq/core.h"

namespace ldpfreq {

// p* = e^eps k / (k(e^eps - 1) + d),
// q* = (e^eps - 1) k (k - 1) / ((d - 1)(k(e^eps - 1) + d)) + k / (k(e^eps - 1) + d).
// Requires d >= 2 and 1 <= k <= d - 1.
SchemeParams scheme_params(int d, const PrivacyBudget& budget, int k);

// Variance of the affine symmetric estimator for one coordinate with true
// frequency f, written in p*, q*:
//   q*(1 - q*) / (n (p* - q*)^2) + f (1 - p* - q*) / (n (p* - q*)),
// plus (f - f^2) / n in distribution mode.
double symmetric_variance(double f, double p_star, double q_star, std::int64_t n,
                          EstimationMode mode);

// The same variance written directly in (d, eps, k) for an optimal
// symmetric configuration.
double osc_variance(double f, int d, const PrivacyBudget& budget, int k,
                    std::int64_t n, EstimationMode mode);

// Worst-case L2 of an optimal symmetric configuration with support size k
// (attained at the uniform frequency vector).
double l2_of_k(int d, const PrivacyBudget& budget, std::int64_t n, int k,
               EstimationMode mode);

// Integer support size minimising l2_of_k: the better of floor/ceil of
// d / (e^eps + 1), or 1 when that ratio is <= 1. Ties go to the smaller k.
int optimal_support_size(int d, const PrivacyBudget& budget);

// Strict L2 lower bound. integer_k = false gives the real-k closed form,
// true gives l2_of_k at optimal_support_size.
double l2_star(int d, const PrivacyBudget& budget, std::int64_t n,
               EstimationMode mode, bool integer_k);

// sqrt(2 d L2 / pi), the asymptotic L1 of a permutation-symmetric estimator.
double l1_from_l2(int d, double l2);

double l1_star(int d, const PrivacyBudget& budget, std::int64_t n,
               EstimationMode mode, bool integer_k);

struct LossBound {
  double l1;
  double l2;
  EstimationMode mode;
  std::int64_t n;
  // Real-valued d/(e^eps+1) (or 1 on the small-d branch) for the real-k
  // bound; the optimal integer for the integer-k bound.
  double k_used;
};

LossBound optimal_loss_bound(int d, const PrivacyBudget& budget, std::int64_t n,
                             EstimationMode mode, bool integer_k);

// Relative L2 excess bound for rounding k to a nearby integer.
// Requires d >= e^eps + 1.
double rounding_deviation_alpha(int d, const PrivacyBudget& budget);

struct DeviationFactors {
  double alpha;
  double beta;
  // (1 + alpha)(1 + beta) - 1
  double product_excess;
};

// L2 excess factors of the count-mean sketch with dictionary extended to
// d_prime >= d. Requires d > e^eps + 1.
DeviationFactors ocms_deviation_factors(int d, int d_prime,
                                        const PrivacyBudget& budget);

struct FisherBound {
  double l2;
  double l1;
};

// Cramer-Rao style bounds for distribution estimation at theta:
//   l2 = (1/n) [Tr((P^T diag(P theta)^-1 P)^-1) - theta^T theta]
//   l1 = sum_x sqrt(2/(n pi) (I+)_xx), I+ = (P^T diag(P theta)^-1 P)^-1 - theta theta^T
FisherBound fisher_lower_bound(const PerturbationMatrix& p,
                               const FrequencyVector& theta, std::int64_t n);

// log2(d(d-1)/2 + 1): bits per response needed by some optimal estimator.
double comm_bound_bits(int d);

}  // namespace ldpfreq

#endif  // LDPFREQ_THEORY_H_
