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

#ifndef LDPFREQ_ESTIMATION_H_
#define LDPFREQ_ESTIMATION_H_

#include <cstdint>
#include <vector>

#include "ldpfreq/core.h"
#include "ldpfreq/mechanisms.h"

namespace ldpfreq {

// Generic aggregation: counts[x] = #{responses r : supports(r, x)}.
template <typename Response, typename Pred>
SupportCounts aggregate_counts(Pred&& supports,
                               const std::vector<Response>& responses, int d) {
  SupportCounts counts(d);
  for (const Response& r : responses) {
    for (int x = 0; x < d; ++x) {
      if (supports(r, x)) ++counts.counts[static_cast<std::size_t>(x)];
    }
  }
  counts.n = static_cast<std::int64_t>(responses.size());
  return counts;
}

// Per-response accumulators used on the hot path. Each adds one response.
void accumulate_subset(const std::vector<int>& subset, SupportCounts& counts);
void accumulate_ocms(const OcmsScheme& scheme, const OcmsResponse& r,
                     SupportCounts& counts);
void accumulate_wss(const WssScheme& scheme, int response, SupportCounts& counts);

// Stream aggregators over encoded responses.
SupportCounts aggregate_ss(const SubsetSelectionScheme& scheme,
                           const std::vector<std::uint64_t>& ranks);
SupportCounts aggregate_ocms(const OcmsScheme& scheme,
                             const std::vector<OcmsResponse>& responses);
SupportCounts aggregate_wss(const WssScheme& scheme, const std::vector<int>& responses);

// f(x) = (counts[x] / n - q*) / (p* - q*).
EstimateVector estimate_symmetric(const SupportCounts& counts, double p_star,
                                  double q_star);
EstimateVector estimate_symmetric(const SupportCounts& counts,
                                  const SchemeParams& params);

// d x m left inverse of P.
struct ReconstructionMatrix {
  Matrix entries;
};

// Q* = (P^T Pbar^-1 P)^-1 P^T Pbar^-1 with Pbar = diag(P 1/d). Throws
// SingularMatrixError if P is not of full column rank.
ReconstructionMatrix optimal_reconstruction(const PerturbationMatrix& p);

EstimateVector linear_estimate(const ReconstructionMatrix& q, const Vector& output_freq);

// Empirical output frequencies from a stream of row indices.
Vector response_histogram(const std::vector<int>& responses, int m);

// Per-coordinate variance (1/n)[(Q o Q) P f - f] (frequency mode) or
// (1/n)[(Q o Q) P theta - theta^2] (distribution mode).
Vector linear_variance(const PerturbationMatrix& p, const ReconstructionMatrix& q,
                       const FrequencyVector& truth, std::int64_t n,
                       EstimationMode mode);

struct Losses {
  double l1;
  double l2;
};

Losses empirical_losses(const EstimateVector& estimate, const FrequencyVector& truth);

// Explicit-matrix mechanism: sample from P, reconstruct with Q*.
struct LinearMechanism {
  PerturbationMatrix p;
  ReconstructionMatrix q;
  MatrixSampler sampler;

  explicit LinearMechanism(PerturbationMatrix matrix);
};

}  // namespace ldpfreq

#endif  // LDPFREQ_ESTIMATION_H_
