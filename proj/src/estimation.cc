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

#include "ldpfreq/estimation.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ldpfreq/linalg.h"

namespace ldpfreq {

void accumulate_subset(const std::vector<int>& subset, SupportCounts& counts) {
  for (int x : subset) ++counts.counts[static_cast<std::size_t>(x)];
  ++counts.n;
}

void accumulate_ocms(const OcmsScheme& scheme, const OcmsResponse& r,
                     SupportCounts& counts) {
  ocms_for_each_supported(scheme, r,
                          [&](int x) { ++counts.counts[static_cast<std::size_t>(x)]; });
  ++counts.n;
}

void accumulate_wss(const WssScheme& scheme, int response, SupportCounts& counts) {
  const BinaryMatrix& s = scheme.scheme.support();
  if (response < 0 || response >= s.rows()) {
    throw std::out_of_range("response index " + std::to_string(response) +
                            " outside the scheme");
  }
  for (Eigen::Index x = 0; x < s.cols(); ++x) {
    if (s(response, x)) ++counts.counts[static_cast<std::size_t>(x)];
  }
  ++counts.n;
}

SupportCounts aggregate_ss(const SubsetSelectionScheme& scheme,
                           const std::vector<std::uint64_t>& ranks) {
  SupportCounts counts(scheme.params.d);
  for (std::uint64_t code : ranks) {
    accumulate_subset(combination_unrank(code, scheme.params.d, scheme.params.k),
                      counts);
  }
  return counts;
}

SupportCounts aggregate_ocms(const OcmsScheme& scheme,
                             const std::vector<OcmsResponse>& responses) {
  SupportCounts counts(scheme.d);
  for (const OcmsResponse& r : responses) {
    if (r.a < 1 || r.a >= scheme.d_prime || r.b < 0 || r.b >= scheme.d_prime ||
        r.z < 0 || r.z >= scheme.B) {
      throw std::invalid_argument("undecodable sketch response");
    }
    accumulate_ocms(scheme, r, counts);
  }
  return counts;
}

SupportCounts aggregate_wss(const WssScheme& scheme, const std::vector<int>& responses) {
  SupportCounts counts(scheme.scheme.dictionary_size());
  for (int r : responses) accumulate_wss(scheme, r, counts);
  return counts;
}

EstimateVector estimate_symmetric(const SupportCounts& counts, double p_star,
                                  double q_star) {
  if (counts.n < 1) throw std::invalid_argument("no responses to estimate from");
  if (!(p_star > q_star)) throw std::invalid_argument("requires p* > q*");
  const double n = static_cast<double>(counts.n);
  const double gap = p_star - q_star;
  Vector f(static_cast<Eigen::Index>(counts.counts.size()));
  for (std::size_t x = 0; x < counts.counts.size(); ++x) {
    f[static_cast<Eigen::Index>(x)] = (counts.counts[x] / n - q_star) / gap;
  }
  return EstimateVector{std::move(f)};
}

EstimateVector estimate_symmetric(const SupportCounts& counts,
                                  const SchemeParams& params) {
  return estimate_symmetric(counts, params.p_star, params.q_star);
}

ReconstructionMatrix optimal_reconstruction(const PerturbationMatrix& p) {
  const Matrix& pm = p.entries();
  const int d = p.dictionary_size();
  const Vector pbar = pm.rowwise().sum() / d;
  if ((pbar.array() <= 0.0).any()) {
    throw std::domain_error("an output has zero probability under the uniform input");
  }
  const Matrix weighted = pm.transpose() * pbar.cwiseInverse().asDiagonal();
  const Matrix q = invert(weighted * pm) * weighted;
  const double err =
      (q * pm - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > 1e-8) {
    throw SingularMatrixError("reconstruction is ill-conditioned: |QP - I| = " +
                              std::to_string(err));
  }
  return ReconstructionMatrix{q};
}

EstimateVector linear_estimate(const ReconstructionMatrix& q, const Vector& output_freq) {
  if (q.entries.cols() != output_freq.size()) {
    throw std::invalid_argument("output frequency length does not match Q");
  }
  return EstimateVector{q.entries * output_freq};
}

Vector response_histogram(const std::vector<int>& responses, int m) {
  if (responses.empty()) throw std::invalid_argument("no responses");
  Vector h = Vector::Zero(m);
  for (int r : responses) {
    if (r < 0 || r >= m) throw std::out_of_range("response index outside [0, m)");
    h[r] += 1.0;
  }
  return h / static_cast<double>(responses.size());
}

Vector linear_variance(const PerturbationMatrix& p, const ReconstructionMatrix& q,
                       const FrequencyVector& truth, std::int64_t n,
                       EstimationMode mode) {
  const Matrix& pm = p.entries();
  if (q.entries.cols() != pm.rows() || q.entries.rows() != pm.cols() ||
      truth.size() != p.dictionary_size()) {
    throw std::invalid_argument("linear_variance: dimension mismatch");
  }
  if (n < 1) throw std::invalid_argument("dataset size n must be >= 1");
  const Vector& f = truth.values();
  Vector v = q.entries.cwiseProduct(q.entries) * (pm * f);
  if (mode == EstimationMode::kFrequency) {
    v -= f;
  } else {
    v -= f.cwiseProduct(f);
  }
  return v / static_cast<double>(n);
}

Losses empirical_losses(const EstimateVector& estimate, const FrequencyVector& truth) {
  if (estimate.values.size() != truth.size()) {
    throw std::invalid_argument("estimate and truth lengths differ");
  }
  const Vector diff = estimate.values - truth.values();
  return Losses{diff.cwiseAbs().sum(), diff.squaredNorm()};
}

LinearMechanism::LinearMechanism(PerturbationMatrix matrix)
    : p(std::move(matrix)), q(optimal_reconstruction(p)), sampler(p) {}

}  // namespace ldpfreq
