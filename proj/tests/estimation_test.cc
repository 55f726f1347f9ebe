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

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "ldpfreq/linalg.h"
#include "ldpfreq/oracle.h"
#include "ldpfreq/theory.h"

namespace ldpfreq {
namespace {

const PrivacyBudget kLn3(std::log(3.0));

PerturbationMatrix binary_rr() {
  Matrix rr(2, 2);
  rr << 0.75, 0.25, 0.25, 0.75;
  return PerturbationMatrix(rr);
}

TEST(AggregateTest, SubsetMembership) {
  const std::vector<std::vector<int>> responses = {{0, 1}, {1, 2}};
  const SupportCounts c = aggregate_counts(
      [](const std::vector<int>& r, int x) {
        return std::find(r.begin(), r.end(), x) != r.end();
      },
      responses, 4);
  EXPECT_EQ(c.counts, (std::vector<std::int64_t>{1, 2, 1, 0}));
  EXPECT_EQ(c.n, 2);

  const SubsetSelectionScheme s = ss_new(4, kLn3, 2);
  const SupportCounts ranked =
      aggregate_ss(s, {combination_rank({0, 1}, 4, 2), combination_rank({1, 2}, 4, 2)});
  EXPECT_EQ(ranked.counts, c.counts);
  EXPECT_EQ(ranked.n, 2);
}

TEST(AggregateTest, SketchBuckets) {
  // d' = 7, B = 4: x mod 7 mod 4 = 0 for x in {0, 4}.
  const OcmsScheme s = ocms_new(6, kLn3);
  const SupportCounts c = aggregate_ocms(s, {{1, 0, 0}});
  EXPECT_EQ(c.counts, (std::vector<std::int64_t>{1, 0, 0, 0, 1, 0}));
  EXPECT_THROW(aggregate_ocms(s, {{0, 0, 0}}), std::invalid_argument);
}

TEST(AggregateTest, Empty) {
  const SupportCounts c =
      aggregate_counts([](int, int) { return true; }, std::vector<int>{}, 3);
  EXPECT_EQ(c.counts, (std::vector<std::int64_t>{0, 0, 0}));
  EXPECT_EQ(c.n, 0);
}

TEST(AggregateTest, ShardsSum) {
  const OcmsScheme s = ocms_new(30, PrivacyBudget(1.0));
  Rng rng(5);
  std::vector<OcmsResponse> all;
  for (int i = 0; i < 500; ++i) all.push_back(ocms_perturb(s, i % 30, rng));
  SupportCounts left = aggregate_ocms(s, {all.begin(), all.begin() + 200});
  left += aggregate_ocms(s, {all.begin() + 200, all.end()});
  const SupportCounts whole = aggregate_ocms(s, all);
  EXPECT_EQ(left.counts, whole.counts);
  EXPECT_EQ(left.n, whole.n);
  const SupportCounts slow =
      aggregate_counts([&](const OcmsResponse& r, int x) { return ocms_supports(s, r, x); },
                       all, 30);
  EXPECT_EQ(slow.counts, whole.counts);
}

TEST(EstimateSymmetricTest, Examples) {
  SupportCounts c(2);
  c.counts = {60, 40};
  c.n = 100;
  const EstimateVector e = estimate_symmetric(c, 0.75, 0.25);
  EXPECT_NEAR(e.values[0], 0.7, 1e-15);
  EXPECT_NEAR(e.values[1], 0.3, 1e-15);
  c.counts = {25, 75};
  const EstimateVector f = estimate_symmetric(c, 0.75, 0.25);
  EXPECT_NEAR(f.values[0], 0.0, 1e-15);
  EXPECT_NEAR(f.values[1], 1.0, 1e-15);
}

TEST(EstimateSymmetricTest, Errors) {
  SupportCounts c(2);
  EXPECT_THROW(estimate_symmetric(c, 0.75, 0.25), std::invalid_argument);
  c.n = 1;
  EXPECT_THROW(estimate_symmetric(c, 0.25, 0.25), std::invalid_argument);
}

TEST(EstimateSymmetricTest, SumsToOneForConstantSupport) {
  Rng rng(3);
  for (auto [d, eps] : {std::pair{10, 1.0}, {50, 0.5}, {7, 3.0}}) {
    const SubsetSelectionScheme s = ss_new(d, PrivacyBudget(eps));
    SubsetSampler sampler(s);
    std::vector<int> buf;
    for (int t = 0; t < 20; ++t) {
      SupportCounts c(d);
      const int n = 1 + static_cast<int>(uniform_below(rng, 300));
      for (int i = 0; i < n; ++i) {
        sampler.sample(static_cast<int>(uniform_below(rng, d)), rng, buf);
        accumulate_subset(buf, c);
      }
      EXPECT_NEAR(estimate_symmetric(c, s.params).values.sum(), 1.0, 1e-9);
    }
  }
}

TEST(ReconstructionTest, SquareIsInverse) {
  const ReconstructionMatrix q = optimal_reconstruction(binary_rr());
  Matrix want(2, 2);
  want << 1.5, -0.5, -0.5, 1.5;
  EXPECT_LE((q.entries - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReconstructionTest, LeftInverseAndMinimalNorm) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 4;
    const int m = d + 1 + t % 5;
    const PerturbationMatrix p = random_perturbation_matrix(d, m, rng);
    const ReconstructionMatrix q = optimal_reconstruction(p);
    const Matrix& pm = p.entries();
    EXPECT_LE((q.entries * pm - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-8);
    const Vector sqrt_pbar = (pm.rowwise().sum() / d).cwiseSqrt();
    const double best = (q.entries * sqrt_pbar.asDiagonal()).squaredNorm();
    // Rows of N in the left null space of P keep QP = I.
    const Matrix proj =
        Matrix::Identity(m, m) - pm * invert(pm.transpose() * pm) * pm.transpose();
    for (int r = 0; r < 5; ++r) {
      const Matrix n = Matrix::NullaryExpr(d, m, [&] { return uniform_unit(rng) - 0.5; }) * proj;
      const Matrix other = q.entries + n;
      ASSERT_LE((other * pm - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_GE((other * sqrt_pbar.asDiagonal()).squaredNorm(), best - 1e-12);
    }
  }
}

TEST(ReconstructionTest, RankDeficientRejected) {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(optimal_reconstruction(PerturbationMatrix(m)), SingularMatrixError);
}

TEST(LinearEstimateTest, Examples) {
  Vector f(3);
  f << 0.2, 0.3, 0.5;
  EXPECT_EQ(linear_estimate(ReconstructionMatrix{Matrix::Identity(3, 3)}, f).values, f);
  const ReconstructionMatrix q = optimal_reconstruction(binary_rr());
  Vector out(2);
  out << 0.6, 0.4;
  const EstimateVector e = linear_estimate(q, out);
  EXPECT_NEAR(e.values[0], 0.7, 1e-12);
  EXPECT_NEAR(e.values[1], 0.3, 1e-12);
  Rng rng(2);
  const PerturbationMatrix p = random_perturbation_matrix(4, 9, rng);
  Vector truth(4);
  truth << 0.1, 0.2, 0.3, 0.4;
  EXPECT_LE((linear_estimate(optimal_reconstruction(p), p.entries() * truth).values - truth)
                .cwiseAbs()
                .maxCoeff(),
            1e-10);
  EXPECT_THROW(linear_estimate(q, Vector::Ones(3)), std::invalid_argument);
}

TEST(LinearVarianceTest, Examples) {
  const PerturbationMatrix p = binary_rr();
  const ReconstructionMatrix q = optimal_reconstruction(p);
  const FrequencyVector half = FrequencyVector::uniform(2);
  const Vector vf = linear_variance(p, q, half, 1, EstimationMode::kFrequency);
  EXPECT_NEAR(vf[0], 0.75, 1e-12);
  EXPECT_NEAR(vf[1], 0.75, 1e-12);
  const Vector vd = linear_variance(p, q, half, 1, EstimationMode::kDistribution);
  EXPECT_NEAR(vd[0], 1.0, 1e-12);
  EXPECT_NEAR(vd[1], 1.0, 1e-12);
  const Vector v10 = linear_variance(p, q, half, 10, EstimationMode::kFrequency);
  EXPECT_NEAR(v10[0], vf[0] / 10, 1e-15);
  EXPECT_THROW(linear_variance(p, q, FrequencyVector::uniform(3), 1, EstimationMode::kFrequency),
               std::invalid_argument);
}

TEST(EmpiricalLossTest, Examples) {
  Vector e(2), t(2);
  e << 0.7, 0.3;
  t << 0.5, 0.5;
  Losses l = empirical_losses(EstimateVector{e}, FrequencyVector(t));
  EXPECT_NEAR(l.l1, 0.4, 1e-15);
  EXPECT_NEAR(l.l2, 0.08, 1e-15);
  l = empirical_losses(EstimateVector{t}, FrequencyVector(t));
  EXPECT_EQ(l.l1, 0.0);
  EXPECT_EQ(l.l2, 0.0);
  e << 1.1, -0.1;
  t << 1.0, 0.0;
  l = empirical_losses(EstimateVector{e}, FrequencyVector(t));
  EXPECT_NEAR(l.l1, 0.2, 1e-15);
  EXPECT_NEAR(l.l2, 0.02, 1e-15);
  EXPECT_THROW(empirical_losses(EstimateVector{Vector::Ones(3)}, FrequencyVector(t)),
               std::invalid_argument);
}

TEST(EquivalenceTest, FullSubsetLinearMatchesSymmetric) {
  for (auto [d, k] : {std::pair{4, 2}, {5, 2}, {6, 3}, {5, 1}}) {
    const SupportScheme scheme = full_subset_scheme(d, k, kLn3);
    const LinearMechanism lin(scheme.perturbation_matrix());
    const WssScheme sym = wss_from_scheme(scheme);
    Rng rng(d * 10 + k);
    std::vector<int> responses;
    for (int i = 0; i < 2000; ++i) {
      responses.push_back(lin.sampler.sample(static_cast<int>(uniform_below(rng, d)), rng));
    }
    const EstimateVector a = linear_estimate(lin.q, response_histogram(responses, scheme.responses()));
    const EstimateVector b = estimate_symmetric(aggregate_wss(sym, responses), sym.params);
    EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
  }
}

// Sample variance of each estimate coordinate over many trials with a fixed
// composition, against linear_variance.
template <typename Estimate>
void check_variance(const PerturbationMatrix& p, const ReconstructionMatrix& q,
                    const FrequencyVector& truth, int n, Estimate&& estimate) {
  const int d = p.dictionary_size();
  const auto counts = largest_remainder_counts(truth, n);
  const int trials = 20000;
  Vector sum = Vector::Zero(d), sum2 = Vector::Zero(d);
  Rng rng(123);
  for (int t = 0; t < trials; ++t) {
    const Vector e = estimate(counts, rng);
    sum += e;
    sum2 += e.cwiseProduct(e);
  }
  const Vector mean = sum / trials;
  const Vector var = (sum2 - trials * mean.cwiseProduct(mean)) / (trials - 1);
  const Vector want = linear_variance(p, q, truth, n, EstimationMode::kFrequency);
  for (int x = 0; x < d; ++x) EXPECT_NEAR(var[x] / want[x], 1.0, 0.03) << "x=" << x;
}

TEST(VarianceTest, RandomizedResponseEmpirical) {
  const LinearMechanism lin(binary_rr());
  Vector f(2);
  f << 0.3, 0.7;
  check_variance(lin.p, lin.q, FrequencyVector(f), 1000,
                 [&](const std::vector<std::int64_t>& counts, Rng& rng) {
                   Vector h = Vector::Zero(2);
                   for (int x = 0; x < 2; ++x) {
                     for (std::int64_t i = 0; i < counts[x]; ++i) h[lin.sampler.sample(x, rng)] += 1;
                   }
                   return linear_estimate(lin.q, h / 1000.0).values;
                 });
}

TEST(VarianceTest, SubsetSelectionEmpirical) {
  const SubsetSelectionScheme s = ss_new(6, kLn3, 2);
  const SupportScheme full = full_subset_scheme(6, 2, kLn3);
  const LinearMechanism lin(full.perturbation_matrix());
  Vector f(6);
  f << 0.3, 0.25, 0.2, 0.15, 0.1, 0.0;
  SubsetSampler sampler(s);
  std::vector<int> buf;
  check_variance(lin.p, lin.q, FrequencyVector(f), 1000,
                 [&](const std::vector<std::int64_t>& counts, Rng& rng) {
                   SupportCounts c(6);
                   for (int x = 0; x < 6; ++x) {
                     for (std::int64_t i = 0; i < counts[x]; ++i) {
                       sampler.sample(x, rng, buf);
                       accumulate_subset(buf, c);
                     }
                   }
                   return estimate_symmetric(c, s.params).values;
                 });
}

TEST(UnbiasednessTest, AllMechanisms) {
  const int d = 6;
  const std::int64_t n = 200;
  const int runs = 10000;
  Vector f(d);
  f << 0.35, 0.25, 0.15, 0.1, 0.1, 0.05;
  const FrequencyVector truth(f);
  const PrivacyBudget b(1.0);
  Rng rng(1);
  std::vector<std::pair<std::string, Mechanism>> mechs;
  mechs.emplace_back("ss", ss_new(d, b));
  mechs.emplace_back("ocms", ocms_new(d, b));
  mechs.emplace_back("wss", wss_construct(d, b, optimal_support_size(d, b), rng));
  mechs.emplace_back("linear", LinearMechanism(random_perturbation_matrix(d, 9, rng)));
  for (const auto& [name, m] : mechs) {
    MonteCarloOptions opts;
    opts.mode = EstimationMode::kFrequency;
    opts.keep_estimates = true;
    const MonteCarloResult r = monte_carlo_loss(m, truth, n, runs, 99, opts);
    Vector mean = Vector::Zero(d);
    for (const auto& e : r.estimates) mean += e.values;
    mean /= runs;
    Vector var;
    if (const auto* lin = std::get_if<LinearMechanism>(&m)) {
      var = linear_variance(lin->p, lin->q, truth, n, EstimationMode::kFrequency);
    } else {
      double p = 0, q = 0;
      if (const auto* ss = std::get_if<SubsetSelectionScheme>(&m)) {
        p = ss->params.p_star, q = ss->params.q_star;
      } else if (const auto* oc = std::get_if<OcmsScheme>(&m)) {
        p = oc->p_star, q = oc->q_star;
      } else {
        const auto& w = std::get<WssScheme>(m);
        p = w.params.p_star, q = w.params.q_star;
      }
      var.resize(d);
      for (int x = 0; x < d; ++x) {
        var[x] = symmetric_variance(truth[x], p, q, n, EstimationMode::kFrequency);
      }
    }
    for (int x = 0; x < d; ++x) {
      EXPECT_LT(std::abs(mean[x] - truth[x]), 4 * std::sqrt(var[x] / runs))
          << name << " x=" << x;
    }
  }
}

}  // namespace
}  // namespace ldpfreq
