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

#include "ldpfreq/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "ldpfreq/estimation.h"
#include "ldpfreq/linalg.h"
#include "ldpfreq/mechanisms.h"
#include "ldpfreq/oracle.h"
#include "ldpfreq/theory.h"

namespace ldpfreq {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CheckResult check(std::string name, double worst, double tol) {
  return {std::move(name), worst <= tol, "max deviation " + sci(worst) + " (tol " + sci(tol) + ")"};
}

std::vector<CheckResult> closed_form() {
  double sum_dev = 0.0, comp_dev = 0.0;
  for (int d = 2; d <= 12; ++d) {
    for (double eps : {0.5, 1.0, 2.0}) {
      const PrivacyBudget b(eps);
      for (int k = 1; k <= d - 1; ++k) {
        const double total =
            d * osc_variance(1.0 / d, d, b, k, 1, EstimationMode::kFrequency);
        sum_dev = std::max(sum_dev, std::abs(total - l2_of_k(d, b, 1, k, EstimationMode::kFrequency)));
        const SchemeParams p = scheme_params(d, b, k);
        for (double f : {0.0, 0.25, 1.0 / d, 1.0}) {
          const double a = osc_variance(f, d, b, k, 1, EstimationMode::kFrequency);
          const double c = symmetric_variance(f, p.p_star, p.q_star, 1, EstimationMode::kFrequency);
          comp_dev = std::max(comp_dev, std::abs(a - c) / std::max(1.0, std::abs(c)));
        }
      }
    }
  }
  const PrivacyBudget b3(std::log(3.0));
  const double real = l2_star(4, b3, 1000, EstimationMode::kFrequency, false);
  const double integer = l2_star(4, b3, 1000, EstimationMode::kFrequency, true);
  const double dist = l2_star(4, b3, 1000, EstimationMode::kDistribution, false);
  const double excess = ocms_deviation_factors(100, 101, PrivacyBudget(1.0)).product_excess;
  return {check("uniform sum equals l2_of_k", sum_dev, 1e-10),
          check("variance composition identity", comp_dev, 1e-12),
          check("l2_star(4, ln 3, 1000) = 0.006", std::abs(real - 0.006), 1e-12),
          check("integer and real branches agree", std::abs(real - integer), 1e-12),
          check("distribution offset 0.00075", std::abs(dist - real - 0.00075), 1e-12),
          {"sketch excess in [0.0008, 0.0010]", excess >= 0.0008 && excess <= 0.0010,
           "product excess " + sci(excess)}};
}

std::vector<CheckResult> symmetric() {
  double worst = 0.0;
  for (int d : {4, 5, 6}) {
    for (int k : {1, 2, 3}) {
      for (double eps : {0.5, 1.0, std::log(3.0)}) {
        const PrivacyBudget b(eps);
        const SchemeParams p = scheme_params(d, b, k);
        const SymmetryReport r = verify_symmetric(full_subset_scheme(d, k, b), p.p_star, p.q_star);
        worst = std::max({worst, r.max_self_deviation, r.max_pair_deviation});
      }
    }
  }
  return {check("full subset schemes match p*, q*", worst, 1e-12)};
}

std::vector<CheckResult> fisher() {
  Matrix rr(2, 2);
  rr << 0.75, 0.25, 0.25, 0.75;
  const double l2 =
      fisher_lower_bound(PerturbationMatrix(rr), FrequencyVector::uniform(2), 1).l2;
  Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + static_cast<int>(uniform_below(rng, 5));
    const int m = d + static_cast<int>(uniform_below(rng, 13 - d));
    const PerturbationMatrix p = random_perturbation_matrix(d, m, rng);
    const Matrix& pm = p.entries();
    const Vector pbar = pm.rowwise().sum() / d;
    const double trace =
        invert(pm.transpose() * pbar.cwiseInverse().asDiagonal() * pm).trace();
    const double lhs = fisher_lower_bound(p, FrequencyVector::uniform(d), 1).l2 + 1.0 / d;
    worst = std::max(worst, std::abs(lhs - trace));
  }
  return {check("binary randomized response bound 2.0", std::abs(l2 - 2.0), 1e-12),
          check("Fisher trace identity over 50 random P", worst, 1e-9)};
}

std::vector<CheckResult> urp() {
  Rng rng(11);
  double worst = 0.0, avg_dev = 0.0;
  int done = 0;
  while (done < 20) {
    const PrivacyBudget b(0.5 + 2.0 * uniform_unit(rng));
    const SupportScheme s = random_orbit_scheme(4, 2, b, rng);
    const PerturbationMatrix p = s.perturbation_matrix();
    ReconstructionMatrix q;
    try {
      q = optimal_reconstruction(p);
    } catch (const SingularMatrixError&) {
      continue;
    }
    Vector f(4);
    for (int x = 0; x < 4; ++x) f[x] = 0.1 + uniform_unit(rng);
    const FrequencyVector truth(f / f.sum());
    const UrpVariance u = urp_exact_variance(p, q, truth, 1, EstimationMode::kFrequency);
    for (int x = 0; x < 4; ++x) {
      const double form = (u.alpha - u.beta - 1.0) * truth[x] + u.beta;
      worst = std::max(worst, std::abs(u.variance[x] - form));
    }
    ++done;
  }
  for (int t = 0; t < 5; ++t) {
    Matrix a = Matrix::NullaryExpr(4, 4, [&] { return uniform_unit(rng); });
    const Matrix avg = permutation_average(a);
    const double diag = a.diagonal().mean();
    const double off = (a.sum() - a.diagonal().sum()) / 12.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        avg_dev = std::max(avg_dev, std::abs(avg(i, j) - (i == j ? diag : off)));
      }
    }
  }
  return {check("permutation-averaged variance form", worst, 1e-10),
          check("permutation average is a I + b (J - I)", avg_dev, 1e-12)};
}

std::vector<CheckResult> hash_census() {
  std::vector<CheckResult> out;
  for (auto [dp, B] : {std::pair{5, 2}, {7, 4}, {11, 4}, {13, 4}}) {
    const HashCensus c = hash_family_census(dp, B);
    const int r = dp % B, lo = dp / B, hi = lo + 1;
    const std::int64_t closed = static_cast<std::int64_t>(r) * hi * (hi - 1) +
                                static_cast<std::int64_t>(B - r) * lo * (lo - 1);
    const bool ok = c.pairwise_distinct && c.pair_uniform && c.collisions_per_pair == closed;
    out.push_back({"census d'=" + std::to_string(dp) + " B=" + std::to_string(B), ok,
                   std::to_string(c.collisions_per_pair) + "/" + std::to_string(c.functions) +
                       " collisions per pair, closed form " + std::to_string(closed)});
  }
  return out;
}

std::vector<CheckResult> encoding() {
  bool ok = true;
  for (auto [d, k] : {std::pair{6, 3}, {8, 2}}) {
    const std::uint64_t total = binomial(d, k);
    for (std::uint64_t code = 0; code < total; ++code) {
      ok = ok && combination_rank(combination_unrank(code, d, k), d, k) == code;
    }
  }
  const OcmsScheme s = ocms_new(6, PrivacyBudget(std::log(3.0)));
  bool pack_ok = s.d_prime == 7 && s.B == 4;
  for (std::int64_t a = 1; a < 7; ++a) {
    for (std::int64_t b = 0; b < 7; ++b) {
      for (int z = 0; z < 4; ++z) {
        const OcmsResponse r = ocms_unpack(s, ocms_pack(s, {a, b, z}));
        pack_ok = pack_ok && r.a == a && r.b == b && r.z == z;
      }
    }
  }
  return {{"combination rank roundtrip", ok, "C(6,3) and C(8,2) codes"},
          {"sketch triple packing roundtrip", pack_ok, "d'=7, B=4"}};
}

using Suite = std::function<std::vector<CheckResult>()>;

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> all = {
      {"closed-form", closed_form}, {"symmetric", symmetric}, {"fisher", fisher},
      {"urp", urp},                 {"hash-census", hash_census}, {"encoding", encoding}};
  return all;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  std::vector<std::string> names;
  for (const auto& s : suites()) names.push_back(s.first);
  names.push_back("all");
  return names;
}

std::vector<CheckResult> run_verify_suite(std::string_view name) {
  std::vector<CheckResult> out;
  for (const auto& [n, fn] : suites()) {
    if (name == "all" || name == n) {
      auto part = fn();
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  if (out.empty()) throw std::invalid_argument("unknown verify suite '" + std::string(name) + "'");
  return out;
}

}  // namespace ldpfreq
