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

#include "ldpfreq/oracle.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace ldpfreq {

SupportScheme full_subset_scheme(int d, int k, const PrivacyBudget& budget) {
  if (d < 2 || k < 1 || k > d - 1) {
    throw std::invalid_argument("full_subset_scheme: need d >= 2 and 1 <= k <= d - 1");
  }
  const std::uint64_t m = binomial(d, k);
  if (m > 1000000) throw std::invalid_argument("full_subset_scheme: C(d, k) > 1e6");
  BinaryMatrix s = BinaryMatrix::Zero(static_cast<Eigen::Index>(m), d);
  for (std::uint64_t code = 0; code < m; ++code) {
    for (int x : combination_unrank(code, d, k)) s(static_cast<Eigen::Index>(code), x) = 1;
  }
  const double p =
      d / (static_cast<double>(m) * (k * (budget.e_eps() - 1.0) + d));
  return SupportScheme(std::move(s), Vector::Constant(static_cast<Eigen::Index>(m), p),
                       budget);
}

SymmetryReport verify_symmetric(const SupportScheme& scheme, std::optional<double> p_ref,
                                std::optional<double> q_ref) {
  const int d = scheme.dictionary_size();
  const double e = scheme.budget().e_eps();
  const Matrix s = scheme.support().cast<double>();
  const Vector& p = scheme.base_prob();
  const Vector mass = s.transpose() * p;
  const Matrix pair = s.transpose() * p.asDiagonal() * s;

  const Vector self = e * mass;
  std::vector<double> cross;
  cross.reserve(static_cast<std::size_t>(d) * (d - 1));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j) cross.push_back((e - 1.0) * pair(i, j) + mass[j]);
    }
  }
  SymmetryReport report{};
  report.measured_p_star = self.mean();
  report.measured_q_star =
      cross.empty() ? 0.0
                    : std::accumulate(cross.begin(), cross.end(), 0.0) / cross.size();
  const double pr = p_ref.value_or(report.measured_p_star);
  const double qr = q_ref.value_or(report.measured_q_star);
  report.max_self_deviation = (self.array() - pr).abs().maxCoeff();
  for (double c : cross) {
    report.max_pair_deviation = std::max(report.max_pair_deviation, std::abs(c - qr));
  }
  return report;
}

namespace {

std::vector<std::vector<int>> all_permutations(int d) {
  if (d > 6) throw std::invalid_argument("permutation enumeration is limited to d <= 6");
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

Matrix permutation_average(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("permutation_average: square only");
  const int d = static_cast<int>(a.rows());
  const auto perms = all_permutations(d);
  Matrix avg = Matrix::Zero(d, d);
  for (const auto& sigma : perms) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) avg(i, j) += a(sigma[i], sigma[j]);
    }
  }
  return avg / static_cast<double>(perms.size());
}

UrpVariance urp_exact_variance(const PerturbationMatrix& p, const ReconstructionMatrix& q,
                               const FrequencyVector& truth, std::int64_t n,
                               EstimationMode mode) {
  const Matrix& pm = p.entries();
  const int d = p.dictionary_size();
  const auto perms = all_permutations(d);
  Vector total = Vector::Zero(d);
  Matrix pz(pm.rows(), d);
  Matrix zq(d, pm.rows());
  for (const auto& sigma : perms) {
    for (int i = 0; i < d; ++i) {
      pz.col(i) = pm.col(sigma[i]);
      zq.row(i) = q.entries.row(sigma[i]);
    }
    total += linear_variance(PerturbationMatrix(pz), ReconstructionMatrix{zq}, truth, n,
                             mode);
  }
  const Matrix g = q.entries.cwiseProduct(q.entries) * pm;
  const double diag = g.diagonal().sum();
  UrpVariance out;
  out.variance = total / static_cast<double>(perms.size());
  out.alpha = diag / d;
  out.beta = d > 1 ? (g.sum() - diag) / (static_cast<double>(d) * (d - 1)) : 0.0;
  return out;
}

HashCensus hash_family_census(int d_prime, int B) {
  if (!is_prime(d_prime)) throw std::invalid_argument("census modulus must be prime");
  if (d_prime > 200) throw std::invalid_argument("census limited to d' <= 200");
  if (B < 2) throw std::invalid_argument("hash range must be >= 2");
  const std::int64_t p = d_prime;
  HashCensus c{};
  c.d_prime = d_prime;
  c.B = B;
  c.functions = p * (p - 1);
  c.bucket_sizes.assign(static_cast<std::size_t>(B), 0);
  for (int y = 0; y < d_prime; ++y) ++c.bucket_sizes[static_cast<std::size_t>(y % B)];

  c.pairwise_distinct = true;
  c.pair_uniform = true;
  std::int64_t first = -1;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(p * p));
  for (std::int64_t x1 = 0; x1 < p; ++x1) {
    for (std::int64_t x2 = 0; x2 < p; ++x2) {
      if (x1 == x2) continue;
      std::fill(seen.begin(), seen.end(), 0);
      std::int64_t same = 0;
      for (std::int64_t a = 1; a < p; ++a) {
        for (std::int64_t b = 0; b < p; ++b) {
          const std::int64_t y1 = (a * x1 + b) % p;
          const std::int64_t y2 = (a * x2 + b) % p;
          auto& cell = seen[static_cast<std::size_t>(y1 * p + y2)];
          if (y1 == y2 || cell) c.pairwise_distinct = false;
          cell = 1;
          if (y1 % B == y2 % B) ++same;
        }
      }
      if (first < 0) first = same;
      if (same != first) c.pair_uniform = false;
    }
  }
  c.collisions_per_pair = first;
  c.collision = static_cast<double>(first) / static_cast<double>(c.functions);
  return c;
}

std::vector<std::int64_t> largest_remainder_counts(const FrequencyVector& dist,
                                                   std::int64_t n) {
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  const int d = dist.size();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(d));
  std::vector<double> rem(static_cast<std::size_t>(d));
  std::int64_t used = 0;
  for (int x = 0; x < d; ++x) {
    const double exact = dist[x] * static_cast<double>(n);
    const double fl = std::floor(exact);
    counts[x] = static_cast<std::int64_t>(fl);
    rem[x] = exact - fl;
    used += counts[x];
  }
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rem[a] > rem[b]; });
  // Round-off can leave the floors summing above n; trim from the tail.
  for (int i = d - 1; used > n && i >= 0; --i) {
    if (counts[order[i]] > 0) {
      --counts[order[i]];
      --used;
    }
  }
  for (int i = 0; used < n; i = (i + 1) % d) {
    ++counts[order[i]];
    ++used;
  }
  return counts;
}

SupportScheme orbit_scheme(int d,
                           const std::vector<std::pair<std::vector<int>, double>>& orbits,
                           const PrivacyBudget& budget) {
  if (orbits.empty()) throw std::invalid_argument("orbit_scheme: no orbits");
  const int m = static_cast<int>(orbits.size()) * d;
  BinaryMatrix s = BinaryMatrix::Zero(m, d);
  Vector p(m);
  double mass = 0.0;    // sum over orbits of w |T|: support mass of any value
  double weight = 0.0;  // sum over orbits of w
  int row = 0;
  for (const auto& [base, w] : orbits) {
    if (base.empty() || static_cast<int>(base.size()) >= d || !(w > 0.0)) {
      throw std::invalid_argument("orbit_scheme: bad orbit");
    }
    for (int shift = 0; shift < d; ++shift, ++row) {
      for (int x : base) s(row, (x + shift) % d) = 1;
      p[row] = w;
    }
    mass += w * static_cast<double>(base.size());
    weight += w;
  }
  const double scale = 1.0 / ((budget.e_eps() - 1.0) * mass + d * weight);
  return SupportScheme(std::move(s), p * scale, budget);
}

SupportScheme random_orbit_scheme(int d, int orbits, const PrivacyBudget& budget,
                                  Rng& rng) {
  std::vector<std::pair<std::vector<int>, double>> spec;
  for (int i = 0; i < orbits; ++i) {
    const int size = 1 + static_cast<int>(uniform_below(rng, d - 1));
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    for (int j = 0; j < size; ++j) {
      std::swap(all[j], all[j + uniform_below(rng, d - j)]);
    }
    all.resize(static_cast<std::size_t>(size));
    std::sort(all.begin(), all.end());
    spec.emplace_back(std::move(all), 0.1 + 0.9 * uniform_unit(rng));
  }
  return orbit_scheme(d, spec, budget);
}

PerturbationMatrix random_perturbation_matrix(int d, int m, Rng& rng) {
  Matrix p(m, d);
  for (int x = 0; x < d; ++x) {
    for (int o = 0; o < m; ++o) p(o, x) = 0.05 + 0.95 * uniform_unit(rng);
    p.col(x) /= p.col(x).sum();
  }
  return PerturbationMatrix(std::move(p));
}

int worker_count(int requested, int jobs) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("LDPFREQ_THREADS"); env && *env) {
      t = std::atoi(env);
    }
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, std::max(1, jobs));
}

namespace {

int mechanism_domain(const Mechanism& m) {
  struct {
    int operator()(const SubsetSelectionScheme& s) const { return s.params.d; }
    int operator()(const OcmsScheme& s) const { return s.d; }
    int operator()(const WssScheme& s) const { return s.scheme.dictionary_size(); }
    int operator()(const LinearMechanism& s) const { return s.p.dictionary_size(); }
  } visitor;
  return std::visit(visitor, m);
}

// Client values of one run, one entry per object.
class ValueSource {
 public:
  ValueSource(const FrequencyVector& truth, std::int64_t n, EstimationMode mode)
      : mode_(mode), n_(n) {
    if (mode == EstimationMode::kFrequency) {
      counts_ = largest_remainder_counts(truth, n);
    } else {
      cumulative_.resize(static_cast<std::size_t>(truth.size()));
      double acc = 0.0;
      for (int x = 0; x < truth.size(); ++x) {
        acc += truth[x];
        cumulative_[x] = acc;
        if (truth[x] > 0.0) last_positive_ = x;
      }
      total_ = acc;
    }
  }

  template <typename Fn>
  void for_each(Rng& rng, Fn&& fn) const {
    if (mode_ == EstimationMode::kFrequency) {
      for (std::size_t x = 0; x < counts_.size(); ++x) {
        for (std::int64_t i = 0; i < counts_[x]; ++i) fn(static_cast<int>(x));
      }
    } else {
      for (std::int64_t i = 0; i < n_; ++i) {
        // Zero-mass values are never drawn, even under round-off at the top.
        const int x = internal::search_cumulative(cumulative_, uniform_unit(rng) * total_);
        fn(std::min(x, last_positive_));
      }
    }
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  EstimationMode mode_;
  std::int64_t n_;
  std::vector<std::int64_t> counts_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
  int last_positive_ = 0;
};

// Per-thread mutable state.
struct Worker {
  std::optional<SubsetSampler> ss;
  std::vector<int> buffer;
};

EstimateVector run_once(const Mechanism& mechanism, const ValueSource& source,
                        int d, Rng& rng, Worker& w) {
  if (const auto* ss = std::get_if<SubsetSelectionScheme>(&mechanism)) {
    if (!w.ss) w.ss.emplace(*ss);
    SupportCounts counts(d);
    source.for_each(rng, [&](int x) {
      w.ss->sample(x, rng, w.buffer);
      accumulate_subset(w.buffer, counts);
    });
    return estimate_symmetric(counts, ss->params);
  }
  if (const auto* oc = std::get_if<OcmsScheme>(&mechanism)) {
    SupportCounts counts(d);
    source.for_each(rng, [&](int x) { accumulate_ocms(*oc, ocms_perturb(*oc, x, rng), counts); });
    return estimate_symmetric(counts, oc->p_star, oc->q_star);
  }
  if (const auto* ws = std::get_if<WssScheme>(&mechanism)) {
    SupportCounts counts(d);
    source.for_each(rng, [&](int x) { accumulate_wss(*ws, wss_perturb(*ws, x, rng), counts); });
    return estimate_symmetric(counts, ws->params);
  }
  const auto& lin = std::get<LinearMechanism>(mechanism);
  Vector hist = Vector::Zero(lin.sampler.responses());
  std::int64_t total = 0;
  source.for_each(rng, [&](int x) {
    hist[lin.sampler.sample(x, rng)] += 1.0;
    ++total;
  });
  return linear_estimate(lin.q, hist / static_cast<double>(total));
}

}  // namespace

MonteCarloResult monte_carlo_loss(const Mechanism& mechanism, const FrequencyVector& truth,
                                  std::int64_t n, int runs, std::uint64_t seed,
                                  const MonteCarloOptions& options) {
  if (runs < 2) throw std::invalid_argument("monte_carlo_loss needs runs >= 2");
  if (n < 1) throw std::invalid_argument("dataset size n must be >= 1");
  const int d = mechanism_domain(mechanism);
  if (truth.size() != d) {
    throw std::invalid_argument("truth length " + std::to_string(truth.size()) +
                                " does not match dictionary size " + std::to_string(d));
  }
  const ValueSource source(truth, n, options.mode);
  FrequencyVector scored = truth;
  if (options.mode == EstimationMode::kFrequency) {
    Vector realized(d);
    for (int x = 0; x < d; ++x) {
      realized[x] = static_cast<double>(source.counts()[x]) / static_cast<double>(n);
    }
    scored = FrequencyVector(realized / realized.sum());
  }

  std::vector<Losses> losses(static_cast<std::size_t>(runs));
  std::vector<EstimateVector> estimates(options.keep_estimates ? runs : 0);
  std::atomic<int> next{0};
  auto work = [&] {
    Worker w;
    for (int r = next++; r < runs; r = next++) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
      EstimateVector est = run_once(mechanism, source, d, rng, w);
      losses[r] = empirical_losses(est, scored);
      if (options.keep_estimates) estimates[r] = std::move(est);
    }
  };
  const int threads = worker_count(options.threads, runs);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  double s1 = 0.0, s2 = 0.0;
  for (const Losses& l : losses) {
    s1 += l.l1;
    s2 += l.l2;
  }
  const double m1 = s1 / runs, m2 = s2 / runs;
  double var = 0.0;
  for (const Losses& l : losses) var += (l.l2 - m2) * (l.l2 - m2);
  return MonteCarloResult{m1,     m2,     std::sqrt(var / (runs - 1)), std::move(losses),
                          std::move(estimates), std::move(scored)};
}

}  // namespace ldpfreq
