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

#include "ldpfreq/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "ldpfreq/linalg.h"
#include "ldpfreq/theory.h"

namespace ldpfreq {
namespace {

void check_element(int x, int d) {
  if (x < 0 || x >= d) {
    throw std::out_of_range("element " + std::to_string(x) + " outside [0, " +
                            std::to_string(d) + ")");
  }
}

std::vector<double> cumulative_column(const Matrix& p, Eigen::Index x) {
  std::vector<double> c(static_cast<std::size_t>(p.rows()));
  double acc = 0.0;
  for (Eigen::Index o = 0; o < p.rows(); ++o) {
    acc += p(o, x);
    c[static_cast<std::size_t>(o)] = acc;
  }
  return c;
}

}  // namespace

namespace internal {

std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
  std::int64_t old_r = a % p, r = p, old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    old_r = std::exchange(r, old_r - q * r);
    old_s = std::exchange(s, old_s - q * s);
  }
  if (old_r != 1) throw std::invalid_argument("mod_inverse: not invertible");
  return ((old_s % p) + p) % p;
}

int search_cumulative(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Subset selection

SubsetSelectionScheme ss_new(int d, const PrivacyBudget& budget,
                             std::optional<int> k) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  const int kk = k ? *k : optimal_support_size(d, budget);
  return SubsetSelectionScheme{scheme_params(d, budget, kk)};
}

SubsetSampler::SubsetSampler(const SubsetSelectionScheme& scheme)
    : params_(scheme.params),
      perm_(static_cast<std::size_t>(scheme.params.d)),
      pos_(static_cast<std::size_t>(scheme.params.d)) {
  std::iota(perm_.begin(), perm_.end(), 0);
  std::iota(pos_.begin(), pos_.end(), 0);
}

void SubsetSampler::swap_slots(int i, int j) {
  std::swap(perm_[i], perm_[j]);
  pos_[perm_[i]] = i;
  pos_[perm_[j]] = j;
}

void SubsetSampler::sample(int x, Rng& rng, std::vector<int>& out) {
  const int d = params_.d;
  const int k = params_.k;
  check_element(x, d);
  // Park x in the last slot; the first d - 1 slots hold the other values.
  swap_slots(pos_[x], d - 1);
  out.clear();
  int draws = k;
  if (bernoulli(rng, params_.p_star)) {
    out.push_back(x);
    draws = k - 1;
  }
  // Partial Fisher-Yates over slots [0, d - 1). The result is a uniform
  // draw whatever order the slots were left in by earlier calls.
  for (int i = 0; i < draws; ++i) {
    const int j = i + static_cast<int>(uniform_below(rng, d - 1 - i));
    swap_slots(i, j);
    out.push_back(perm_[i]);
  }
}

std::vector<int> ss_perturb(const SubsetSelectionScheme& scheme, int x, Rng& rng) {
  SubsetSampler sampler(scheme);
  std::vector<int> out;
  sampler.sample(x, rng, out);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Encodings

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is integral; cancel gcd(r, i) first so the
    // product only overflows when the result does.
    const std::uint64_t g = std::gcd(r, static_cast<std::uint64_t>(i));
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i) / (i / g);
    r /= g;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " +
                                std::to_string(k) + ") exceeds 64 bits");
    }
    r *= num;
  }
  return r;
}

std::uint64_t combination_rank(const std::vector<int>& subset, int d, int k) {
  if (k < 1 || k > d || static_cast<int>(subset.size()) != k) {
    throw std::invalid_argument("combination_rank: subset must have k elements");
  }
  binomial(d, k);  // rejects ranges that do not fit in 64 bits
  std::uint64_t rank = 0;
  for (int i = 0; i < k; ++i) {
    const int x = subset[static_cast<std::size_t>(i)];
    if (x < 0 || x >= d || (i > 0 && x <= subset[static_cast<std::size_t>(i) - 1])) {
      throw std::invalid_argument(
          "combination_rank: subset must be strictly increasing within [0, d)");
    }
    rank += binomial(x, i + 1);
  }
  return rank;
}

std::vector<int> combination_unrank(std::uint64_t code, int d, int k) {
  if (k < 1 || k > d) throw std::invalid_argument("combination_unrank: bad k");
  if (code >= binomial(d, k)) {
    throw std::out_of_range("combination_unrank: code out of range");
  }
  std::vector<int> subset(static_cast<std::size_t>(k));
  int x = d - 1;
  for (int i = k; i >= 1; --i) {
    while (binomial(x, i) > code) --x;
    subset[static_cast<std::size_t>(i) - 1] = x;
    code -= binomial(x, i);
    --x;
  }
  return subset;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t f = 3; f * f <= n; f += 2) {
    if (n % f == 0) return false;
  }
  return true;
}

int next_prime(int d) {
  if (d < 2) throw std::invalid_argument("next_prime requires d >= 2");
  int p = d;
  while (!is_prime(p)) ++p;
  return p;
}

// ---------------------------------------------------------------------------
// OCMS

OcmsScheme ocms_new(int d, const PrivacyBudget& budget) {
  if (d < 2) throw std::invalid_argument("dictionary size must be >= 2");
  const double e = budget.e_eps();
  const double b_real = std::floor(1.0 + e + 0.5);
  if (b_real > 1e7) throw std::invalid_argument("hash range too large for epsilon");
  const int B = static_cast<int>(b_real);
  const int dp = next_prime(d);
  const int r = dp % B;
  const int k_lo = dp / B;
  const int k_hi = k_lo + 1;
  const double p_true = e / (e + B - 1.0);
  const double pairs = static_cast<double>(dp) * (dp - 1.0);
  const double collision =
      (r * static_cast<double>(k_hi) * (k_hi - 1.0) +
       (B - r) * static_cast<double>(k_lo) * (k_lo - 1.0)) /
      pairs;
  const double q_star =
      p_true * collision + (1.0 - p_true) * (1.0 - collision) / (B - 1.0);
  return OcmsScheme{d,      dp,     B,     budget,
                    p_true, collision, p_true, q_star,
                    static_cast<double>(r) / B, k_hi, k_lo};
}

OcmsResponse ocms_perturb(const OcmsScheme& s, int x, Rng& rng) {
  check_element(x, s.d);
  OcmsResponse r;
  r.a = 1 + static_cast<std::int64_t>(uniform_below(rng, s.d_prime - 1));
  r.b = static_cast<std::int64_t>(uniform_below(rng, s.d_prime));
  const int y = ocms_hash(s, r.a, r.b, x);
  if (bernoulli(rng, s.p_true)) {
    r.z = y;
  } else {
    const int w = static_cast<int>(uniform_below(rng, s.B - 1));
    r.z = w < y ? w : w + 1;
  }
  return r;
}

std::uint64_t ocms_pack(const OcmsScheme& s, const OcmsResponse& r) {
  if (r.a < 1 || r.a >= s.d_prime || r.b < 0 || r.b >= s.d_prime || r.z < 0 ||
      r.z >= s.B) {
    throw std::invalid_argument("ocms_pack: response fields out of range");
  }
  const std::uint64_t dp = static_cast<std::uint64_t>(s.d_prime);
  const std::uint64_t b = static_cast<std::uint64_t>(s.B);
  return static_cast<std::uint64_t>(r.a) * (dp * b) +
         static_cast<std::uint64_t>(r.b) * b + static_cast<std::uint64_t>(r.z);
}

OcmsResponse ocms_unpack(const OcmsScheme& s, std::uint64_t code) {
  const std::uint64_t dp = static_cast<std::uint64_t>(s.d_prime);
  const std::uint64_t b = static_cast<std::uint64_t>(s.B);
  OcmsResponse r;
  r.z = static_cast<int>(code % b);
  r.b = static_cast<std::int64_t>((code / b) % dp);
  r.a = static_cast<std::int64_t>(code / (dp * b));
  if (r.a < 1 || r.a >= s.d_prime) {
    throw std::out_of_range("ocms_unpack: code out of range");
  }
  return r;
}

double ocms_variance(const OcmsScheme& s, double f, std::int64_t n,
                     EstimationMode mode) {
  if (s.k_lo < 1) {
    throw std::domain_error("mixture variance undefined when buckets can be empty");
  }
  double v = (1.0 - s.p_alpha) * osc_variance(f, s.d_prime, s.budget, s.k_lo, n, mode);
  if (s.p_alpha > 0.0) {
    v += s.p_alpha * osc_variance(f, s.d_prime, s.budget, s.k_hi, n, mode);
  }
  return v;
}

double ocms_l2(const OcmsScheme& s, std::int64_t n, EstimationMode mode) {
  return s.d * ocms_variance(s, 1.0 / s.d, n, mode);
}

SupportScheme ocms_support_scheme(const OcmsScheme& s) {
  if (s.d_prime > 64) {
    throw std::invalid_argument("ocms_support_scheme is limited to d' <= 64");
  }
  const int m = (s.d_prime - 1) * s.d_prime * s.B;
  BinaryMatrix support = BinaryMatrix::Zero(m, s.d);
  const double e = s.budget.e_eps();
  const double base = 1.0 / (static_cast<double>(s.d_prime) * (s.d_prime - 1.0) *
                             (e + s.B - 1.0));
  for (std::int64_t a = 1; a < s.d_prime; ++a) {
    for (std::int64_t b = 0; b < s.d_prime; ++b) {
      for (int z = 0; z < s.B; ++z) {
        const OcmsResponse r{a, b, z};
        const auto row = static_cast<Eigen::Index>(ocms_pack(s, r) - s.d_prime * s.B);
        for (int x = 0; x < s.d; ++x) support(row, x) = ocms_supports(s, r, x);
      }
    }
  }
  return SupportScheme(std::move(support), Vector::Constant(m, base), s.budget);
}

// ---------------------------------------------------------------------------
// WSS

namespace {

// One candidate k-subset drawn with weights exp(-count[x]) without
// replacement, sequentially.
std::vector<int> weighted_subset(const std::vector<int>& count, int k, Rng& rng) {
  const int d = static_cast<int>(count.size());
  const int lowest = *std::min_element(count.begin(), count.end());
  std::vector<double> w(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) w[x] = std::exp(-(count[x] - lowest));
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double u = uniform_unit(rng) * total;
    int chosen = -1;
    for (int x = 0; x < d; ++x) {
      if (w[x] <= 0.0) continue;
      chosen = x;
      if (u < w[x]) break;
      u -= w[x];
    }
    picked.push_back(chosen);
    w[chosen] = 0.0;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<std::vector<int>> sample_candidates(int d, int k, int target, Rng& rng) {
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  std::vector<int> count(static_cast<std::size_t>(d), 0);
  const long budget = 100L * target;
  for (long draw = 0; draw < budget && static_cast<int>(out.size()) < target; ++draw) {
    std::vector<int> c = weighted_subset(count, k, rng);
    if (!seen.insert(c).second) continue;
    for (int x : c) ++count[x];
    out.push_back(std::move(c));
  }
  return out;
}

WssScheme identity_scheme(int d, const PrivacyBudget& budget) {
  BinaryMatrix s = BinaryMatrix::Identity(d, d);
  Vector p = Vector::Constant(d, 1.0 / (budget.e_eps() - 1.0 + d));
  WssScheme w = wss_from_scheme(SupportScheme(std::move(s), std::move(p), budget));
  w.attempts = 1;
  return w;
}

}  // namespace

WssScheme wss_from_scheme(SupportScheme scheme) {
  const int k = scheme.constant_support_size();
  if (k == 0) {
    throw std::invalid_argument("weighted subset selection needs a constant support size");
  }
  SchemeParams params = scheme_params(scheme.dictionary_size(), scheme.budget(), k);
  const Matrix p = scheme.perturbation_matrix().entries();
  std::vector<std::vector<double>> cumulative;
  cumulative.reserve(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index x = 0; x < p.cols(); ++x) cumulative.push_back(cumulative_column(p, x));
  return WssScheme{std::move(scheme), params, std::move(cumulative), 0};
}

WssScheme wss_construct(int d, const PrivacyBudget& budget, int k, Rng& rng,
                        const WssOptions& options) {
  scheme_params(d, budget, k);  // validates d and k
  if (options.max_attempts < 1) {
    throw std::invalid_argument("max_attempts must be >= 1");
  }
  if (k == 1) return identity_scheme(d, budget);

  const double e = budget.e_eps();
  const double pair_target = k * (k - 1.0) / ((k * (e - 1.0) + d) * (d - 1.0));
  const int max_responses = d * (d - 1) / 2 + 1;
  int target = options.candidates > 0 ? options.candidates : d * d;
  const std::uint64_t all = binomial(d, k);
  if (all < static_cast<std::uint64_t>(target)) target = static_cast<int>(all);

  const int pairs = d * (d - 1) / 2;
  std::string last_failure = "no attempt made";
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const auto cands = sample_candidates(d, k, target, rng);
    const int w = static_cast<int>(cands.size());
    Matrix a = Matrix::Zero(pairs, w);
    for (int o = 0; o < w; ++o) {
      const auto& c = cands[static_cast<std::size_t>(o)];
      for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) {
          const int lo = c[i], hi = c[j];
          // Row index of the unordered pair (lo, hi), lo < hi.
          const int row = lo * d - lo * (lo + 1) / 2 + (hi - lo - 1);
          a(row, o) = 1.0;
        }
      }
    }
    const Vector y = Vector::Constant(pairs, pair_target);
    NnlsResult<double> sol;
    try {
      sol = nnls(a, y);
    } catch (const IterationLimitError& err) {
      last_failure = err.what();
      continue;
    }
    if (sol.residual > options.residual_tol) {
      last_failure = "NNLS residual " + std::to_string(sol.residual);
      continue;
    }
    std::vector<int> keep;
    for (int o = 0; o < w; ++o) {
      if (sol.x[o] >= options.prune_tol) keep.push_back(o);
    }
    if (static_cast<int>(keep.size()) > max_responses) {
      last_failure = std::to_string(keep.size()) + " responses exceed the bound";
      continue;
    }
    const int m = static_cast<int>(keep.size());
    BinaryMatrix s = BinaryMatrix::Zero(m, d);
    Vector p(m);
    for (int r = 0; r < m; ++r) {
      const int o = keep[static_cast<std::size_t>(r)];
      for (int x : cands[static_cast<std::size_t>(o)]) s(r, x) = 1;
      p[r] = sol.x[o];
    }
    SupportScheme scheme = SupportScheme::unchecked(s, p, budget);
    if (scheme.column_identity_error() > options.verify_tol) {
      last_failure = "column identity error " +
                     std::to_string(scheme.column_identity_error());
      continue;
    }
    const Matrix sd = s.cast<double>();
    const Matrix pair_mass = sd.transpose() * p.asDiagonal() * sd;
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        worst = std::max(worst, std::abs(pair_mass(i, j) - pair_target));
      }
    }
    if (worst > options.verify_tol) {
      last_failure = "pair mass deviation " + std::to_string(worst);
      continue;
    }
    WssScheme out = wss_from_scheme(std::move(scheme));
    out.attempts = attempt;
    return out;
  }
  throw ConstructionFailed("weighted subset construction failed after " +
                           std::to_string(options.max_attempts) +
                           " attempts: " + last_failure);
}

int wss_perturb(const WssScheme& scheme, int x, Rng& rng) {
  check_element(x, scheme.scheme.dictionary_size());
  return internal::search_cumulative(scheme.cumulative[static_cast<std::size_t>(x)],
                                     uniform_unit(rng));
}

// ---------------------------------------------------------------------------
// Matrix sampler

MatrixSampler::MatrixSampler(const PerturbationMatrix& p) : responses_(p.responses()) {
  const Matrix& e = p.entries();
  cumulative_.reserve(static_cast<std::size_t>(e.cols()));
  for (Eigen::Index x = 0; x < e.cols(); ++x) cumulative_.push_back(cumulative_column(e, x));
}

int MatrixSampler::sample(int x, Rng& rng) const {
  check_element(x, dictionary_size());
  return internal::search_cumulative(cumulative_[static_cast<std::size_t>(x)],
                                     uniform_unit(rng));
}

int perturb_from_matrix(const PerturbationMatrix& p, int x, Rng& rng) {
  return MatrixSampler(p).sample(x, rng);
}

}  // namespace ldpfreq
