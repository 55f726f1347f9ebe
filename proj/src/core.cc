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

#include "ldpfreq/core.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ldpfreq {

std::string_view to_string(EstimationMode mode) {
  return mode == EstimationMode::kFrequency ? "frequency" : "distribution";
}

EstimationMode parse_estimation_mode(std::string_view text) {
  if (text == "frequency") return EstimationMode::kFrequency;
  if (text == "distribution") return EstimationMode::kDistribution;
  throw std::invalid_argument("unknown estimation mode: " + std::string(text));
}

PrivacyBudget::PrivacyBudget(double epsilon)
    : epsilon_(epsilon), e_eps_(std::exp(epsilon)) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
}

PerturbationMatrix::PerturbationMatrix(Matrix entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw std::invalid_argument("perturbation matrix must be non-empty");
  }
  if (!entries_.allFinite() || (entries_.array() < 0.0).any()) {
    throw std::invalid_argument("perturbation matrix entries must be finite and >= 0");
  }
  for (Eigen::Index x = 0; x < entries_.cols(); ++x) {
    if (std::abs(entries_.col(x).sum() - 1.0) > kColumnSumTolerance) {
      throw std::invalid_argument("perturbation matrix column " +
                                  std::to_string(x) + " does not sum to 1");
    }
  }
}

LdpReport validate_ldp(const PerturbationMatrix& p, const PrivacyBudget& budget) {
  const Matrix& e = p.entries();
  LdpReport report{true, 1.0, 0};
  for (Eigen::Index o = 0; o < e.rows(); ++o) {
    const double hi = e.row(o).maxCoeff();
    const double lo = e.row(o).minCoeff();
    if (hi == 0.0) {
      throw std::invalid_argument("perturbation matrix row " + std::to_string(o) +
                                  " is identically zero");
    }
    const double ratio =
        lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst_row = static_cast<int>(o);
    }
  }
  // Relative slack absorbs rounding in ratios that are exactly e^eps.
  report.satisfied = report.worst_ratio <= budget.e_eps() * (1.0 + 1e-9);
  return report;
}

SupportScheme::SupportScheme(BinaryMatrix support, Vector base_prob,
                             PrivacyBudget budget, NoCheck)
    : support_(std::move(support)),
      base_prob_(std::move(base_prob)),
      budget_(budget) {
  if (support_.rows() < 1 || support_.cols() < 1) {
    throw std::invalid_argument("support scheme needs at least one response");
  }
  if (support_.rows() != base_prob_.size()) {
    throw std::invalid_argument("support rows and base probabilities differ in count");
  }
  if ((support_.array() > 1).any()) {
    throw std::invalid_argument("support matrix must be binary");
  }
  if (!base_prob_.allFinite() || (base_prob_.array() < 0.0).any()) {
    throw std::invalid_argument("base probabilities must be finite and >= 0");
  }
}

SupportScheme::SupportScheme(BinaryMatrix support, Vector base_prob,
                             PrivacyBudget budget)
    : SupportScheme(std::move(support), std::move(base_prob), budget, NoCheck{}) {
  const double err = column_identity_error();
  if (err > kColumnSumTolerance) {
    std::ostringstream msg;
    msg << "support scheme violates the total-probability identity (error "
        << err << ")";
    throw std::invalid_argument(msg.str());
  }
}

SupportScheme SupportScheme::unchecked(BinaryMatrix support, Vector base_prob,
                                       PrivacyBudget budget) {
  return SupportScheme(std::move(support), std::move(base_prob), budget, NoCheck{});
}

Eigen::VectorXi SupportScheme::support_sizes() const {
  return support_.cast<int>().rowwise().sum();
}

int SupportScheme::constant_support_size() const {
  const Eigen::VectorXi sizes = support_sizes();
  return sizes.minCoeff() == sizes.maxCoeff() ? sizes[0] : 0;
}

Vector SupportScheme::support_mass() const {
  return support_.cast<double>().transpose() * base_prob_;
}

double SupportScheme::column_identity_error() const {
  const Vector totals =
      (budget_.e_eps() - 1.0) * support_mass().array() + base_prob_.sum();
  return (totals.array() - 1.0).abs().maxCoeff();
}

PerturbationMatrix SupportScheme::perturbation_matrix() const {
  Matrix p = ((budget_.e_eps() - 1.0) * support_.cast<double>().array() + 1.0).matrix();
  p = base_prob_.asDiagonal() * p;
  return PerturbationMatrix(std::move(p));
}

FrequencyVector::FrequencyVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw std::invalid_argument("empty frequency vector");
  if (!values_.allFinite() || (values_.array() < 0.0).any()) {
    throw std::invalid_argument("frequencies must be finite and >= 0");
  }
  if (std::abs(values_.sum() - 1.0) > kFrequencySumTolerance) {
    throw std::invalid_argument("frequencies must sum to 1");
  }
}

FrequencyVector FrequencyVector::uniform(int d) {
  if (d < 1) throw std::invalid_argument("dictionary size must be >= 1");
  return FrequencyVector(Vector::Constant(d, 1.0 / d));
}

SupportCounts& SupportCounts::operator+=(const SupportCounts& other) {
  if (other.counts.size() != counts.size()) {
    throw std::invalid_argument("support counts have different dictionary sizes");
  }
  for (std::size_t x = 0; x < counts.size(); ++x) counts[x] += other.counts[x];
  n += other.n;
  return *this;
}

std::string serialize_scheme(const SupportScheme& scheme) {
  nlohmann::json out;
  out["d"] = scheme.dictionary_size();
  out["epsilon"] = scheme.budget().epsilon();
  out["k"] = scheme.constant_support_size();
  nlohmann::json responses = nlohmann::json::array();
  for (int o = 0; o < scheme.responses(); ++o) {
    std::vector<int> support;
    for (int x = 0; x < scheme.dictionary_size(); ++x) {
      if (scheme.support()(o, x)) support.push_back(x);
    }
    responses.push_back({{"support", support}, {"base_prob", scheme.base_prob()[o]}});
  }
  out["responses"] = std::move(responses);
  return out.dump(2);
}

SupportScheme parse_scheme(std::string_view json_text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("scheme file is not valid JSON: ") + e.what());
  }
  const int d = in.at("d").get<int>();
  const double epsilon = in.at("epsilon").get<double>();
  const auto& responses = in.at("responses");
  if (d < 1 || !responses.is_array() || responses.empty()) {
    throw std::invalid_argument("scheme file needs d >= 1 and a non-empty response list");
  }
  const auto m = static_cast<Eigen::Index>(responses.size());
  BinaryMatrix support = BinaryMatrix::Zero(m, d);
  Vector base_prob(m);
  for (Eigen::Index o = 0; o < m; ++o) {
    const auto& r = responses[static_cast<std::size_t>(o)];
    for (int x : r.at("support").get<std::vector<int>>()) {
      if (x < 0 || x >= d) {
        throw std::invalid_argument("support element out of range in response " +
                                    std::to_string(o));
      }
      support(o, x) = 1;
    }
    base_prob[o] = r.at("base_prob").get<double>();
  }
  SupportScheme scheme(std::move(support), std::move(base_prob), PrivacyBudget(epsilon));
  if (in.contains("k")) {
    const int k = in.at("k").get<int>();
    if (k != scheme.constant_support_size()) {
      throw std::invalid_argument("scheme file k does not match its responses");
    }
  }
  return scheme;
}

void save_scheme(const SupportScheme& scheme, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << serialize_scheme(scheme) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

SupportScheme load_scheme(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scheme(buf.str());
}

}  // namespace ldpfreq
