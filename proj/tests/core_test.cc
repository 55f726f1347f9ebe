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
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "gtest/gtest.h"
#include "ldpfreq/oracle.h"

namespace ldpfreq {
namespace {

Matrix make2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

TEST(PrivacyBudgetTest, StoresExponential) {
  const PrivacyBudget b(std::log(3.0));
  EXPECT_NEAR(b.e_eps(), 3.0, 1e-15);
  EXPECT_THROW(PrivacyBudget(0.0), std::invalid_argument);
  EXPECT_THROW(PrivacyBudget(-1.0), std::invalid_argument);
  EXPECT_THROW(PrivacyBudget(std::numeric_limits<double>::infinity()),
               std::invalid_argument);
  EXPECT_THROW(PrivacyBudget(std::nan("")), std::invalid_argument);
}

TEST(EstimationModeTest, ParsesNames) {
  EXPECT_EQ(parse_estimation_mode("frequency"), EstimationMode::kFrequency);
  EXPECT_EQ(parse_estimation_mode("distribution"), EstimationMode::kDistribution);
  EXPECT_EQ(to_string(EstimationMode::kDistribution), "distribution");
  EXPECT_THROW(parse_estimation_mode("both"), std::invalid_argument);
}

TEST(ValidateLdpTest, RandomizedResponseSaturates) {
  const LdpReport r =
      validate_ldp(PerturbationMatrix(make2(0.75, 0.25, 0.25, 0.75)), PrivacyBudget(std::log(3.0)));
  EXPECT_TRUE(r.satisfied);
  EXPECT_NEAR(r.worst_ratio, 3.0, 1e-12);
}

TEST(ValidateLdpTest, RejectsLargeRatio) {
  const LdpReport r =
      validate_ldp(PerturbationMatrix(make2(0.9, 0.1, 0.1, 0.9)), PrivacyBudget(std::log(3.0)));
  EXPECT_FALSE(r.satisfied);
  EXPECT_NEAR(r.worst_ratio, 9.0, 1e-12);
}

TEST(ValidateLdpTest, ZeroEntriesGiveInfiniteRatio) {
  const LdpReport r = validate_ldp(PerturbationMatrix(Matrix::Identity(2, 2)), PrivacyBudget(5.0));
  EXPECT_FALSE(r.satisfied);
  EXPECT_TRUE(std::isinf(r.worst_ratio));
}

TEST(ValidateLdpTest, ZeroRowRejected) {
  Matrix m(3, 2);
  m << 0.5, 0.5, 0.5, 0.5, 0.0, 0.0;
  EXPECT_THROW(validate_ldp(PerturbationMatrix(m), PrivacyBudget(1.0)), std::invalid_argument);
}

TEST(PerturbationMatrixTest, RejectsBadColumns) {
  EXPECT_THROW(PerturbationMatrix(make2(0.5, 0.5, 0.4, 0.5)), std::invalid_argument);
  EXPECT_THROW(PerturbationMatrix(make2(1.2, 0.5, -0.2, 0.5)), std::invalid_argument);
  EXPECT_THROW(PerturbationMatrix(Matrix(0, 2)), std::invalid_argument);
}

TEST(SupportSchemeTest, ConstantSupportSaturatesBudget) {
  for (double eps : {0.3, 1.0, 2.5}) {
    const PrivacyBudget b(eps);
    for (auto [d, k] : {std::pair{4, 2}, {5, 1}, {6, 3}, {7, 6}}) {
      const SupportScheme s = full_subset_scheme(d, k, b);
      const LdpReport r = validate_ldp(s.perturbation_matrix(), b);
      EXPECT_TRUE(r.satisfied);
      EXPECT_NEAR(r.worst_ratio, b.e_eps(), 1e-9 * b.e_eps());
    }
  }
}

TEST(SupportSchemeTest, SupportMassIsConstant) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const PrivacyBudget b(0.2 + 2.0 * uniform_unit(rng));
    const SupportScheme s = random_orbit_scheme(5 + t % 3, 3, b, rng);
    const Vector mass = s.support_mass();
    EXPECT_LE(mass.maxCoeff() - mass.minCoeff(), 1e-9);
    EXPECT_LE(s.column_identity_error(), 1e-12);
  }
}

TEST(SupportSchemeTest, ColumnIdentityEnforced) {
  BinaryMatrix s = BinaryMatrix::Identity(3, 3);
  Vector p = Vector::Constant(3, 0.3);
  EXPECT_THROW(SupportScheme(s, p, PrivacyBudget(1.0)), std::invalid_argument);
  const SupportScheme u = SupportScheme::unchecked(s, p, PrivacyBudget(1.0));
  EXPECT_GT(u.column_identity_error(), 0.1);
  EXPECT_THROW(SupportScheme(s, Vector::Constant(3, -0.1), PrivacyBudget(1.0)),
               std::invalid_argument);
}

TEST(SupportSchemeTest, SupportSizes) {
  const SupportScheme s = full_subset_scheme(5, 2, PrivacyBudget(1.0));
  EXPECT_EQ(s.responses(), 10);
  EXPECT_EQ(s.constant_support_size(), 2);
  Rng rng(9);
  std::vector<std::pair<std::vector<int>, double>> orbits = {{{0}, 1.0}, {{0, 1}, 1.0}};
  EXPECT_EQ(orbit_scheme(5, orbits, PrivacyBudget(1.0)).constant_support_size(), 0);
}

TEST(FrequencyVectorTest, Validates) {
  EXPECT_NO_THROW(FrequencyVector(Vector::Constant(4, 0.25)));
  EXPECT_THROW(FrequencyVector(Vector::Constant(4, 0.3)), std::invalid_argument);
  Vector v(2);
  v << 1.5, -0.5;
  EXPECT_THROW(FrequencyVector{v}, std::invalid_argument);
  const FrequencyVector u = FrequencyVector::uniform(5);
  EXPECT_DOUBLE_EQ(u[3], 0.2);
}

TEST(SupportCountsTest, Merges) {
  SupportCounts a(3), b(3);
  a.counts = {1, 2, 3};
  a.n = 4;
  b.counts = {0, 1, 0};
  b.n = 1;
  a += b;
  EXPECT_EQ(a.counts, (std::vector<std::int64_t>{1, 3, 3}));
  EXPECT_EQ(a.n, 5);
  SupportCounts c(2);
  EXPECT_THROW(a += c, std::invalid_argument);
}

TEST(SchemeFileTest, RoundTrips) {
  const PrivacyBudget b(0.7);
  const SupportScheme s = full_subset_scheme(5, 2, b);
  const SupportScheme back = parse_scheme(serialize_scheme(s));
  EXPECT_EQ(back.dictionary_size(), 5);
  EXPECT_EQ(back.responses(), s.responses());
  EXPECT_EQ(back.support(), s.support());
  EXPECT_EQ(back.base_prob(), s.base_prob());
  EXPECT_DOUBLE_EQ(back.budget().epsilon(), 0.7);

  const std::string path = ::testing::TempDir() + "/scheme_roundtrip.json";
  save_scheme(s, path);
  EXPECT_EQ(load_scheme(path).support(), s.support());
  std::remove(path.c_str());
}

TEST(SchemeFileTest, RejectsMalformed) {
  EXPECT_ANY_THROW(parse_scheme("{"));
  EXPECT_ANY_THROW(parse_scheme(R"({"d": 2, "epsilon": 1, "k": 1,
      "responses": [{"support": [2], "base_prob": 0.5}]})"));
  EXPECT_ANY_THROW(parse_scheme(R"({"d": 2, "epsilon": 1, "k": 1,
      "responses": [{"support": [0], "base_prob": 0.1}, {"support": [1], "base_prob": 0.1}]})"));
  EXPECT_ANY_THROW(load_scheme("/nonexistent/scheme.json"));
}

}  // namespace
}  // namespace ldpfreq
