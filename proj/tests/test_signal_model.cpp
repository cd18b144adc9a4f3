//------------------------------------------------------------------------------
//
//   Copyright 2026 The sbn Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "sbn/instances.hpp"
#include "sbn/signal_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace {

using sbn::Hypothesis;
using sbn::LikelihoodModel;
using sbn::SignalStructure;

SignalStructure binary(double under_theta2)
{
  return SignalStructure({{0.5, 0.5}, {under_theta2, 1.0 - under_theta2}});
}

TEST(KlDivergence, KnownValues)
{
  std::vector<double> const half = {0.5, 0.5};
  EXPECT_EQ(sbn::kl_divergence(half, half), 0.0);
  std::vector<double> const q1 = {0.9, 0.1};
  EXPECT_NEAR(sbn::kl_divergence(half, q1), 0.5 * std::log(25.0 / 9.0), 1e-15);
  EXPECT_NEAR(sbn::kl_divergence(half, q1), 0.5108256237659907, 1e-12);
  std::vector<double> const q7 = {0.85, 0.15};
  EXPECT_NEAR(sbn::kl_divergence(half, q7), 0.5 * std::log(0.25 / 0.1275), 1e-15);
  EXPECT_NEAR(sbn::kl_divergence(half, q7), 0.33667227663188287, 1e-12);
}

TEST(KlDivergence, RejectsInvalidInputs)
{
  std::vector<double> const p = {0.5, 0.5};
  EXPECT_THROW((void)sbn::kl_divergence(p, std::vector<double>{1.0}), sbn::Error);
  EXPECT_THROW((void)sbn::kl_divergence(p, std::vector<double>{1.0, 0.0}), sbn::Error);
  EXPECT_THROW((void)sbn::kl_divergence(p, std::vector<double>{0.6, 0.6}), sbn::Error);
}

TEST(KlDivergence, GibbsInequalityOnRandomPairs)
{
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 2000; ++trial)
  {
    auto const s  = sbn::instances::random_structure(2, 2 + trial % 5, rng);
    double     d  = sbn::kl_divergence(s.row(0), s.row(1));
    double     gap = 0.0;
    for (std::size_t w = 0; w < s.signal_count(); ++w)
    {
      gap = std::max(gap, std::abs(s.likelihood(w, 0) - s.likelihood(w, 1)));
    }
    EXPECT_GE(d, 0.0);
    EXPECT_EQ(d > 0.0, gap > 1e-12);
    EXPECT_EQ(sbn::kl_divergence(s.row(0), s.row(0)), 0.0);
  }
}

TEST(RelativeEntropyTable, ExampleModel)
{
  auto const kl = sbn::relative_entropy_table(sbn::instances::example_model());
  EXPECT_GT(kl(0, 0, 1), kl(6, 0, 1));
  EXPECT_GT(kl(6, 0, 1), kl(4, 0, 1));
  EXPECT_GT(kl(4, 0, 1), 0.0);
  for (std::size_t i : {1, 2, 3, 5})
  {
    EXPECT_EQ(kl(i, 0, 1), 0.0);
    EXPECT_EQ(kl(i, 1, 0), 0.0);
  }
  EXPECT_NEAR(kl(4, 0, 1), 0.5 * std::log(25.0 / 21.0), 1e-15);
  EXPECT_NEAR(kl(4, 0, 1), 0.08717669357238891, 1e-12);
  EXPECT_EQ(kl(0, 0, 0), 0.0);
}

TEST(SourceSet, ExampleModelAndDegenerateCases)
{
  auto const model = sbn::instances::example_model();
  EXPECT_EQ(sbn::source_set(model, 0, 1), (std::vector<sbn::Vertex>{0, 4, 6}));
  EXPECT_EQ(sbn::source_set(model, 1, 0), (std::vector<sbn::Vertex>{0, 4, 6}));
  EXPECT_THROW((void)sbn::source_set(model, 1, 1), sbn::Error);

  LikelihoodModel blind{sbn::HypothesisSet::numbered(2), {binary(0.5), binary(0.5)}, 0};
  EXPECT_TRUE(sbn::source_set(blind, 0, 1).empty());

  LikelihoodModel single{sbn::HypothesisSet::numbered(2), {binary(0.5), binary(0.8), binary(0.5)}, 0};
  EXPECT_EQ(sbn::source_set(single, 0, 1), std::vector<sbn::Vertex>{1});
}

TEST(SourceSet, SymmetricForBinarySignalModels)
{
  std::mt19937_64                        rng(9);
  std::uniform_real_distribution<double> draw(0.05, 0.95);
  std::bernoulli_distribution            blind(0.4);
  for (int trial = 0; trial < 200; ++trial)
  {
    LikelihoodModel model{sbn::HypothesisSet::numbered(2), {}, 0};
    for (int i = 0; i < 7; ++i)
    {
      model.structures.push_back(binary(blind(rng) ? 0.5 : draw(rng)));
    }
    EXPECT_EQ(sbn::source_set(model, 0, 1), sbn::source_set(model, 1, 0));
  }
}

TEST(ObservationalEquivalence, ExampleAgents)
{
  auto const model = sbn::instances::example_model();
  EXPECT_EQ(sbn::observationally_equivalent_set(model, 1), (std::vector<Hypothesis>{0, 1}));
  EXPECT_EQ(sbn::observationally_equivalent_set(model, 0), (std::vector<Hypothesis>{0}));
  for (sbn::Vertex i = 0; i < model.agent_count(); ++i)
  {
    auto const eq = sbn::observationally_equivalent_set(model, i);
    EXPECT_NE(std::find(eq.begin(), eq.end(), model.true_state), eq.end());
  }
}

TEST(ValidateModel, ExampleModelIsValid)
{
  EXPECT_TRUE(sbn::validate_model(sbn::instances::example_model()).empty());
}

TEST(ValidateModel, ZeroLikelihoodIsOnePositivityViolation)
{
  auto model          = sbn::instances::example_model();
  model.structures[2] = SignalStructure({{1.0, 0.0}, {0.5, 0.5}});
  auto const v        = sbn::validate_model(model);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, sbn::ViolationKind::NonPositiveLikelihood);
  EXPECT_EQ(v[0].agent, 2u);
  EXPECT_EQ(v[0].hypothesis, 0u);
  EXPECT_EQ(v[0].signal, 1u);
}

TEST(ValidateModel, IndistinguishablePairIsReportedPerOrderedPair)
{
  // theta2 and theta3 look the same to everyone.
  LikelihoodModel model{sbn::HypothesisSet::numbered(3),
                        {SignalStructure({{0.5, 0.5}, {0.8, 0.2}, {0.8, 0.2}}),
                         SignalStructure({{0.3, 0.7}, {0.5, 0.5}, {0.5, 0.5}})},
                        0};
  auto const v = sbn::validate_model(model);
  ASSERT_EQ(v.size(), 2u);
  for (auto const &x : v)
  {
    EXPECT_EQ(x.kind, sbn::ViolationKind::EmptySourceSet);
  }
  EXPECT_EQ(v[0].hypothesis, 1u);
  EXPECT_EQ(v[0].other, 2u);
  EXPECT_EQ(v[1].hypothesis, 2u);
  EXPECT_EQ(v[1].other, 1u);
}

TEST(ValidateModel, UnnormalizedRow)
{
  LikelihoodModel model{sbn::HypothesisSet::numbered(2), {SignalStructure({{0.5, 0.5}, {0.9, 0.2}})}, 0};
  auto const      v = sbn::validate_model(model);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, sbn::ViolationKind::RowNotNormalized);
}

TEST(HypothesisSet, Invariants)
{
  EXPECT_THROW(sbn::HypothesisSet({"only"}), sbn::Error);
  EXPECT_THROW(sbn::HypothesisSet({"a", "a"}), sbn::Error);
  EXPECT_EQ(sbn::HypothesisSet::numbered(3).label(2), "theta3");
}

TEST(Allocation, RejectsNonBijections)
{
  EXPECT_THROW(sbn::Allocation({0, 0, 1}), sbn::Error);
  EXPECT_THROW(sbn::Allocation({0, 3, 1}), sbn::Error);
  EXPECT_NO_THROW(sbn::Allocation({2, 0, 1}));
}

TEST(ApplyAllocation, IdentityAndSwap)
{
  auto const model = sbn::instances::example_model();
  EXPECT_EQ(sbn::apply_allocation(model.structures, sbn::Allocation::identity(7)), model.structures);

  auto const swapped = sbn::apply_allocation(model.structures, sbn::Allocation({4, 1, 2, 3, 0, 5, 6}));
  auto const before  = sbn::relative_entropy_table(model.structures);
  auto const after   = sbn::relative_entropy_table(swapped);
  EXPECT_EQ(after(4, 0, 1), before(0, 0, 1));
  EXPECT_EQ(after(0, 0, 1), before(4, 0, 1));
  for (std::size_t i : {1, 2, 3, 5, 6})
  {
    EXPECT_EQ(after(i, 0, 1), before(i, 0, 1));
  }
  EXPECT_THROW((void)sbn::apply_allocation(model.structures, sbn::Allocation::identity(3)), sbn::Error);
}

TEST(ApplyAllocation, PermutesTheAgentAxisOfTheKlTable)
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial)
  {
    auto const inst = sbn::instances::random_instance(rng);
    auto const n    = inst.structures.size();
    std::vector<sbn::Vertex> psi(n);
    std::iota(psi.begin(), psi.end(), sbn::Vertex{0});
    std::shuffle(psi.begin(), psi.end(), rng);
    auto const base  = sbn::relative_entropy_table(inst.structures);
    auto const moved = sbn::relative_entropy_table(sbn::apply_allocation(inst.structures, sbn::Allocation(psi)));
    auto const m     = base.hypothesis_count();
    for (std::size_t k = 0; k < n; ++k)
    {
      for (Hypothesis p = 0; p < m; ++p)
      {
        for (Hypothesis q = 0; q < m; ++q)
        {
          EXPECT_EQ(moved(psi[k], p, q), base(k, p, q));
        }
      }
    }
  }
}

}  // namespace
