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
#include "sbn/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using sbn::SignalSampler;
using sbn::SimulationConfig;
using sbn::Trajectory;

SimulationConfig example_config(std::uint64_t a, std::uint64_t horizon, std::uint64_t seed)
{
  SimulationConfig c;
  c.model         = sbn::instances::example_model();
  c.graph         = sbn::instances::example_graph();
  c.a             = a;
  c.horizon       = horizon;
  c.seed          = seed;
  c.record_stride = 10;
  return c;
}

TEST(SignalSampler, EmpiricalFrequencies)
{
  SignalSampler const   sampler(17);
  sbn::SignalStructure const s({{0.5, 0.5}, {0.9, 0.1}});
  sbn::SignalStructure const three({{0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}});
  std::size_t           ones = 0;
  std::vector<std::size_t> counts(3, 0);
  std::size_t const     draws = 200000;
  for (std::uint64_t t = 1; t <= draws; ++t)
  {
    ones += sampler.sample(s, 0, t, 3);
    ++counts[sampler.sample(three, 1, t, 0)];
  }
  EXPECT_NEAR(static_cast<double>(ones) / draws, 0.5, 0.01);
  EXPECT_NEAR(static_cast<double>(counts[0]) / draws, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(counts[2]) / draws, 0.8, 0.01);
}

TEST(SignalSampler, CounterBasedAndSeedSensitive)
{
  SignalSampler const a(1);
  SignalSampler const b(1);
  SignalSampler const c(2);
  int                 differ = 0;
  for (std::uint64_t t = 1; t <= 1000; ++t)
  {
    EXPECT_EQ(a.uniform(t, 5), b.uniform(t, 5));
    double const u = a.uniform(t, 5);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    differ += a.uniform(t, 5) != c.uniform(t, 5);
    differ += a.uniform(t, 5) != a.uniform(t, 6);
  }
  EXPECT_GT(differ, 1900);
}

TEST(Run, SameSeedGivesIdenticalTrajectories)
{
  auto const r1 = sbn::run(example_config(3, 2000, 11));
  auto const r2 = sbn::run(example_config(3, 2000, 11));
  auto const r3 = sbn::run(example_config(3, 2000, 12));
  EXPECT_EQ(r1.protocol, r2.protocol);
  EXPECT_FALSE(r1.protocol == r3.protocol);
}

TEST(Run, HorizonOneRecordsASingleTriggerStep)
{
  auto const r = sbn::run(example_config(3, 1, 0));
  ASSERT_EQ(r.protocol.records(), 1u);
  EXPECT_EQ(r.protocol.times[0], 1u);
  EXPECT_EQ(r.protocol.trigger_flags[0], 1u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Run, RecordsTriggersStrideAndFinalStep)
{
  auto c          = example_config(3, 205, 0);
  c.record_stride = 50;
  auto const r    = sbn::run(c);
  std::vector<std::uint64_t> const expected = {1, 4, 13, 40, 50, 100, 121, 150, 200, 205};
  EXPECT_EQ(r.protocol.times, expected);
  std::vector<std::uint8_t> const flags = {1, 1, 1, 1, 0, 0, 1, 0, 0, 0};
  EXPECT_EQ(r.protocol.trigger_flags, flags);
}

TEST(Run, RejectsInvalidModels)
{
  auto c = example_config(2, 10, 0);
  c.model.structures[1] = sbn::SignalStructure({{1.0, 0.0}, {0.5, 0.5}});
  try
  {
    (void)sbn::run(c);
    FAIL() << "expected ModelError";
  }
  catch (sbn::ModelError const &e)
  {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_EQ(e.violations()[0].kind, sbn::ViolationKind::NonPositiveLikelihood);
  }
}

TEST(Run, WarnsOnDisconnectedGraphs)
{
  auto c  = example_config(1, 20, 0);
  c.graph = sbn::DirectedGraph(7);
  auto const r = sbn::run(c);
  EXPECT_FALSE(r.strongly_connected);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Run, BaselineSharesTimesWithTheProtocol)
{
  auto c      = example_config(2, 300, 3);
  c.baseline  = sbn::lazy_metropolis_weights(c.graph);
  auto const r = sbn::run(c);
  ASSERT_TRUE(r.baseline.has_value());
  EXPECT_EQ(r.baseline->times, r.protocol.times);
  EXPECT_EQ(r.baseline->a, 1u);
  // Local beliefs see the same signals in both runs.
  EXPECT_EQ(r.baseline->log_pi, r.protocol.log_pi);
}

TEST(Run, PriorsAreValidated)
{
  auto c   = example_config(2, 5, 0);
  c.priors = std::vector<std::vector<double>>(7, {0.3, 0.7});
  EXPECT_NO_THROW((void)sbn::run(c));
  c.priors[2] = {0.0, 1.0};
  EXPECT_THROW((void)sbn::run(c), sbn::Error);
  c.priors.pop_back();
  EXPECT_THROW((void)sbn::run(c), sbn::Error);
}

Trajectory synthetic(std::uint64_t a, std::vector<std::uint64_t> const &times,
                     std::vector<std::uint8_t> const &flags, double rate, double offset)
{
  Trajectory traj;
  traj.agents     = 1;
  traj.hypotheses = 2;
  traj.true_state = 0;
  traj.a          = a;
  for (std::size_t r = 0; r < times.size(); ++r)
  {
    traj.times.push_back(times[r]);
    traj.trigger_flags.push_back(flags[r]);
    double const lf = -rate * static_cast<double>(times[r]) + offset;
    traj.log_mu.push_back(std::log1p(-std::exp(lf)));
    traj.log_mu.push_back(lf);
    traj.log_pi.push_back(0.0);
    traj.log_pi.push_back(0.0);
  }
  return traj;
}

TEST(EmpiricalRate, RecoversAnExactExponential)
{
  std::vector<std::uint64_t> times;
  std::vector<std::uint8_t>  flags;
  for (std::uint64_t t = 1; t <= 400; ++t)
  {
    times.push_back(t);
    flags.push_back(1);
  }
  auto const dense = synthetic(1, times, flags, 0.37, -2.0);
  EXPECT_NEAR(sbn::empirical_asymptotic_rate(dense, 0, 1), 0.37, 1e-9);

  auto const series = sbn::instantaneous_rate_series(dense, 0, 1);
  EXPECT_NEAR(series.back(), 0.37 + 2.0 / 400.0, 1e-12);
}

TEST(EmpiricalRate, UsesTriggerRecordsOnlyWhenAIsAboveOne)
{
  std::vector<std::uint64_t> const times = {1, 4, 10, 13, 20, 30, 40, 60, 100, 121};
  std::vector<std::uint8_t> const  flags = {1, 1, 0, 1, 0, 0, 1, 0, 0, 1};
  auto traj = synthetic(3, times, flags, 0.05, -1.0);
  // Corrupt non-trigger records; the estimate must ignore them.
  for (std::size_t r = 0; r < times.size(); ++r)
  {
    if (flags[r] == 0)
    {
      traj.log_mu[r * 2 + 1] = -1000.0;
    }
  }
  EXPECT_NEAR(sbn::empirical_asymptotic_rate(traj, 0, 1), 0.05, 1e-9);
}

TEST(EmpiricalRate, RejectsShortOrInvalidInputs)
{
  std::vector<std::uint64_t> const times = {1, 2, 3};
  std::vector<std::uint8_t> const  flags = {1, 1, 1};
  auto const                       traj  = synthetic(1, times, flags, 0.1, 0.0);
  EXPECT_THROW((void)sbn::empirical_asymptotic_rate(traj, 0, 1), sbn::Error);
  EXPECT_THROW((void)sbn::empirical_asymptotic_rate(traj, 0, 0), sbn::Error);
  EXPECT_THROW((void)sbn::empirical_asymptotic_rate(traj, 0, 1, 1.5), sbn::Error);
  EXPECT_THROW((void)sbn::instantaneous_rate_series(traj, 0, 0), sbn::Error);
  EXPECT_THROW((void)sbn::instantaneous_rate_series(traj, 3, 1), sbn::Error);
}

TEST(ParallelFor, VisitsEveryIndexOnce)
{
  std::vector<int> hits(97, 0);
  sbn::parallel_for(hits.size(), 4, [&](std::size_t k) { ++hits[k]; });
  for (int h : hits)
  {
    EXPECT_EQ(h, 1);
  }
}

}  // namespace
