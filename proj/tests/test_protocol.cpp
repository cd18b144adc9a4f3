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
#include "sbn/protocol.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace {

using sbn::AgentState;
using sbn::DirectedGraph;
using sbn::Edge;
using sbn::LikelihoodModel;
using sbn::NetworkState;
using sbn::SignalStructure;
using sbn::TriggerSchedule;

std::vector<double> exp_all(std::vector<double> const &v)
{
  std::vector<double> out;
  for (double x : v)
  {
    out.push_back(std::exp(x));
  }
  return out;
}

std::vector<double> logs(std::vector<double> const &v)
{
  std::vector<double> out;
  for (double x : v)
  {
    out.push_back(std::log(x));
  }
  return out;
}

TEST(LogSumExp, StableForLargeMagnitudes)
{
  std::vector<double> const big = {1000.0, 1000.0};
  EXPECT_NEAR(sbn::log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
  std::vector<double> tiny = {-1000.0, -1000.0 - std::log(3.0)};
  sbn::normalize_log(tiny);
  EXPECT_NEAR(std::exp(tiny[0]), 0.75, 1e-12);
  EXPECT_NEAR(std::exp(tiny[1]), 0.25, 1e-12);
}

TEST(BayesLocalUpdate, SingleStep)
{
  SignalStructure const s({{0.5, 0.5}, {0.9, 0.1}});
  auto const            next = sbn::bayes_local_update(AgentState::uniform(2), s, 0);
  auto const            pi   = exp_all(next.log_pi);
  EXPECT_NEAR(pi[0], 5.0 / 14.0, 1e-15);
  EXPECT_NEAR(pi[1], 9.0 / 14.0, 1e-15);
  EXPECT_EQ(next.log_mu, AgentState::uniform(2).log_mu);
  EXPECT_THROW((void)sbn::bayes_local_update(AgentState::uniform(2), s, 2), sbn::Error);
}

TEST(MinFusion, PicksEntrywiseMinimumThenNormalizes)
{
  auto const                           own = logs({0.9, 0.1});
  auto const                           nb  = logs({0.3, 0.7});
  std::vector<std::span<double const>> in  = {nb};
  auto const                           raw = exp_all(sbn::min_fusion_numerators(own, in));
  EXPECT_NEAR(raw[0], 0.3, 1e-15);
  EXPECT_NEAR(raw[1], 0.1, 1e-15);
  auto const mu = exp_all(sbn::min_fusion_update(own, in));
  EXPECT_NEAR(mu[0], 0.75, 1e-15);
  EXPECT_NEAR(mu[1], 0.25, 1e-15);

  std::vector<std::span<double const>> none;
  auto const                           alone = exp_all(sbn::min_fusion_update(own, none));
  EXPECT_NEAR(alone[0], 0.9, 1e-15);
}

TEST(HoldUpdate, LeavesStateUnchanged)
{
  auto s   = AgentState::uniform(3);
  s.log_mu = logs({0.2, 0.3, 0.5});
  EXPECT_EQ(sbn::hold_update(s), s);
}

TEST(StepNetwork, HoldsActualBeliefsBetweenTriggers)
{
  auto const      model = sbn::instances::example_model();
  auto const      graph = sbn::instances::example_graph();
  TriggerSchedule schedule(3);
  auto            net = NetworkState::uniform(7, 2);
  std::mt19937_64 rng(4);
  std::vector<std::size_t> signals(7);
  std::vector<std::vector<double>> at_four;
  for (std::uint64_t t = 1; t <= 13; ++t)
  {
    for (auto &s : signals)
    {
      s = rng() % 2;
    }
    auto const before = net;
    sbn::step_network(net, model, graph, schedule, signals);
    ASSERT_EQ(net.t, t);
    if (t == 4)
    {
      for (auto const &a : net.agents)
      {
        at_four.push_back(a.log_mu);
      }
    }
    if (t >= 5 && t <= 12)
    {
      for (std::size_t i = 0; i < 7; ++i)
      {
        EXPECT_EQ(net.agents[i].log_mu, at_four[i]) << "t=" << t << " agent " << i;
      }
    }
    if (t == 13)
    {
      // The fusion at 13 uses the mu values held since 4.
      for (std::size_t i = 0; i < 7; ++i)
      {
        std::vector<std::span<double const>> in;
        for (auto j : graph.in_neighbors(i))
        {
          in.emplace_back(before.agents[j].log_mu);
        }
        EXPECT_EQ(net.agents[i].log_mu, sbn::min_fusion_update(net.agents[i].log_pi, in));
      }
    }
  }
}

TEST(StepNetwork, IsolatedAgentTracksItsLocalPosterior)
{
  LikelihoodModel model{sbn::HypothesisSet::numbered(2), {SignalStructure({{0.5, 0.5}, {0.9, 0.1}})}, 0};
  DirectedGraph const graph(1);
  TriggerSchedule     every(1);
  auto                net = NetworkState::uniform(1, 2);
  std::vector<std::size_t> sig = {0};
  for (int t = 0; t < 50; ++t)
  {
    sig[0] = t % 3 == 0 ? 1 : 0;
    sbn::step_network(net, model, graph, every, sig);
    for (std::size_t p = 0; p < 2; ++p)
    {
      EXPECT_NEAR(net.agents[0].log_mu[p], net.agents[0].log_pi[p], 1e-12);
    }
  }
}

TEST(StepNetwork, IdenticalAgentsOnACycleStayIdentical)
{
  std::vector<Edge> const edges = {{0, 1}, {1, 2}, {2, 0}};
  auto const              graph = DirectedGraph::bidirectional(3, edges);
  SignalStructure const   s({{0.4, 0.6}, {0.7, 0.3}});
  LikelihoodModel         model{sbn::HypothesisSet::numbered(2), {s, s, s}, 0};
  TriggerSchedule         every(1);
  auto                    net = NetworkState::uniform(3, 2);
  std::vector<std::size_t> sig(3);
  for (int t = 0; t < 200; ++t)
  {
    std::fill(sig.begin(), sig.end(), static_cast<std::size_t>(t % 2));
    sbn::step_network(net, model, graph, every, sig);
    EXPECT_EQ(net.agents[0], net.agents[1]);
    EXPECT_EQ(net.agents[1], net.agents[2]);
  }
}

TEST(StepNetwork, RejectsMismatchedInputs)
{
  auto const      model = sbn::instances::example_model();
  auto const      graph = sbn::instances::example_graph();
  auto            net   = NetworkState::uniform(7, 2);
  std::vector<std::size_t> few(3, 0);
  EXPECT_THROW(sbn::step_network(net, model, graph, TriggerSchedule(2), few), sbn::Error);
}

TEST(LogLinearBaseline, SingleAgentIsBayes)
{
  LikelihoodModel model{sbn::HypothesisSet::numbered(2), {SignalStructure({{0.5, 0.5}, {0.9, 0.1}})}, 0};
  DirectedGraph const graph(1);
  sbn::WeightMatrix const w(graph, {{1.0}});
  auto                 net = NetworkState::uniform(1, 2);
  std::vector<std::size_t> sig = {0};
  for (int t = 0; t < 30; ++t)
  {
    sig[0] = t % 4 == 0 ? 1 : 0;
    sbn::log_linear_baseline_update(net, model, graph, w, sig);
    for (std::size_t p = 0; p < 2; ++p)
    {
      EXPECT_NEAR(net.agents[0].log_mu[p], net.agents[0].log_pi[p], 1e-12);
    }
  }
  EXPECT_EQ(net.t, 30u);
}

TEST(LogLinearBaseline, SymmetricNetworkStaysSymmetric)
{
  std::vector<Edge> const edges = {{0, 1}};
  auto const              graph = DirectedGraph::bidirectional(2, edges);
  SignalStructure const   s({{0.2, 0.8}, {0.6, 0.4}});
  LikelihoodModel         model{sbn::HypothesisSet::numbered(2), {s, s}, 1};
  auto const              w   = sbn::lazy_metropolis_weights(graph);
  auto                    net = NetworkState::uniform(2, 2);
  std::vector<std::size_t> sig(2);
  for (int t = 0; t < 100; ++t)
  {
    std::fill(sig.begin(), sig.end(), static_cast<std::size_t>((t * 7) % 3 == 0));
    sbn::log_linear_baseline_update(net, model, graph, w, sig);
    EXPECT_EQ(net.agents[0], net.agents[1]);
  }
}

TEST(Protocol, BeliefsStayFiniteAndNormalizedOverLongRuns)
{
  auto const      model = sbn::instances::example_model();
  auto const      graph = sbn::instances::example_graph();
  TriggerSchedule schedule(2);
  auto            net = NetworkState::uniform(7, 2);
  std::mt19937_64 rng(5);
  std::vector<std::size_t> sig(7);
  for (int t = 0; t < 20000; ++t)
  {
    for (std::size_t i = 0; i < 7; ++i)
    {
      sig[i] = rng() % 2;
    }
    sbn::step_network(net, model, graph, schedule, sig);
  }
  for (auto const &a : net.agents)
  {
    for (auto const *v : {&a.log_pi, &a.log_mu})
    {
      for (double x : *v)
      {
        EXPECT_TRUE(std::isfinite(x) || x == -std::numeric_limits<double>::infinity());
        EXPECT_LE(x, 1e-12);
      }
      EXPECT_NEAR(sbn::log_sum_exp(*v), 0.0, 1e-12);
    }
  }
}

}  // namespace
