#pragma once
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

#include "sbn/error.hpp"
#include "sbn/graph.hpp"
#include "sbn/schedule.hpp"
#include "sbn/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sbn {

/// log(sum_k exp(x_k)) with max-shift.
inline double log_sum_exp(std::span<double const> x)
{
  detail::require(!x.empty(), "log_sum_exp of an empty vector");
  double const hi = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(hi))
  {
    return hi;
  }
  double sum = 0.0;
  for (double v : x)
  {
    sum += std::exp(v - hi);
  }
  return hi + std::log(sum);
}

/// Shifts x so that it is a log-probability vector.
inline void normalize_log(std::span<double> x)
{
  double const z = log_sum_exp(x);
  detail::require(std::isfinite(z), "cannot normalize a belief vector with no finite mass");
  for (double &v : x)
  {
    v -= z;
  }
}

/// Local belief pi and actual belief mu of one agent, both in log space.
struct AgentState
{
  std::vector<double> log_pi;
  std::vector<double> log_mu;

  static AgentState uniform(std::size_t m)
  {
    double const v = -std::log(static_cast<double>(m));
    return {std::vector<double>(m, v), std::vector<double>(m, v)};
  }

  /// Same prior for pi and mu. Entries must be positive; they are normalized.
  static AgentState from_prior(std::span<double const> prior)
  {
    AgentState s;
    for (double p : prior)
    {
      detail::require(p > 0.0 && std::isfinite(p), "priors must be strictly positive");
      s.log_pi.push_back(std::log(p));
    }
    normalize_log(s.log_pi);
    s.log_mu = s.log_pi;
    return s;
  }

  std::size_t hypothesis_count() const noexcept
  {
    return log_pi.size();
  }

  friend bool operator==(AgentState const &, AgentState const &) = default;
};

struct NetworkState
{
  std::uint64_t           t = 0;
  std::vector<AgentState> agents;

  static NetworkState uniform(std::size_t n, std::size_t m)
  {
    return {0, std::vector<AgentState>(n, AgentState::uniform(m))};
  }

  friend bool operator==(NetworkState const &, NetworkState const &) = default;
};

/// Bayesian update of the local belief on one private signal; mu is untouched.
inline AgentState bayes_local_update(AgentState state, SignalStructure const &structure,
                                     std::size_t signal)
{
  detail::require(signal < structure.signal_count(),
                  "signal " + std::to_string(signal) + " is outside the signal space");
  detail::require(structure.hypothesis_count() == state.log_pi.size(),
                  "belief and likelihood dimensions differ");
  for (Hypothesis p = 0; p < state.log_pi.size(); ++p)
  {
    state.log_pi[p] += std::log(structure.likelihood(signal, p));
  }
  normalize_log(state.log_pi);
  return state;
}

/// Entrywise minimum of the agent's (already advanced) local belief and its
/// in-neighbors' actual beliefs, before normalization.
inline std::vector<double> min_fusion_numerators(std::span<double const>              own_log_pi,
                                                 std::span<std::span<double const> const> neighbor_log_mus)
{
  std::vector<double> out(own_log_pi.begin(), own_log_pi.end());
  for (auto const &mu : neighbor_log_mus)
  {
    detail::require(mu.size() == out.size(), "neighbor belief has the wrong dimension");
    for (std::size_t p = 0; p < out.size(); ++p)
    {
      out[p] = std::min(out[p], mu[p]);
    }
  }
  return out;
}

/// New log mu after a trigger: the normalized entrywise minimum.
inline std::vector<double> min_fusion_update(std::span<double const>              own_log_pi,
                                             std::span<std::span<double const> const> neighbor_log_mus)
{
  auto out = min_fusion_numerators(own_log_pi, neighbor_log_mus);
  normalize_log(out);
  return out;
}

/// Between triggers the actual belief is held.
inline AgentState hold_update(AgentState const &state)
{
  return state;
}

namespace detail {

inline void check_signals(LikelihoodModel const &model, std::span<std::size_t const> signals,
                          std::size_t n)
{
  require(signals.size() == n, "one signal per agent is required");
  require(model.agent_count() == n, "model and graph disagree on the number of agents");
}

}  // namespace detail

/// Advances the network by one step: every agent runs the Bayesian update on
/// its signal; then, if the new time is a trigger, every agent fuses its new
/// local belief with the actual beliefs its in-neighbors held at the previous
/// step. Otherwise actual beliefs are held.
inline void step_network(NetworkState &net, LikelihoodModel const &model, DirectedGraph const &graph,
                         TriggerSchedule const &schedule, std::span<std::size_t const> signals)
{
  auto const n = graph.size();
  detail::check_signals(model, signals, n);
  detail::require(net.agents.size() == n, "network state does not match the graph");
  auto const t_next = net.t + 1;
  for (Vertex i = 0; i < n; ++i)
  {
    net.agents[i] = bayes_local_update(std::move(net.agents[i]), model.structures[i], signals[i]);
  }
  if (schedule.is_trigger(t_next))
  {
    std::vector<std::vector<double>>     fused(n);
    std::vector<std::span<double const>> inputs;
    for (Vertex i = 0; i < n; ++i)
    {
      inputs.clear();
      for (Vertex j : graph.in_neighbors(i))
      {
        inputs.emplace_back(net.agents[j].log_mu);
      }
      fused[i] = min_fusion_update(net.agents[i].log_pi, inputs);
    }
    for (Vertex i = 0; i < n; ++i)
    {
      net.agents[i].log_mu = std::move(fused[i]);
    }
  }
  net.t = t_next;
}

/// Log-linear opinion pooling, run every step:
///   log mu_i(t+1) = log l_i(s_i | .) + sum_j W[i][j] log mu_j(t), normalized.
/// The local beliefs are advanced as well so that trajectories stay comparable.
inline void log_linear_baseline_update(NetworkState &net, LikelihoodModel const &model,
                                       DirectedGraph const &graph, WeightMatrix const &weights,
                                       std::span<std::size_t const> signals)
{
  auto const n = graph.size();
  detail::check_signals(model, signals, n);
  detail::require(weights.size() == n, "weight matrix does not match the graph");
  detail::require(net.agents.size() == n, "network state does not match the graph");
  auto const                       m = model.hypothesis_count();
  std::vector<std::vector<double>> pooled(n, std::vector<double>(m, 0.0));
  for (Vertex i = 0; i < n; ++i)
  {
    auto const &s = model.structures[i];
    detail::require(signals[i] < s.signal_count(), "signal outside the signal space");
    for (Hypothesis p = 0; p < m; ++p)
    {
      double acc = std::log(s.likelihood(signals[i], p));
      for (Vertex j = 0; j < n; ++j)
      {
        double const w = weights(i, j);
        if (w != 0.0)
        {
          acc += w * net.agents[j].log_mu[p];
        }
      }
      pooled[i][p] = acc;
    }
    normalize_log(pooled[i]);
  }
  for (Vertex i = 0; i < n; ++i)
  {
    net.agents[i]        = bayes_local_update(std::move(net.agents[i]), model.structures[i], signals[i]);
    net.agents[i].log_mu = std::move(pooled[i]);
  }
  ++net.t;
}

}  // namespace sbn
