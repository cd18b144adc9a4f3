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
#include "sbn/protocol.hpp"
#include "sbn/schedule.hpp"
#include "sbn/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace sbn {

/// Counter-based signal source. The draw for agent i at step t is
///   u = splitmix64(splitmix64(splitmix64(seed) ^ t) ^ i) >> 11, scaled to [0, 1),
/// mapped through the inverse CDF of l_i(. | theta*). Draws depend only on
/// (seed, t, i), never on how many draws came before.
class SignalSampler
{
public:
  explicit SignalSampler(std::uint64_t seed)
    : seed_(seed)
  {}

  static std::uint64_t splitmix64(std::uint64_t z) noexcept
  {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform(std::uint64_t t, std::size_t agent) const noexcept
  {
    auto const bits = splitmix64(splitmix64(splitmix64(seed_) ^ t) ^ agent);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  std::size_t sample(SignalStructure const &s, Hypothesis truth, std::uint64_t t,
                     std::size_t agent) const
  {
    double const u   = uniform(t, agent);
    auto const   row = s.row(truth);
    double       cdf = 0.0;
    for (std::size_t w = 0; w + 1 < row.size(); ++w)
    {
      cdf += row[w];
      if (u < cdf)
      {
        return w;
      }
    }
    return row.size() - 1;
  }

  /// One signal per agent for step t, each drawn from l_i(. | theta*).
  std::vector<std::size_t> sample_signals(LikelihoodModel const &model, std::uint64_t t) const
  {
    std::vector<std::size_t> out(model.agent_count());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
      out[i] = sample(model.structures[i], model.true_state, t, i);
    }
    return out;
  }

  std::uint64_t seed() const noexcept
  {
    return seed_;
  }

private:
  std::uint64_t seed_;
};

struct SimulationConfig
{
  LikelihoodModel model;
  DirectedGraph   graph;
  std::uint64_t   a       = 1;
  std::uint64_t   horizon = 1;
  /// Empty means uniform priors for every agent.
  std::vector<std::vector<double>> priors;
  std::uint64_t                    seed          = 0;
  std::uint64_t                    record_stride = 1;
  /// When set, the log-linear pooling baseline runs on the same signals.
  std::optional<WeightMatrix> baseline;
};

/// Recorded beliefs. Belief arrays are flattened as [record][agent][hypothesis].
struct Trajectory
{
  std::size_t                agents     = 0;
  std::size_t                hypotheses = 0;
  Hypothesis                 true_state = 0;
  std::uint64_t              a          = 1;
  std::vector<std::uint64_t> times;
  std::vector<std::uint8_t>  trigger_flags;
  std::vector<double>        log_mu;
  std::vector<double>        log_pi;

  std::size_t records() const noexcept
  {
    return times.size();
  }

  double mu(std::size_t record, Vertex i, Hypothesis p) const
  {
    return log_mu.at(offset(record, i, p));
  }

  double pi(std::size_t record, Vertex i, Hypothesis p) const
  {
    return log_pi.at(offset(record, i, p));
  }

  void push(std::uint64_t t, bool trigger, NetworkState const &net)
  {
    times.push_back(t);
    trigger_flags.push_back(trigger ? 1 : 0);
    for (auto const &agent : net.agents)
    {
      log_mu.insert(log_mu.end(), agent.log_mu.begin(), agent.log_mu.end());
      log_pi.insert(log_pi.end(), agent.log_pi.begin(), agent.log_pi.end());
    }
  }

  friend bool operator==(Trajectory const &, Trajectory const &) = default;

private:
  std::size_t offset(std::size_t record, Vertex i, Hypothesis p) const
  {
    return (record * agents + i) * hypotheses + p;
  }
};

struct RunResult
{
  Trajectory                protocol;
  std::optional<Trajectory> baseline;
  std::vector<std::string>  warnings;
  bool                      strongly_connected = true;
};

/// Thrown when a configuration fails model validation.
class ModelError : public Error
{
public:
  explicit ModelError(std::vector<Violation> violations)
    : Error(summarize(violations))
    , violations_(std::move(violations))
  {}

  std::vector<Violation> const &violations() const noexcept
  {
    return violations_;
  }

private:
  static std::string summarize(std::vector<Violation> const &violations)
  {
    std::string out = "model validation failed:";
    for (auto const &v : violations)
    {
      out += std::string(" [") + to_string(v.kind) + "] " + v.message + ";";
    }
    return out;
  }

  std::vector<Violation> violations_;
};

namespace detail {

inline NetworkState initial_state(SimulationConfig const &config)
{
  auto const n = config.graph.size();
  auto const m = config.model.hypothesis_count();
  if (config.priors.empty())
  {
    return NetworkState::uniform(n, m);
  }
  require(config.priors.size() == n, "one prior per agent is required");
  NetworkState net;
  for (auto const &prior : config.priors)
  {
    require(prior.size() == m, "prior has the wrong number of hypotheses");
    double const sum = std::accumulate(prior.begin(), prior.end(), 0.0);
    require(std::abs(sum - 1.0) <= kProbabilityTolerance, "priors must be normalized");
    net.agents.push_back(AgentState::from_prior(prior));
  }
  return net;
}

}  // namespace detail

/// Runs the protocol for t = 1..horizon. Records every record_stride-th step,
/// every trigger step, and the final step.
inline RunResult run(SimulationConfig const &config)
{
  auto violations = validate_model(config.model);
  if (!violations.empty())
  {
    throw ModelError(std::move(violations));
  }
  auto const n = config.graph.size();
  detail::require(config.model.agent_count() == n,
                  "model has " + std::to_string(config.model.agent_count()) +
                      " agents but the graph has " + std::to_string(n));
  detail::require(config.horizon >= 1, "horizon must be positive");
  detail::require(config.horizon <= TriggerSchedule::kMaxTime, "horizon exceeds 2^62");
  detail::require(config.record_stride >= 1, "record stride must be positive");

  RunResult result;
  result.strongly_connected = is_strongly_connected(config.graph);
  if (!result.strongly_connected)
  {
    result.warnings.emplace_back(
        "graph is not strongly connected; rate bounds are not guaranteed");
  }

  TriggerSchedule const schedule(config.a);
  SignalSampler const   sampler(config.seed);
  auto const            m = config.model.hypothesis_count();

  auto make_trajectory = [&](std::uint64_t a) {
    Trajectory traj;
    traj.agents     = n;
    traj.hypotheses = m;
    traj.true_state = config.model.true_state;
    traj.a          = a;
    return traj;
  };

  NetworkState net = detail::initial_state(config);
  result.protocol  = make_trajectory(config.a);
  std::optional<NetworkState> base_net;
  if (config.baseline)
  {
    base_net        = net;
    result.baseline = make_trajectory(1);
  }

  std::uint64_t next_trigger = 1;
  for (std::uint64_t t = 1; t <= config.horizon; ++t)
  {
    auto const signals = sampler.sample_signals(config.model, t);
    step_network(net, config.model, config.graph, schedule, signals);
    if (base_net)
    {
      log_linear_baseline_update(*base_net, config.model, config.graph, *config.baseline, signals);
    }
    bool const trigger = t == next_trigger;
    if (trigger)
    {
      next_trigger = schedule.next_trigger_after(t);
    }
    if (trigger || t % config.record_stride == 0 || t == config.horizon)
    {
      result.protocol.push(t, trigger, net);
      if (base_net)
      {
        result.baseline->push(t, true, *base_net);
      }
    }
  }
  return result;
}

/// -log mu_t(theta) / t at every recorded time.
inline std::vector<double> instantaneous_rate_series(Trajectory const &traj, Vertex agent,
                                                     Hypothesis false_hyp)
{
  detail::require(false_hyp != traj.true_state, "rate series needs a false hypothesis");
  detail::require(agent < traj.agents && false_hyp < traj.hypotheses, "index out of range");
  std::vector<double> out(traj.records());
  for (std::size_t r = 0; r < traj.records(); ++r)
  {
    out[r] = -traj.mu(r, agent, false_hyp) / static_cast<double>(traj.times[r]);
  }
  return out;
}

/// Fewest dense records / trigger records the slope fit accepts.
inline constexpr std::size_t kMinDenseTailPoints   = 10;
inline constexpr std::size_t kMinTriggerTailPoints = 3;

/// Least-squares slope of -log mu_t(theta) against t over the tail of the run.
/// With a = 1 the tail is the last tail_fraction of the recorded points. With
/// a > 1 only trigger records are used (between triggers the belief is frozen)
/// and the tail is the last tail_fraction of them, at least three.
inline double empirical_asymptotic_rate(Trajectory const &traj, Vertex agent, Hypothesis false_hyp,
                                        double tail_fraction = 0.5)
{
  detail::require(tail_fraction > 0.0 && tail_fraction < 1.0, "tail_fraction must lie in (0, 1)");
  detail::require(false_hyp != traj.true_state, "rate estimate needs a false hypothesis");
  detail::require(agent < traj.agents && false_hyp < traj.hypotheses, "index out of range");

  std::vector<std::size_t> points;
  for (std::size_t r = 0; r < traj.records(); ++r)
  {
    if (traj.a == 1 || traj.trigger_flags[r] != 0)
    {
      points.push_back(r);
    }
  }
  auto const take = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(points.size())));
  auto const minimum = traj.a == 1 ? kMinDenseTailPoints : kMinTriggerTailPoints;
  auto const count   = std::min(points.size(), std::max(take, minimum));
  detail::require(count >= minimum && points.size() >= minimum,
                  "trajectory tail has " + std::to_string(std::min(take, points.size())) +
                      " usable points, need at least " + std::to_string(minimum));

  std::span<std::size_t const> tail(points.data() + points.size() - count, count);
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (auto r : tail)
  {
    mean_t += static_cast<double>(traj.times[r]);
    mean_y += -traj.mu(r, agent, false_hyp);
  }
  mean_t /= static_cast<double>(count);
  mean_y /= static_cast<double>(count);
  double sxy = 0.0;
  double sxx = 0.0;
  for (auto r : tail)
  {
    double const dt = static_cast<double>(traj.times[r]) - mean_t;
    sxy += dt * (-traj.mu(r, agent, false_hyp) - mean_y);
    sxx += dt * dt;
  }
  detail::require(sxx > 0.0, "tail times are degenerate");
  return sxy / sxx;
}

/// Number of worker threads for seed sweeps: SBN_THREADS if set, otherwise the
/// hardware concurrency.
inline unsigned worker_threads()
{
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (char const *env = std::getenv("SBN_THREADS"))
  {
    try
    {
      auto const cap = std::stoul(env);
      if (cap >= 1)
      {
        return static_cast<unsigned>(std::min<unsigned long>(cap, 1024));
      }
    }
    catch (std::exception const &)
    {
    }
  }
  return hw;
}

/// Runs fn(k) for k in [0, count) on up to `threads` workers. Each index is
/// handled by exactly one worker; results must be written to per-index slots.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn)
{
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1)
  {
    for (std::size_t k = 0; k < count; ++k)
    {
      fn(k);
    }
    return;
  }
  std::vector<std::thread>        pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w)
  {
    pool.emplace_back([&, w] {
      try
      {
        for (std::size_t k = w; k < count; k += threads)
        {
          fn(k);
        }
      }
      catch (...)
      {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &th : pool)
  {
    th.join();
  }
  for (auto const &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace sbn
