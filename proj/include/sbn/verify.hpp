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

// Property suites run by `sbn verify`. Each suite stops at its first failed
// check and reports it.

#include "sbn/graph.hpp"
#include "sbn/instances.hpp"
#include "sbn/protocol.hpp"
#include "sbn/rates_alloc.hpp"
#include "sbn/schedule.hpp"
#include "sbn/signal_model.hpp"
#include "sbn/simulator.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace sbn::verify {

struct SuiteReport
{
  std::string name;
  bool        passed = true;
  std::string first_failure;
  std::size_t checks  = 0;
  std::size_t seeds   = 0;
  double      seconds = 0.0;
};

struct Options
{
  std::size_t   seeds          = 5;
  std::uint64_t protocol_steps = 100000;
  std::uint64_t drift_steps    = 1000000;
};

namespace detail {

class Checker
{
public:
  explicit Checker(SuiteReport &report)
    : report_(report)
  {}

  /// Records a check; returns false once any check has failed.
  bool operator()(bool ok, std::string const &what)
  {
    ++report_.checks;
    if (!ok && report_.passed)
    {
      report_.passed        = false;
      report_.first_failure = what;
    }
    return report_.passed;
  }

  bool ok() const noexcept
  {
    return report_.passed;
  }

private:
  SuiteReport &report_;
};

inline SuiteReport timed(std::string name, std::size_t seeds,
                         std::function<void(Checker &)> const &body)
{
  SuiteReport report;
  report.name  = std::move(name);
  report.seeds = seeds;
  auto const start = std::chrono::steady_clock::now();
  Checker    check(report);
  try
  {
    body(check);
  }
  catch (std::exception const &e)
  {
    check(false, std::string("exception: ") + e.what());
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline double log_sum_exp_abs(std::vector<double> const &x)
{
  return std::abs(log_sum_exp(x));
}

}  // namespace detail

/// Trigger recurrence identities and enumeration consistency.
inline SuiteReport schedule_suite()
{
  return detail::timed("schedule", 0, [](detail::Checker &check) {
    using boost::multiprecision::cpp_int;
    for (std::uint64_t a = 1; a <= 10; ++a)
    {
      auto const tag = "a=" + std::to_string(a);
      auto const big = first_triggers<cpp_int>(a, 41);
      check(big.front() == 1, tag + ": t_1 != 1");
      cpp_int power = a;
      for (std::size_t k = 0; k + 1 < big.size(); ++k)
      {
        if (!check(big[k + 1] - big[k] == power, tag + ": increment identity fails at k=" + std::to_string(k + 1)) ||
            !check(big[k + 1] == a * big[k] + 1, tag + ": t_{k+1} = a t_k + 1 fails at k=" + std::to_string(k + 1)))
        {
          return;
        }
        power *= a;
      }
      TriggerSchedule const sched(a);
      std::uint64_t const   horizon = 20000;
      auto const            listed  = sched.triggers_up_to(horizon);
      std::size_t           cursor  = 0;
      for (std::uint64_t t = 1; t <= horizon; ++t)
      {
        bool const in_list = cursor < listed.size() && listed[cursor] == t;
        if (in_list)
        {
          ++cursor;
        }
        if (!check(sched.is_trigger(t) == in_list, tag + ": is_trigger disagrees with triggers_up_to at t=" + std::to_string(t)))
        {
          return;
        }
      }
      for (std::size_t k = 0; k < listed.size(); ++k)
      {
        if (k < big.size())
        {
          check(cpp_int(listed[k]) == big[k], tag + ": 64-bit and multiprecision triggers differ");
        }
        if (k >= 2)
        {
          auto const g0 = listed[k - 1] - listed[k - 2];
          auto const g1 = listed[k] - listed[k - 1];
          check(g1 >= g0, tag + ": gaps decrease");
          if (a > 1)
          {
            check(g1 == a * g0, tag + ": gaps are not geometric");
          }
        }
      }
      if (a == 1)
      {
        continue;
      }
      auto const far = sched.triggers_up_to(TriggerSchedule::kMaxTime);
      for (std::size_t k = 0; k < std::min(far.size(), big.size()); ++k)
      {
        check(cpp_int(far[k]) == big.at(k), tag + ": long-range trigger mismatch");
      }
    }
  });
}

/// Belief-dynamics invariants on the seven-agent example with a = 3.
inline SuiteReport protocol_suite(Options const &options)
{
  return detail::timed("protocol", options.seeds, [&](detail::Checker &check) {
    auto const            model = instances::example_model();
    auto const            graph = instances::example_graph();
    auto const            kl    = relative_entropy_table(model);
    TriggerSchedule const sched(3);
    auto const            truth = model.true_state;
    auto const            n     = graph.size();

    // Normalization drift, positivity, min-domination and the information-flow
    // inequality, one seed over drift_steps.
    {
      SignalSampler const sampler(0);
      NetworkState        net = NetworkState::uniform(n, model.hypothesis_count());
      for (std::uint64_t t = 1; t <= options.drift_steps; ++t)
      {
        auto const         signals = sampler.sample_signals(model, t);
        NetworkState const before  = net;
        step_network(net, model, graph, sched, signals);
        for (Vertex i = 0; i < n && check.ok(); ++i)
        {
          auto const &s = net.agents[i];
          check(detail::log_sum_exp_abs(s.log_pi) < 1e-9 && detail::log_sum_exp_abs(s.log_mu) < 1e-9,
                "normalization drift at t=" + std::to_string(t));
          for (Hypothesis p = 0; p < s.log_pi.size(); ++p)
          {
            check(std::isfinite(s.log_pi[p]) && std::isfinite(s.log_mu[p]),
                  "non-finite belief at t=" + std::to_string(t));
          }
        }
        if (!check.ok())
        {
          return;
        }
        if (!sched.is_trigger(t))
        {
          for (Vertex i = 0; i < n; ++i)
          {
            check(net.agents[i].log_mu == before.agents[i].log_mu,
                  "actual belief changed off-trigger at t=" + std::to_string(t));
          }
          continue;
        }
        double log_eta = 0.0;
        for (Vertex i = 0; i < n; ++i)
        {
          log_eta = std::min({log_eta, before.agents[i].log_mu[truth], net.agents[i].log_pi[truth]});
        }
        for (Vertex i = 0; i < n; ++i)
        {
          std::vector<std::span<double const>> inputs;
          for (Vertex j : graph.in_neighbors(i))
          {
            inputs.emplace_back(before.agents[j].log_mu);
          }
          auto expected = min_fusion_numerators(net.agents[i].log_pi, inputs);
          normalize_log(expected);
          check(expected == net.agents[i].log_mu, "min-fusion mismatch at t=" + std::to_string(t));
          for (Vertex l : graph.in_neighbors(i))
          {
            for (Hypothesis p = 0; p < model.hypothesis_count(); ++p)
            {
              check(net.agents[i].log_mu[p] <= before.agents[l].log_mu[p] - log_eta + 1e-12,
                    "information-flow inequality fails at t=" + std::to_string(t));
            }
          }
        }
      }
    }

    // Local Bayesian rate of every source agent, averaged over seeds.
    std::vector<Vertex> const sources = source_set(kl, truth, 1);
    std::vector<double>       mean(n, 0.0);
    for (std::size_t seed = 0; seed < options.seeds; ++seed)
    {
      SignalSampler const sampler(seed);
      NetworkState        net = NetworkState::uniform(n, model.hypothesis_count());
      for (std::uint64_t t = 1; t <= options.protocol_steps; ++t)
      {
        step_network(net, model, graph, sched, sampler.sample_signals(model, t));
      }
      for (Vertex v : sources)
      {
        auto const &pi = net.agents[v].log_pi;
        mean[v] += (pi[1] - pi[truth]) / static_cast<double>(options.protocol_steps) /
                   static_cast<double>(options.seeds);
      }
    }
    for (Vertex v : sources)
    {
      double const target = -kl(v, truth, 1);
      check(std::abs(mean[v] - target) <= 0.05 * std::abs(target),
            "local rate of source agent " + std::to_string(v) + " is " + std::to_string(mean[v]) +
                ", expected about " + std::to_string(target));
    }

    // Determinism.
    SimulationConfig cfg;
    cfg.model         = model;
    cfg.graph         = graph;
    cfg.a             = 3;
    cfg.horizon       = 5000;
    cfg.seed          = 42;
    cfg.record_stride = 7;
    cfg.baseline      = lazy_metropolis_weights(graph);
    auto const first  = run(cfg);
    auto const second = run(cfg);
    check(first.protocol == second.protocol && *first.baseline == *second.baseline,
          "reruns with the same seed differ");
  });
}

/// Closed-form rate-bound properties.
inline SuiteReport rates_suite(Options const &options)
{
  return detail::timed("rates", options.seeds, [&](detail::Checker &check) {
    auto const model = instances::example_model();
    auto const graph = instances::example_graph();
    auto const kl    = relative_entropy_table(model);
    auto const dist  = shortest_path_matrix(graph);

    std::vector<Vertex> const expected_source = {0, 0, 0, 6, 4, 6, 6};
    for (Vertex i = 0; i < graph.size(); ++i)
    {
      auto const bound = theoretical_rate_bound(kl, dist, 3, i, 0, 1);
      check(bound.source == expected_source[i],
            "agent " + std::to_string(i) + " is governed by the wrong source");
    }

    auto const nu = eigenvector_centrality(graph, lazy_metropolis_weights(graph));
    double     best = 0.0;
    for (Vertex v = 0; v < graph.size(); ++v)
    {
      best = std::max(best, kl(v, 0, 1));
    }
    check(baseline_averaging_rate(kl, nu, 0, 1) < best, "averaging rate is not below the best source");

    std::mt19937_64 rng(20240601);
    for (std::size_t s = 0; s < options.seeds; ++s)
    {
      auto const inst   = instances::random_instance(rng);
      auto const ikl    = relative_entropy_table(inst.structures);
      auto const idist  = shortest_path_matrix(inst.graph);
      auto const m      = ikl.hypothesis_count();
      auto const n      = inst.graph.size();
      auto const tag    = "instance " + std::to_string(s);
      for (Hypothesis p = 0; p < m; ++p)
      {
        for (Hypothesis q = 0; q < m; ++q)
        {
          if (p == q)
          {
            continue;
          }
          auto const reference = theoretical_rate_bound(ikl, idist, 1, 0, p, q).value;
          for (Vertex i = 0; i < n; ++i)
          {
            check(theoretical_rate_bound(ikl, idist, 1, i, p, q).value == reference,
                  tag + ": a=1 bound depends on the agent");
            double previous = std::numeric_limits<double>::infinity();
            for (std::uint64_t a = 1; a <= 6; ++a)
            {
              double const value = theoretical_rate_bound(ikl, idist, a, i, p, q).value;
              check(value <= previous, tag + ": bound increases with a");
              previous = value;
            }
          }
        }
      }
      std::vector<Vertex> psi(n);
      for (Vertex v = 0; v < n; ++v)
      {
        psi[v] = v;
      }
      std::shuffle(psi.begin(), psi.end(), rng);
      auto const score = score_allocation(ikl, idist, inst.a, Allocation(psi));
      check(score.rho_min <= score.rho_avg, tag + ": rho_min exceeds rho_avg");
    }
  });
}

/// Exhaustive checks of the centrality allocation and the a^diameter
/// suboptimality bound.
inline SuiteReport alloc_suite(Options const &options)
{
  return detail::timed("alloc", options.seeds, [&](detail::Checker &check) {
    std::mt19937_64 rng(7);
    for (std::size_t s = 0; s < options.seeds && check.ok(); ++s)
    {
      auto const inst = instances::random_dominant_instance(rng);
      for (Metric metric : {Metric::Min, Metric::Avg})
      {
        auto const psi     = centrality_optimal_allocation(inst.structures, inst.graph, inst.a, metric);
        auto const central = rho_metrics(inst.structures, inst.graph, inst.a, psi).value(metric);
        auto const brute   = brute_force_allocation(inst.structures, inst.graph, inst.a, metric);
        check(central == brute.score.value(metric),
              "dominant instance " + std::to_string(s) + ": centrality allocation is not optimal for rho_" +
                  to_string(metric));
      }
    }
    for (std::size_t s = 0; s < options.seeds && check.ok(); ++s)
    {
      auto const inst = instances::random_instance(rng);
      for (Metric metric : {Metric::Min, Metric::Avg})
      {
        auto const report = suboptimality_ratio_check(inst.structures, inst.graph, inst.a, metric);
        check(report.holds, "instance " + std::to_string(s) + ": ratio " +
                                std::to_string(report.max_ratio) + " exceeds a^diameter = " +
                                std::to_string(report.bound) + " for rho_" + to_string(metric));
      }
    }
  });
}

inline std::vector<std::string> const &suite_names()
{
  static std::vector<std::string> const names = {"schedule", "protocol", "rates", "alloc", "all"};
  return names;
}

/// Runs the named suite ("all" runs every suite). Throws on an unknown name.
inline std::vector<SuiteReport> run_suites(std::string const &name, Options const &options)
{
  std::vector<SuiteReport> out;
  bool const               all = name == "all";
  if (!all && name != "schedule" && name != "protocol" && name != "rates" && name != "alloc")
  {
    throw Error("unknown suite \"" + name + "\"");
  }
  if (all || name == "schedule")
  {
    out.push_back(schedule_suite());
  }
  if (all || name == "protocol")
  {
    out.push_back(protocol_suite(options));
  }
  if (all || name == "rates")
  {
    out.push_back(rates_suite(options));
  }
  if (all || name == "alloc")
  {
    out.push_back(alloc_suite(options));
  }
  return out;
}

}  // namespace sbn::verify
