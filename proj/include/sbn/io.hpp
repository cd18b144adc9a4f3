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

// JSON documents for graphs, models, allocations and experiment configs, and
// CSV emission for trajectories.

#include "sbn/error.hpp"
#include "sbn/graph.hpp"
#include "sbn/signal_model.hpp"
#include "sbn/simulator.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace sbn::io {

using json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{})
  {
    throw Error("failed to format a floating-point value");
  }
  return std::string(buf, end);
}

namespace detail {

inline json const &member(json const &doc, char const *key, std::string const &where)
{
  if (!doc.is_object() || !doc.contains(key))
  {
    throw Error(where + ": missing field \"" + key + "\"");
  }
  return doc.at(key);
}

template <typename T>
T as(json const &value, std::string const &where)
{
  try
  {
    return value.get<T>();
  }
  catch (json::exception const &e)
  {
    throw Error(where + ": " + e.what());
  }
}

inline std::uint64_t as_count(json const &value, std::string const &where)
{
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
  {
    throw Error(where + ": expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

}  // namespace detail

/// {"n": int, "edges": [[i, j], ...], "bidirectional": bool}
inline DirectedGraph graph_from_json(json const &doc)
{
  auto const n     = detail::as_count(detail::member(doc, "n", "graph"), "graph.n");
  bool const bidir = doc.contains("bidirectional") &&
                     detail::as<bool>(doc.at("bidirectional"), "graph.bidirectional");
  std::vector<Edge> edges;
  for (auto const &e : detail::member(doc, "edges", "graph"))
  {
    if (!e.is_array() || e.size() != 2)
    {
      throw Error("graph.edges: each edge must be a pair [i, j]");
    }
    edges.emplace_back(detail::as_count(e[0], "graph.edges"), detail::as_count(e[1], "graph.edges"));
  }
  return bidir ? DirectedGraph::bidirectional(n, edges) : DirectedGraph(n, edges);
}

/// Symmetric graphs are written as undirected pairs with bidirectional=true.
inline json graph_to_json(DirectedGraph const &g)
{
  bool const symmetric = g.is_symmetric();
  json       edges     = json::array();
  for (auto const &[u, v] : g.edges())
  {
    if (!symmetric || u < v)
    {
      edges.push_back({u, v});
    }
  }
  return {{"n", g.size()}, {"edges", edges}, {"bidirectional", symmetric}};
}

/// {"hypotheses": [names], "true_state": index,
///  "agents": [{"signal_space": k, "likelihoods": [[row per hypothesis]]}]}
inline LikelihoodModel model_from_json(json const &doc)
{
  LikelihoodModel model;
  model.hypotheses = HypothesisSet(detail::as<std::vector<std::string>>(
      detail::member(doc, "hypotheses", "model"), "model.hypotheses"));
  model.true_state = detail::as_count(detail::member(doc, "true_state", "model"), "model.true_state");
  if (model.true_state >= model.hypotheses.size())
  {
    throw Error("model.true_state is not a hypothesis index");
  }
  std::size_t index = 0;
  for (auto const &agent : detail::member(doc, "agents", "model"))
  {
    auto const where = "model.agents[" + std::to_string(index++) + "]";
    auto const k     = detail::as_count(detail::member(agent, "signal_space", where), where);
    auto rows = detail::as<std::vector<std::vector<double>>>(detail::member(agent, "likelihoods", where),
                                                             where + ".likelihoods");
    if (rows.size() != model.hypotheses.size())
    {
      throw Error(where + ": expected one likelihood row per hypothesis");
    }
    for (auto const &row : rows)
    {
      if (row.size() != k)
      {
        throw Error(where + ": likelihood row length differs from signal_space");
      }
    }
    model.structures.emplace_back(std::move(rows));
  }
  if (model.structures.empty())
  {
    throw Error("model.agents must not be empty");
  }
  return model;
}

inline json model_to_json(LikelihoodModel const &model)
{
  json agents = json::array();
  for (auto const &s : model.structures)
  {
    agents.push_back({{"signal_space", s.signal_count()}, {"likelihoods", s.rows()}});
  }
  return {{"hypotheses", model.hypotheses.labels()},
          {"true_state", model.true_state},
          {"agents", agents}};
}

inline Allocation allocation_from_json(json const &doc)
{
  return Allocation(detail::as<std::vector<Vertex>>(detail::member(doc, "psi", "allocation"),
                                                    "allocation.psi"));
}

inline json allocation_to_json(Allocation const &psi)
{
  return {{"psi", psi.psi()}};
}

/// How the averaging baseline gets its weights.
struct BaselineChoice
{
  enum class Kind
  {
    None,
    LazyMetropolis,
    Explicit,
  };
  Kind                             kind = Kind::None;
  std::vector<std::vector<double>> weights;  // Explicit only

  friend bool operator==(BaselineChoice const &, BaselineChoice const &) = default;
};

struct SimulationSettings
{
  std::uint64_t                    horizon       = 100000;
  std::uint64_t                    seed          = 0;
  std::uint64_t                    record_stride = 1;
  std::vector<std::vector<double>> priors;  // empty = uniform
  BaselineChoice                     baseline;

  friend bool operator==(SimulationSettings const &, SimulationSettings const &) = default;
};

/// Combined experiment document: graph, model, communication parameter,
/// simulation settings and an optional allocation.
struct ExperimentConfig
{
  DirectedGraph             graph;
  LikelihoodModel           model;
  std::uint64_t             a = 1;
  SimulationSettings        simulation;
  std::optional<Allocation> allocation;

  friend bool operator==(ExperimentConfig const &, ExperimentConfig const &) = default;
};

inline ExperimentConfig config_from_json(json const &doc)
{
  ExperimentConfig cfg;
  cfg.graph = graph_from_json(detail::member(doc, "graph", "config"));
  cfg.model = model_from_json(detail::member(doc, "model", "config"));
  cfg.a     = detail::as_count(detail::member(doc, "a", "config"), "config.a");
  if (cfg.a < 1)
  {
    throw Error("config.a must be a positive integer");
  }
  if (cfg.model.agent_count() != cfg.graph.size())
  {
    throw Error("config: model has " + std::to_string(cfg.model.agent_count()) +
                " agents but graph.n is " + std::to_string(cfg.graph.size()));
  }
  if (doc.contains("simulation"))
  {
    auto const &sim = doc.at("simulation");
    auto       &out = cfg.simulation;
    if (sim.contains("horizon"))
    {
      out.horizon = detail::as_count(sim.at("horizon"), "simulation.horizon");
    }
    if (sim.contains("seed"))
    {
      out.seed = detail::as_count(sim.at("seed"), "simulation.seed");
    }
    if (sim.contains("record_stride"))
    {
      out.record_stride = detail::as_count(sim.at("record_stride"), "simulation.record_stride");
    }
    if (sim.contains("priors") && !sim.at("priors").is_null())
    {
      out.priors = detail::as<std::vector<std::vector<double>>>(sim.at("priors"), "simulation.priors");
    }
    if (sim.contains("baseline"))
    {
      auto const &b = sim.at("baseline");
      if (b.is_null() || (b.is_boolean() && !b.get<bool>()))
      {
        out.baseline.kind = BaselineChoice::Kind::None;
      }
      else if ((b.is_boolean() && b.get<bool>()) || (b.is_string() && b.get<std::string>() == "lazy_metropolis"))
      {
        out.baseline.kind = BaselineChoice::Kind::LazyMetropolis;
      }
      else if (b.is_object() && b.contains("weights"))
      {
        out.baseline.kind    = BaselineChoice::Kind::Explicit;
        out.baseline.weights = detail::as<std::vector<std::vector<double>>>(b.at("weights"),
                                                                             "simulation.baseline.weights");
      }
      else
      {
        throw Error("simulation.baseline must be false, \"lazy_metropolis\" or {\"weights\": [[...]]}");
      }
    }
    if (out.horizon < 1 || out.record_stride < 1)
    {
      throw Error("simulation.horizon and simulation.record_stride must be positive");
    }
  }
  if (doc.contains("allocation") && !doc.at("allocation").is_null())
  {
    cfg.allocation = allocation_from_json(doc.at("allocation"));
  }
  return cfg;
}

/// Normalized form: every field explicit, graphs in canonical edge order.
inline json config_to_json(ExperimentConfig const &cfg)
{
  json baseline;
  switch (cfg.simulation.baseline.kind)
  {
  case BaselineChoice::Kind::None:
    baseline = false;
    break;
  case BaselineChoice::Kind::LazyMetropolis:
    baseline = "lazy_metropolis";
    break;
  case BaselineChoice::Kind::Explicit:
    baseline = {{"weights", cfg.simulation.baseline.weights}};
    break;
  }
  json doc = {
      {"graph", graph_to_json(cfg.graph)},
      {"model", model_to_json(cfg.model)},
      {"a", cfg.a},
      {"simulation",
       {{"horizon", cfg.simulation.horizon},
        {"seed", cfg.simulation.seed},
        {"record_stride", cfg.simulation.record_stride},
        {"priors", cfg.simulation.priors.empty() ? json(nullptr) : json(cfg.simulation.priors)},
        {"baseline", baseline}}},
  };
  doc["allocation"] = cfg.allocation ? allocation_to_json(*cfg.allocation) : json(nullptr);
  return doc;
}

inline json read_json_file(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot open " + path);
  }
  try
  {
    return json::parse(in);
  }
  catch (json::exception const &e)
  {
    throw Error(path + ": " + e.what());
  }
}

inline ExperimentConfig load_config(std::string const &path)
{
  return config_from_json(read_json_file(path));
}

inline std::optional<WeightMatrix> baseline_weights(ExperimentConfig const &cfg)
{
  switch (cfg.simulation.baseline.kind)
  {
  case BaselineChoice::Kind::None:
    return std::nullopt;
  case BaselineChoice::Kind::LazyMetropolis:
    return lazy_metropolis_weights(cfg.graph);
  case BaselineChoice::Kind::Explicit:
    return WeightMatrix(cfg.graph, cfg.simulation.baseline.weights);
  }
  return std::nullopt;
}

inline SimulationConfig to_simulation_config(ExperimentConfig const &cfg)
{
  SimulationConfig sim;
  sim.model         = cfg.model;
  sim.graph         = cfg.graph;
  sim.a             = cfg.a;
  sim.horizon       = cfg.simulation.horizon;
  sim.seed          = cfg.simulation.seed;
  sim.record_stride = cfg.simulation.record_stride;
  sim.priors        = cfg.simulation.priors;
  sim.baseline      = baseline_weights(cfg);
  return sim;
}

inline json violation_to_json(Violation const &v)
{
  json out = {{"kind", to_string(v.kind)}, {"message", v.message}};
  auto put = [&](char const *key, std::size_t value) {
    if (value != Violation::npos)
    {
      out[key] = value;
    }
  };
  put("agent", v.agent);
  put("hypothesis", v.hypothesis);
  put("other", v.other);
  put("signal", v.signal);
  return out;
}

/// Columns: t, trigger, agent, hypothesis, log_mu, log_pi, rate.
inline void write_trajectory_csv(std::ostream &out, Trajectory const &traj)
{
  out << "t,trigger,agent,hypothesis,log_mu,log_pi,rate\n";
  for (std::size_t r = 0; r < traj.records(); ++r)
  {
    auto const t = traj.times[r];
    for (Vertex i = 0; i < traj.agents; ++i)
    {
      for (Hypothesis p = 0; p < traj.hypotheses; ++p)
      {
        double const mu = traj.mu(r, i, p);
        out << t << ',' << int(traj.trigger_flags[r]) << ',' << i << ',' << p << ','
            << format_double(mu) << ',' << format_double(traj.pi(r, i, p)) << ','
            << format_double(-mu / static_cast<double>(t)) << '\n';
      }
    }
  }
}

/// Instantaneous rejection rates of the false hypotheses, plus the baseline's
/// when it was run. Columns: t, trigger, agent, hypothesis, rate[, baseline_rate].
inline void write_rate_csv(std::ostream &out, Trajectory const &traj, Trajectory const *baseline)
{
  out << "t,trigger,agent,hypothesis,rate" << (baseline ? ",baseline_rate" : "") << '\n';
  for (std::size_t r = 0; r < traj.records(); ++r)
  {
    auto const   t  = traj.times[r];
    double const dt = static_cast<double>(t);
    for (Vertex i = 0; i < traj.agents; ++i)
    {
      for (Hypothesis p = 0; p < traj.hypotheses; ++p)
      {
        if (p == traj.true_state)
        {
          continue;
        }
        out << t << ',' << int(traj.trigger_flags[r]) << ',' << i << ',' << p << ','
            << format_double(-traj.mu(r, i, p) / dt);
        if (baseline)
        {
          out << ',' << format_double(-baseline->mu(r, i, p) / dt);
        }
        out << '\n';
      }
    }
  }
}

}  // namespace sbn::io
