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

// Reference and randomized problem instances: the seven-agent binary example
// network, and generators for random strongly connected graphs and signal
// structures.

#include "sbn/graph.hpp"
#include "sbn/rates_alloc.hpp"
#include "sbn/signal_model.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace sbn::instances {

/// Seven agents on a line 0-1-2-3 with 4 and 5 hanging off 3 and 6 off 5;
/// every link is two-way.
inline DirectedGraph example_graph()
{
  std::vector<Edge> const edges = {{0, 1}, {1, 2}, {2, 3}, {4, 3}, {5, 3}, {6, 5}};
  return DirectedGraph::bidirectional(7, edges);
}

/// Binary hypotheses, theta1 true. Agents 0, 4 and 6 are informative with
/// l(signal 0 | theta2) = 0.9, 0.7, 0.85; everyone has l(signal 0 | theta1) = 0.5.
inline LikelihoodModel example_model()
{
  auto binary = [](double under_theta2) {
    return SignalStructure({{0.5, 0.5}, {under_theta2, 1.0 - under_theta2}});
  };
  LikelihoodModel model;
  model.hypotheses = HypothesisSet({"theta1", "theta2"});
  model.true_state = 0;
  for (double x : {0.9, 0.5, 0.5, 0.5, 0.7, 0.5, 0.85})
  {
    model.structures.push_back(binary(x));
  }
  return model;
}

/// A random directed Hamiltonian cycle plus independent extra edges.
inline DirectedGraph random_strongly_connected(std::size_t n, double extra_edge_probability,
                                               std::mt19937_64 &rng)
{
  DirectedGraph       g(n);
  std::vector<Vertex> order(n);
  for (Vertex v = 0; v < n; ++v)
  {
    order[v] = v;
  }
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; n > 1 && k < n; ++k)
  {
    g.add_edge(order[k], order[(k + 1) % n]);
  }
  std::bernoulli_distribution extra(extra_edge_probability);
  for (Vertex u = 0; u < n; ++u)
  {
    for (Vertex v = 0; v < n; ++v)
    {
      if (u != v && extra(rng))
      {
        g.add_edge(u, v);
      }
    }
  }
  return g;
}

/// Rows with entries drawn from [0.05, 1] and normalized.
inline SignalStructure random_structure(std::size_t m, std::size_t k, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> draw(0.05, 1.0);
  std::vector<std::vector<double>>       rows(m, std::vector<double>(k));
  for (auto &row : rows)
  {
    double sum = 0.0;
    for (auto &x : row)
    {
      x = draw(rng);
      sum += x;
    }
    for (auto &x : row)
    {
      x /= sum;
    }
  }
  return SignalStructure(std::move(rows));
}

/// Uniform rows perturbed by at most `eps` per entry: weakly informative.
inline SignalStructure near_uniform_structure(std::size_t m, std::size_t k, double eps,
                                              std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> draw(-eps, eps);
  std::vector<std::vector<double>>       rows(m, std::vector<double>(k));
  for (auto &row : rows)
  {
    double sum = 0.0;
    for (auto &x : row)
    {
      x = 1.0 / static_cast<double>(k) + draw(rng);
      sum += x;
    }
    for (auto &x : row)
    {
      x /= sum;
    }
  }
  return SignalStructure(std::move(rows));
}

/// m signals; under theta_p signal p has probability `peak`, the rest share the remainder.
inline SignalStructure peaked_structure(std::size_t m, double peak)
{
  double const                     rest = (1.0 - peak) / static_cast<double>(m - 1);
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, rest));
  for (std::size_t p = 0; p < m; ++p)
  {
    rows[p][p] = peak;
  }
  return SignalStructure(std::move(rows));
}

struct AllocationInstance
{
  DirectedGraph                graph;
  std::vector<SignalStructure> structures;
  std::uint64_t                a = 2;
};

/// n in {4, 5, 6}, a in {2, 3}, two or three hypotheses, arbitrary structures.
inline AllocationInstance random_instance(std::mt19937_64 &rng)
{
  std::uniform_int_distribution<std::size_t>   pick_n(4, 6);
  std::uniform_int_distribution<std::size_t>   pick_m(2, 3);
  std::uniform_int_distribution<std::size_t>   pick_k(2, 4);
  std::uniform_int_distribution<std::uint64_t> pick_a(2, 3);
  std::uniform_real_distribution<double>       pick_p(0.0, 0.5);
  AllocationInstance                           inst;
  auto const                                   n = pick_n(rng);
  auto const                                   m = pick_m(rng);
  inst.a     = pick_a(rng);
  inst.graph = random_strongly_connected(n, pick_p(rng), rng);
  for (std::size_t i = 0; i < n; ++i)
  {
    inst.structures.push_back(random_structure(m, pick_k(rng), rng));
  }
  return inst;
}

/// Like random_instance, but one structure (at a random index) dominates the
/// others even after attenuation by a^diameter.
inline AllocationInstance random_dominant_instance(std::mt19937_64 &rng)
{
  std::uniform_int_distribution<std::size_t>   pick_n(4, 6);
  std::uniform_int_distribution<std::size_t>   pick_m(2, 3);
  std::uniform_int_distribution<std::size_t>   pick_k(2, 4);
  std::uniform_int_distribution<std::uint64_t> pick_a(2, 3);
  std::uniform_real_distribution<double>       pick_p(0.0, 0.5);
  std::uniform_real_distribution<double>       pick_eps(0.0, 0.03);
  std::uniform_real_distribution<double>       pick_peak(0.85, 0.95);
  while (true)
  {
    AllocationInstance inst;
    auto const         n = pick_n(rng);
    auto const         m = pick_m(rng);
    inst.a               = pick_a(rng);
    inst.graph           = random_strongly_connected(n, pick_p(rng), rng);
    std::uniform_int_distribution<std::size_t> pick_u(0, n - 1);
    auto const                                 u = pick_u(rng);
    for (std::size_t i = 0; i < n; ++i)
    {
      inst.structures.push_back(i == u ? peaked_structure(m, pick_peak(rng))
                                       : near_uniform_structure(m, pick_k(rng), pick_eps(rng), rng));
    }
    if (dominance_check(inst.structures, inst.a, diameter(inst.graph)) == u)
    {
      return inst;
    }
  }
}

}  // namespace sbn::instances
