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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sbn {

using Vertex = std::size_t;
using Edge   = std::pair<Vertex, Vertex>;

/// Directed communication graph. An edge (i, j) means agent i transmits to
/// agent j, so j reads the beliefs of its in-neighbors. Self-loops are never
/// stored: every agent always has access to its own state.
class DirectedGraph
{
public:
  DirectedGraph() = default;

  explicit DirectedGraph(std::size_t n)
    : out_(n)
    , in_(n)
  {}

  DirectedGraph(std::size_t n, std::span<Edge const> edges)
    : DirectedGraph(n)
  {
    for (auto const &[from, to] : edges)
    {
      add_edge(from, to);
    }
  }

  /// Each listed pair induces both directed edges.
  static DirectedGraph bidirectional(std::size_t n, std::span<Edge const> edges)
  {
    DirectedGraph g(n);
    for (auto const &[u, v] : edges)
    {
      g.add_edge(u, v);
      g.add_edge(v, u);
    }
    return g;
  }

  void add_edge(Vertex from, Vertex to)
  {
    detail::require(from < size() && to < size(),
                    "edge (" + std::to_string(from) + "," + std::to_string(to) +
                        ") has an endpoint outside [0, " + std::to_string(size()) + ")");
    detail::require(from != to, "self-loop on vertex " + std::to_string(from) + " is not allowed");
    insert_sorted(out_[from], to);
    insert_sorted(in_[to], from);
  }

  std::size_t size() const noexcept
  {
    return out_.size();
  }

  std::vector<Vertex> const &out_neighbors(Vertex v) const
  {
    return out_.at(v);
  }

  std::vector<Vertex> const &in_neighbors(Vertex v) const
  {
    return in_.at(v);
  }

  bool has_edge(Vertex from, Vertex to) const
  {
    auto const &row = out_.at(from);
    return std::binary_search(row.begin(), row.end(), to);
  }

  /// All directed edges in lexicographic order.
  std::vector<Edge> edges() const
  {
    std::vector<Edge> result;
    for (Vertex u = 0; u < size(); ++u)
    {
      for (Vertex v : out_[u])
      {
        result.emplace_back(u, v);
      }
    }
    return result;
  }

  bool is_symmetric() const
  {
    for (Vertex u = 0; u < size(); ++u)
    {
      if (out_[u] != in_[u])
      {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(DirectedGraph const &, DirectedGraph const &) = default;

private:
  static void insert_sorted(std::vector<Vertex> &row, Vertex v)
  {
    auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it == row.end() || *it != v)
    {
      row.insert(it, v);
    }
  }

  std::vector<std::vector<Vertex>> out_;
  std::vector<std::vector<Vertex>> in_;
};

/// All-pairs hop distances. Unreachable pairs report an empty optional;
/// callers never see the internal sentinel.
class DistanceMatrix
{
public:
  explicit DistanceMatrix(std::size_t n)
    : n_(n)
    , dist_(n * n, kUnreachable)
  {}

  std::size_t size() const noexcept
  {
    return n_;
  }

  std::optional<std::size_t> at(Vertex from, Vertex to) const
  {
    auto d = dist_.at(index(from, to));
    if (d == kUnreachable)
    {
      return std::nullopt;
    }
    return d;
  }

  bool reachable(Vertex from, Vertex to) const
  {
    return dist_.at(index(from, to)) != kUnreachable;
  }

  /// Distance for a pair known to be reachable.
  std::size_t hops(Vertex from, Vertex to) const
  {
    auto d = at(from, to);
    detail::require(d.has_value(), "vertex " + std::to_string(to) + " is unreachable from " +
                                       std::to_string(from));
    return *d;
  }

  bool all_reachable() const
  {
    return std::none_of(dist_.begin(), dist_.end(),
                        [](std::size_t d) { return d == kUnreachable; });
  }

  void set(Vertex from, Vertex to, std::size_t d)
  {
    dist_.at(index(from, to)) = d;
  }

private:
  static constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

  std::size_t index(Vertex from, Vertex to) const
  {
    detail::require(from < n_ && to < n_, "distance index out of range");
    return from * n_ + to;
  }

  std::size_t              n_;
  std::vector<std::size_t> dist_;
};

/// BFS from every vertex along out-edges.
inline DistanceMatrix shortest_path_matrix(DirectedGraph const &g)
{
  auto const     n = g.size();
  DistanceMatrix dist(n);
  std::vector<std::size_t> level(n);
  std::vector<bool>        seen(n);
  std::queue<Vertex>       frontier;
  for (Vertex source = 0; source < n; ++source)
  {
    std::fill(seen.begin(), seen.end(), false);
    seen[source]  = true;
    level[source] = 0;
    frontier.push(source);
    while (!frontier.empty())
    {
      auto u = frontier.front();
      frontier.pop();
      dist.set(source, u, level[u]);
      for (Vertex v : g.out_neighbors(u))
      {
        if (!seen[v])
        {
          seen[v]  = true;
          level[v] = level[u] + 1;
          frontier.push(v);
        }
      }
    }
  }
  return dist;
}

inline bool is_strongly_connected(DirectedGraph const &g)
{
  return shortest_path_matrix(g).all_reachable();
}

namespace detail {

inline void require_strongly_connected(DistanceMatrix const &dist)
{
  require(dist.all_reachable(), "graph is not strongly connected");
}

}  // namespace detail

/// Longest shortest path. Zero for a single vertex.
inline std::size_t diameter(DistanceMatrix const &dist)
{
  detail::require_strongly_connected(dist);
  std::size_t result = 0;
  for (Vertex i = 0; i < dist.size(); ++i)
  {
    for (Vertex j = 0; j < dist.size(); ++j)
    {
      result = std::max(result, dist.hops(i, j));
    }
  }
  return result;
}

inline std::size_t diameter(DirectedGraph const &g)
{
  return diameter(shortest_path_matrix(g));
}

/// Largest distance from i to any other vertex.
inline std::size_t eccentricity(DistanceMatrix const &dist, Vertex i)
{
  detail::require_strongly_connected(dist);
  detail::require(dist.size() >= 2, "eccentricity needs at least two vertices");
  detail::require(i < dist.size(), "vertex out of range");
  std::size_t result = 0;
  for (Vertex j = 0; j < dist.size(); ++j)
  {
    result = std::max(result, dist.hops(i, j));
  }
  return result;
}

/// 1 / max_{j != i} d(i, j).
inline double eccentricity_centrality(DistanceMatrix const &dist, Vertex i)
{
  return 1.0 / static_cast<double>(eccentricity(dist, i));
}

inline double eccentricity_centrality(DirectedGraph const &g, Vertex i)
{
  return eccentricity_centrality(shortest_path_matrix(g), i);
}

/// sum_{j != i} delta^{d(i, j)}, accumulated shell by shell so that vertices
/// with the same distance profile get bitwise-identical values.
inline double decay_centrality(DistanceMatrix const &dist, Vertex i, double delta)
{
  detail::require(delta > 0.0 && delta < 1.0, "decay parameter must lie in (0, 1)");
  detail::require_strongly_connected(dist);
  detail::require(i < dist.size(), "vertex out of range");
  std::vector<std::size_t> shell(dist.size(), 0);
  for (Vertex j = 0; j < dist.size(); ++j)
  {
    if (j != i)
    {
      ++shell[dist.hops(i, j)];
    }
  }
  double result = 0.0;
  for (std::size_t d = 1; d < shell.size(); ++d)
  {
    result += static_cast<double>(shell[d]) * std::pow(delta, static_cast<double>(d));
  }
  return result;
}

inline double decay_centrality(DirectedGraph const &g, Vertex i, double delta)
{
  return decay_centrality(shortest_path_matrix(g), i, delta);
}

/// Row-stochastic consensus weights conforming to a graph: W[i][j] > 0 exactly
/// when j == i or j is an in-neighbor of i.
class WeightMatrix
{
public:
  static constexpr double kRowSumTolerance = 1e-9;

  WeightMatrix(DirectedGraph const &g, std::vector<std::vector<double>> rows)
    : rows_(std::move(rows))
  {
    auto const n = g.size();
    detail::require(rows_.size() == n, "weight matrix must have one row per agent");
    for (Vertex i = 0; i < n; ++i)
    {
      detail::require(rows_[i].size() == n, "weight matrix row " + std::to_string(i) +
                                                " has the wrong length");
      double sum = 0.0;
      for (Vertex j = 0; j < n; ++j)
      {
        double const w       = rows_[i][j];
        bool const   allowed = (i == j) || g.has_edge(j, i);
        detail::require(std::isfinite(w) && w >= 0.0, "weight matrix entries must be non-negative");
        if (allowed)
        {
          detail::require(w > 0.0, "weight W[" + std::to_string(i) + "][" + std::to_string(j) +
                                       "] must be positive on a self-loop or edge");
        }
        else
        {
          detail::require(w == 0.0, "weight W[" + std::to_string(i) + "][" + std::to_string(j) +
                                        "] is nonzero but (" + std::to_string(j) + "," +
                                        std::to_string(i) + ") is not an edge");
        }
        sum += w;
      }
      detail::require(std::abs(sum - 1.0) <= kRowSumTolerance,
                      "weight matrix row " + std::to_string(i) + " does not sum to 1");
    }
  }

  std::size_t size() const noexcept
  {
    return rows_.size();
  }

  double operator()(Vertex i, Vertex j) const
  {
    return rows_[i][j];
  }

  std::vector<std::vector<double>> const &rows() const noexcept
  {
    return rows_;
  }

private:
  std::vector<std::vector<double>> rows_;
};

/// Lazy Metropolis-Hastings weights W[i][j] = 1 / (2 max(deg i, deg j)) on a
/// symmetric graph. On a graph with one-way edges this falls back to
/// W[i][i] = 1/2 and an even split of the other half across in-neighbors.
inline WeightMatrix lazy_metropolis_weights(DirectedGraph const &g)
{
  auto const                       n = g.size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  bool const                       symmetric = g.is_symmetric();
  for (Vertex i = 0; i < n; ++i)
  {
    auto const &in = g.in_neighbors(i);
    if (in.empty())
    {
      rows[i][i] = 1.0;
      continue;
    }
    double off = 0.0;
    for (Vertex j : in)
    {
      double w = symmetric ? 1.0 / (2.0 * static_cast<double>(std::max(in.size(),
                                                                         g.in_neighbors(j).size())))
                           : 1.0 / (2.0 * static_cast<double>(in.size()));
      rows[i][j] = w;
      off += w;
    }
    rows[i][i] = 1.0 - off;
  }
  return WeightMatrix(g, std::move(rows));
}

struct PowerIterationOptions
{
  double        tolerance      = 1e-10;
  std::uint64_t max_iterations = 100000;
};

/// Stationary distribution nu = nu W by power iteration from the uniform
/// vector. Requires a strongly connected graph; positive self-weights make the
/// chain aperiodic.
inline std::vector<double> eigenvector_centrality(DirectedGraph const &g, WeightMatrix const &w,
                                                  PowerIterationOptions options = {})
{
  auto const n = g.size();
  detail::require(w.size() == n, "weight matrix does not match the graph");
  detail::require(is_strongly_connected(g), "graph is not strongly connected");
  std::vector<double> nu(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::uint64_t iter = 0; iter < options.max_iterations; ++iter)
  {
    std::fill(next.begin(), next.end(), 0.0);
    for (Vertex i = 0; i < n; ++i)
    {
      for (Vertex j = 0; j < n; ++j)
      {
        next[j] += nu[i] * w(i, j);
      }
    }
    double sum = 0.0;
    for (double x : next)
    {
      sum += x;
    }
    double change = 0.0;
    for (Vertex j = 0; j < n; ++j)
    {
      next[j] /= sum;
      change = std::max(change, std::abs(next[j] - nu[j]));
    }
    nu.swap(next);
    if (change <= options.tolerance)
    {
      return nu;
    }
  }
  throw Error("eigenvector centrality did not converge");
}

}  // namespace sbn
