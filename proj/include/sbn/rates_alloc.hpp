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
#include "sbn/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace sbn {

/// Lower bound on the rate at which one agent rejects theta_q when theta_p is
/// true, with the source agent that attains it.
struct RateBound
{
  double                value = 0.0;
  std::optional<Vertex> source;

  friend bool operator==(RateBound const &, RateBound const &) = default;
};

namespace detail {

/// a^k as a double. Exact while the result stays below 2^53.
inline double int_power(std::uint64_t a, std::size_t k)
{
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i)
  {
    r *= static_cast<double>(a);
  }
  return r;
}

inline void require_distinct(Hypothesis p, Hypothesis q)
{
  require(p != q, "rate bounds need two distinct hypotheses");
}

}  // namespace detail

/// max over sources v of K_v(p, q) / a^(d(v, i) + 1). Ties go to the smallest
/// source index; an empty (or unreachable) source set gives 0 with no source.
inline RateBound theoretical_rate_bound(KlTable const &kl, DistanceMatrix const &dist,
                                        std::uint64_t a, Vertex i, Hypothesis p, Hypothesis q)
{
  detail::require_distinct(p, q);
  detail::require(a >= 1, "communication parameter a must be positive");
  detail::require(kl.agent_count() == dist.size(), "KL table and graph sizes differ");
  RateBound best;
  for (Vertex v : source_set(kl, p, q))
  {
    auto const d = dist.at(v, i);
    if (!d)
    {
      continue;
    }
    double const value = kl(v, p, q) / detail::int_power(a, *d + 1);
    if (!best.source || value > best.value)
    {
      best = {value, v};
    }
  }
  return best;
}

inline RateBound theoretical_rate_bound(LikelihoodModel const &model, DirectedGraph const &graph,
                                        std::uint64_t a, Vertex i, Hypothesis p, Hypothesis q)
{
  return theoretical_rate_bound(relative_entropy_table(model), shortest_path_matrix(graph), a, i, p,
                                q);
}

/// Bounds for every agent and ordered pair, indexed (i, p, q). Diagonal
/// entries p == q are left at zero.
class RateTable
{
public:
  RateTable(KlTable const &kl, DistanceMatrix const &dist, std::uint64_t a)
    : n_(kl.agent_count())
    , m_(kl.hypothesis_count())
    , a_(a)
    , bounds_(n_ * m_ * m_)
  {
    for (Vertex i = 0; i < n_; ++i)
    {
      for (Hypothesis p = 0; p < m_; ++p)
      {
        for (Hypothesis q = 0; q < m_; ++q)
        {
          if (p != q)
          {
            bounds_[(i * m_ + p) * m_ + q] = theoretical_rate_bound(kl, dist, a, i, p, q);
          }
        }
      }
    }
  }

  RateBound const &operator()(Vertex i, Hypothesis p, Hypothesis q) const
  {
    detail::require(i < n_ && p < m_ && q < m_, "rate table index out of range");
    return bounds_[(i * m_ + p) * m_ + q];
  }

  std::size_t agent_count() const noexcept
  {
    return n_;
  }

  std::size_t hypothesis_count() const noexcept
  {
    return m_;
  }

  std::uint64_t a() const noexcept
  {
    return a_;
  }

private:
  std::size_t            n_;
  std::size_t            m_;
  std::uint64_t          a_;
  std::vector<RateBound> bounds_;
};

/// sum_i nu_i K_i(p, q): the common rate of linear / log-linear pooling.
inline double baseline_averaging_rate(KlTable const &kl, std::span<double const> nu, Hypothesis p,
                                      Hypothesis q)
{
  detail::require(nu.size() == kl.agent_count(), "centrality vector has the wrong length");
  double sum = 0.0;
  for (double x : nu)
  {
    detail::require(x > 0.0, "centralities must be positive");
    sum += x;
  }
  detail::require(std::abs(sum - 1.0) <= 1e-9, "centralities must sum to 1");
  double rate = 0.0;
  for (Vertex i = 0; i < nu.size(); ++i)
  {
    rate += nu[i] * kl(i, p, q);
  }
  return rate;
}

enum class Metric
{
  Min,
  Avg,
};

inline char const *to_string(Metric metric)
{
  return metric == Metric::Min ? "min" : "avg";
}

struct PairScore
{
  Hypothesis p;
  Hypothesis q;
  double     min_rate;  // min over agents
  double     avg_rate;  // mean over agents
};

struct AllocationScore
{
  double                 rho_min = 0.0;
  double                 rho_avg = 0.0;
  std::vector<PairScore> pairs;

  double value(Metric metric) const noexcept
  {
    return metric == Metric::Min ? rho_min : rho_avg;
  }
};

/// Scores an allocation. `structure_kl` is indexed by structure, not by
/// vertex; structure k sits at vertex psi[k].
///
/// The network average for a pair is accumulated as
///   sum_k K_k * (sum_{i governed by k} a^(n - e_i)) / a^n
/// with integer inner sums, so allocations that are mathematically tied score
/// bitwise-equal. When a^n is too large for that the plain sum is used.
inline AllocationScore score_allocation(KlTable const &structure_kl, DistanceMatrix const &dist,
                                        std::uint64_t a, Allocation const &psi)
{
  auto const n = dist.size();
  auto const m = structure_kl.hypothesis_count();
  detail::require(structure_kl.agent_count() == n && psi.size() == n,
                  "structures, allocation and graph sizes differ");
  detail::require(a >= 1, "communication parameter a must be positive");
  detail::require(m >= 2, "at least two hypotheses are required");

  double const scale       = detail::int_power(a, n);
  bool const   exact_grid  = scale * static_cast<double>(n) <= 0x1.0p53;
  std::vector<std::uint64_t> weight(n);
  std::vector<double>        values(n);

  AllocationScore score;
  score.rho_min = std::numeric_limits<double>::infinity();
  score.rho_avg = std::numeric_limits<double>::infinity();
  for (Hypothesis p = 0; p < m; ++p)
  {
    for (Hypothesis q = 0; q < m; ++q)
    {
      if (p == q)
      {
        continue;
      }
      std::fill(weight.begin(), weight.end(), 0);
      double pair_min = std::numeric_limits<double>::infinity();
      for (Vertex i = 0; i < n; ++i)
      {
        double                     best = 0.0;
        std::optional<std::size_t> best_k;
        std::size_t                best_e = 0;
        for (std::size_t k = 0; k < n; ++k)
        {
          double const kl = structure_kl(k, p, q);
          if (!(kl > kKlTolerance))
          {
            continue;
          }
          auto const d = dist.at(psi.vertex_of(k), i);
          if (!d)
          {
            continue;
          }
          double const value = kl / detail::int_power(a, *d + 1);
          if (!best_k || value > best || (value == best && psi.vertex_of(k) < psi.vertex_of(*best_k)))
          {
            best   = value;
            best_k = k;
            best_e = *d + 1;
          }
        }
        values[i] = best;
        pair_min  = std::min(pair_min, best);
        if (best_k && exact_grid)
        {
          weight[*best_k] += static_cast<std::uint64_t>(detail::int_power(a, n - best_e));
        }
      }
      double pair_avg = 0.0;
      if (exact_grid)
      {
        for (std::size_t k = 0; k < n; ++k)
        {
          if (weight[k] != 0)
          {
            pair_avg += structure_kl(k, p, q) * static_cast<double>(weight[k]);
          }
        }
        pair_avg = pair_avg / scale / static_cast<double>(n);
      }
      else
      {
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (double v : sorted)
        {
          pair_avg += v;
        }
        pair_avg /= static_cast<double>(n);
      }
      score.pairs.push_back({p, q, pair_min, pair_avg});
      score.rho_min = std::min(score.rho_min, pair_min);
      score.rho_avg = std::min(score.rho_avg, pair_avg);
    }
  }
  return score;
}

/// Allocates `structures` by psi and scores the result on `graph`.
inline AllocationScore rho_metrics(std::span<SignalStructure const> structures,
                                   DirectedGraph const &graph, std::uint64_t a,
                                   Allocation const &psi)
{
  auto const dist = shortest_path_matrix(graph);
  detail::require_strongly_connected(dist);
  return score_allocation(relative_entropy_table(structures), dist, a, psi);
}

/// Index u of a structure whose divergences, attenuated by a^diameter, still
/// beat every other structure's divergence on every ordered pair.
inline std::optional<std::size_t> dominance_check(KlTable const &structure_kl, std::uint64_t a,
                                                  std::size_t diameter)
{
  detail::require(a > 1, "dominance is defined for a > 1");
  auto const   n     = structure_kl.agent_count();
  auto const   m     = structure_kl.hypothesis_count();
  double const atten = detail::int_power(a, diameter);
  for (std::size_t u = 0; u < n; ++u)
  {
    bool dominant = true;
    for (Hypothesis p = 0; p < m && dominant; ++p)
    {
      for (Hypothesis q = 0; q < m && dominant; ++q)
      {
        if (p == q)
        {
          continue;
        }
        double const lhs = structure_kl(u, p, q) / atten;
        for (std::size_t w = 0; w < n && dominant; ++w)
        {
          dominant = w == u || lhs > structure_kl(w, p, q);
        }
      }
    }
    if (dominant)
    {
      return u;
    }
  }
  return std::nullopt;
}

inline std::optional<std::size_t> dominance_check(std::span<SignalStructure const> structures,
                                                  std::uint64_t a, std::size_t diameter)
{
  return dominance_check(relative_entropy_table(structures), a, diameter);
}

/// Places the dominant structure at the most central vertex: eccentricity
/// centrality for the min metric, decay centrality with delta = 1/a for the
/// average metric. Remaining structures fill the remaining vertices in
/// ascending order. Throws if no structure is dominant.
inline Allocation centrality_optimal_allocation(std::span<SignalStructure const> structures,
                                                DirectedGraph const &graph, std::uint64_t a,
                                                Metric metric)
{
  detail::require(a > 1, "centrality allocation needs a > 1");
  auto const n = graph.size();
  detail::require(structures.size() == n, "one signal structure per vertex is required");
  auto const dist = shortest_path_matrix(graph);
  detail::require_strongly_connected(dist);
  auto const u = dominance_check(structures, a, diameter(dist));
  if (!u)
  {
    throw Error("no dominant signal structure; centrality allocation does not apply (use brute force)");
  }
  if (n == 1)
  {
    return Allocation::identity(1);
  }

  Vertex center = 0;
  if (metric == Metric::Min)
  {
    for (Vertex i = 1; i < n; ++i)
    {
      if (eccentricity(dist, i) < eccentricity(dist, center))
      {
        center = i;
      }
    }
  }
  else
  {
    double const delta = 1.0 / static_cast<double>(a);
    double       best  = decay_centrality(dist, 0, delta);
    for (Vertex i = 1; i < n; ++i)
    {
      double const kappa = decay_centrality(dist, i, delta);
      if (kappa > best * (1.0 + 1e-12))
      {
        best   = kappa;
        center = i;
      }
    }
  }

  std::vector<Vertex> psi(n);
  psi[*u]     = center;
  Vertex next = 0;
  for (std::size_t k = 0; k < n; ++k)
  {
    if (k == *u)
    {
      continue;
    }
    if (next == center)
    {
      ++next;
    }
    psi[k] = next++;
  }
  return Allocation(std::move(psi));
}

inline constexpr std::size_t kMaxBruteForceSize = 10;

struct BruteForceResult
{
  Allocation      psi;
  AllocationScore score;
};

namespace detail {

struct Enumeration
{
  std::size_t     structures;
  DistanceMatrix  dist;
  KlTable         kl;
};

inline Enumeration prepare_enumeration(std::span<SignalStructure const> structures,
                                       DirectedGraph const &graph)
{
  auto const n = graph.size();
  require(n >= 1, "empty graph");
  require(n <= kMaxBruteForceSize, "brute force is limited to n <= " +
                                       std::to_string(kMaxBruteForceSize) + " (n! allocations)");
  require(structures.size() == n, "one signal structure per vertex is required");
  auto dist = shortest_path_matrix(graph);
  require_strongly_connected(dist);
  return {n, std::move(dist), relative_entropy_table(structures)};
}

/// Visits, in lexicographic order, every permutation whose first entry is
/// `first`.
template <typename Visit>
void for_each_permutation_with_head(std::size_t n, Vertex first, Visit &&visit)
{
  std::vector<Vertex> psi;
  psi.push_back(first);
  for (Vertex v = 0; v < n; ++v)
  {
    if (v != first)
    {
      psi.push_back(v);
    }
  }
  do
  {
    visit(psi);
  } while (std::next_permutation(psi.begin() + 1, psi.end()));
}

}  // namespace detail

/// Exhaustive maximizer over all n! allocations. Ties go to the
/// lexicographically smallest psi. The permutation space is sharded by its
/// first entry across up to `threads` workers and reduced in shard order.
inline BruteForceResult brute_force_allocation(std::span<SignalStructure const> structures,
                                               DirectedGraph const &graph, std::uint64_t a,
                                               Metric metric, unsigned threads = 1)
{
  auto const ctx = detail::prepare_enumeration(structures, graph);
  auto const n   = ctx.structures;
  std::vector<std::optional<BruteForceResult>> shard_best(n);
  auto run_shard = [&](Vertex head) {
    detail::for_each_permutation_with_head(n, head, [&](std::vector<Vertex> const &psi) {
      Allocation alloc(psi);
      auto       score = score_allocation(ctx.kl, ctx.dist, a, alloc);
      auto      &best  = shard_best[head];
      if (!best || score.value(metric) > best->score.value(metric))
      {
        best = BruteForceResult{std::move(alloc), std::move(score)};
      }
    });
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1)
  {
    for (Vertex head = 0; head < n; ++head)
    {
      run_shard(head);
    }
  }
  else
  {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
    {
      pool.emplace_back([&, w] {
        for (Vertex head = w; head < n; head += threads)
        {
          run_shard(head);
        }
      });
    }
    for (auto &th : pool)
    {
      th.join();
    }
  }
  std::optional<BruteForceResult> best;
  for (auto &candidate : shard_best)
  {
    if (!best || candidate->score.value(metric) > best->score.value(metric))
    {
      best = std::move(candidate);
    }
  }
  return std::move(*best);
}

struct SuboptimalityReport
{
  double              optimum   = 0.0;
  double              max_ratio = 0.0;
  double              bound     = 0.0;  // a^diameter
  bool                holds     = true;
  std::vector<Vertex> worst_psi;
};

/// Ratio of the optimal score to every allocation's score, checked against
/// a^diameter. A zero score against a zero optimum counts as ratio 1.
inline SuboptimalityReport suboptimality_ratio_check(std::span<SignalStructure const> structures,
                                                     DirectedGraph const &graph, std::uint64_t a,
                                                     Metric metric)
{
  detail::require(a > 1, "the suboptimality bound is stated for a > 1");
  auto const ctx = detail::prepare_enumeration(structures, graph);
  auto const n   = ctx.structures;

  std::vector<double>              values;
  std::vector<std::vector<Vertex>> perms;
  for (Vertex head = 0; head < n; ++head)
  {
    detail::for_each_permutation_with_head(n, head, [&](std::vector<Vertex> const &psi) {
      values.push_back(score_allocation(ctx.kl, ctx.dist, a, Allocation(psi)).value(metric));
      perms.push_back(psi);
    });
  }

  SuboptimalityReport report;
  report.optimum = *std::max_element(values.begin(), values.end());
  report.bound   = detail::int_power(a, diameter(ctx.dist));
  for (std::size_t k = 0; k < values.size(); ++k)
  {
    double ratio = 1.0;
    if (values[k] > 0.0)
    {
      ratio = report.optimum / values[k];
    }
    else if (report.optimum > 0.0)
    {
      ratio = std::numeric_limits<double>::infinity();
    }
    if (ratio > report.max_ratio)
    {
      report.max_ratio = ratio;
      report.worst_psi = perms[k];
    }
    if (report.optimum > report.bound * values[k])
    {
      report.holds = false;
    }
  }
  return report;
}

}  // namespace sbn
