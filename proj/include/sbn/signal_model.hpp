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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sbn {

using Hypothesis = std::size_t;

/// Likelihood entries this close to one another count as equal, and KL values
/// at or below it count as zero divergence.
inline constexpr double kKlTolerance = 1e-12;

/// Row-normalization tolerance for likelihood tables.
inline constexpr double kRowTolerance = 1e-12;

/// Normalization tolerance for arbitrary probability vectors given to
/// kl_divergence.
inline constexpr double kProbabilityTolerance = 1e-9;

class HypothesisSet
{
public:
  HypothesisSet() = default;

  explicit HypothesisSet(std::vector<std::string> labels)
    : labels_(std::move(labels))
  {
    detail::require(labels_.size() >= 2, "at least two hypotheses are required");
    std::set<std::string> unique(labels_.begin(), labels_.end());
    detail::require(unique.size() == labels_.size(), "hypothesis labels must be unique");
  }

  /// theta1, theta2, ... thetaM
  static HypothesisSet numbered(std::size_t m)
  {
    std::vector<std::string> labels;
    for (std::size_t p = 1; p <= m; ++p)
    {
      labels.push_back("theta" + std::to_string(p));
    }
    return HypothesisSet(std::move(labels));
  }

  std::size_t size() const noexcept
  {
    return labels_.size();
  }

  std::string const &label(Hypothesis p) const
  {
    return labels_.at(p);
  }

  std::vector<std::string> const &labels() const noexcept
  {
    return labels_;
  }

  friend bool operator==(HypothesisSet const &, HypothesisSet const &) = default;

private:
  std::vector<std::string> labels_;
};

/// One agent's family of conditional likelihoods: row p is l(. | theta_p) over
/// a finite signal space. Only the shape is enforced on construction; content
/// problems (zeros, bad normalization) are reported by validate_model so that
/// they can be surfaced as data.
class SignalStructure
{
public:
  SignalStructure() = default;

  explicit SignalStructure(std::vector<std::vector<double>> rows)
    : rows_(std::move(rows))
  {
    detail::require(!rows_.empty(), "a signal structure needs at least one hypothesis row");
    detail::require(!rows_.front().empty(), "the signal space must be non-empty");
    for (auto const &row : rows_)
    {
      detail::require(row.size() == rows_.front().size(),
                      "all likelihood rows must cover the same signal space");
    }
  }

  std::size_t hypothesis_count() const noexcept
  {
    return rows_.size();
  }

  std::size_t signal_count() const noexcept
  {
    return rows_.empty() ? 0 : rows_.front().size();
  }

  double likelihood(std::size_t signal, Hypothesis p) const
  {
    return rows_.at(p).at(signal);
  }

  std::span<double const> row(Hypothesis p) const
  {
    return rows_.at(p);
  }

  std::vector<std::vector<double>> const &rows() const noexcept
  {
    return rows_;
  }

  bool all_positive() const
  {
    return std::all_of(rows_.begin(), rows_.end(), [](auto const &row) {
      return std::all_of(row.begin(), row.end(), [](double x) { return x > 0.0; });
    });
  }

  bool rows_normalized() const
  {
    return std::all_of(rows_.begin(), rows_.end(), [](auto const &row) {
      return std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= kRowTolerance;
    });
  }

  bool is_valid() const
  {
    return !rows_.empty() && all_positive() && rows_normalized();
  }

  friend bool operator==(SignalStructure const &, SignalStructure const &) = default;

private:
  std::vector<std::vector<double>> rows_;
};

struct LikelihoodModel
{
  HypothesisSet                hypotheses;
  std::vector<SignalStructure> structures;  // index i = agent i
  Hypothesis                   true_state = 0;

  std::size_t agent_count() const noexcept
  {
    return structures.size();
  }

  std::size_t hypothesis_count() const noexcept
  {
    return hypotheses.size();
  }

  friend bool operator==(LikelihoodModel const &, LikelihoodModel const &) = default;
};

/// A bijection from signal structures to vertices: psi[k] is the vertex that
/// receives structure k.
class Allocation
{
public:
  explicit Allocation(std::vector<Vertex> psi)
    : psi_(std::move(psi))
  {
    std::vector<bool> hit(psi_.size(), false);
    for (Vertex v : psi_)
    {
      detail::require(v < psi_.size() && !hit[v], "allocation is not a bijection");
      hit[v] = true;
    }
  }

  static Allocation identity(std::size_t n)
  {
    std::vector<Vertex> psi(n);
    std::iota(psi.begin(), psi.end(), Vertex{0});
    return Allocation(std::move(psi));
  }

  std::size_t size() const noexcept
  {
    return psi_.size();
  }

  Vertex vertex_of(std::size_t structure) const
  {
    return psi_.at(structure);
  }

  std::vector<Vertex> const &psi() const noexcept
  {
    return psi_;
  }

  friend bool operator==(Allocation const &, Allocation const &) = default;

private:
  std::vector<Vertex> psi_;
};

/// D(p || q) in nats.
inline double kl_divergence(std::span<double const> p, std::span<double const> q)
{
  detail::require(p.size() == q.size(), "kl_divergence: length mismatch");
  detail::require(!p.empty(), "kl_divergence: empty distributions");
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w)
  {
    detail::require(p[w] > 0.0 && q[w] > 0.0, "kl_divergence: entries must be strictly positive");
    sum_p += p[w];
    sum_q += q[w];
  }
  detail::require(std::abs(sum_p - 1.0) <= kProbabilityTolerance &&
                      std::abs(sum_q - 1.0) <= kProbabilityTolerance,
                  "kl_divergence: inputs must be normalized");
  double result = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w)
  {
    result += p[w] * std::log(p[w] / q[w]);
  }
  // Rounding can leave a tiny negative residue for p == q.
  return std::max(result, 0.0);
}

/// K[i][p][q] = D(l_i(. | theta_p) || l_i(. | theta_q)) for a list of structures.
class KlTable
{
public:
  KlTable() = default;

  KlTable(std::size_t agents, std::size_t hypotheses)
    : agents_(agents)
    , m_(hypotheses)
    , values_(agents * hypotheses * hypotheses, 0.0)
  {}

  std::size_t agent_count() const noexcept
  {
    return agents_;
  }

  std::size_t hypothesis_count() const noexcept
  {
    return m_;
  }

  double operator()(std::size_t agent, Hypothesis p, Hypothesis q) const
  {
    return values_.at(index(agent, p, q));
  }

  double &operator()(std::size_t agent, Hypothesis p, Hypothesis q)
  {
    return values_.at(index(agent, p, q));
  }

private:
  std::size_t index(std::size_t agent, Hypothesis p, Hypothesis q) const
  {
    detail::require(agent < agents_ && p < m_ && q < m_, "KL table index out of range");
    return (agent * m_ + p) * m_ + q;
  }

  std::size_t         agents_ = 0;
  std::size_t         m_      = 0;
  std::vector<double> values_;
};

inline KlTable relative_entropy_table(std::span<SignalStructure const> structures)
{
  detail::require(!structures.empty(), "no signal structures given");
  auto const m = structures.front().hypothesis_count();
  KlTable    table(structures.size(), m);
  for (std::size_t i = 0; i < structures.size(); ++i)
  {
    detail::require(structures[i].hypothesis_count() == m,
                    "signal structures disagree on the number of hypotheses");
    for (Hypothesis p = 0; p < m; ++p)
    {
      for (Hypothesis q = 0; q < m; ++q)
      {
        table(i, p, q) = p == q ? 0.0 : kl_divergence(structures[i].row(p), structures[i].row(q));
      }
    }
  }
  return table;
}

inline KlTable relative_entropy_table(LikelihoodModel const &model)
{
  return relative_entropy_table(model.structures);
}

/// Agents with K_i(p, q) above the zero-divergence tolerance, ascending.
inline std::vector<Vertex> source_set(KlTable const &kl, Hypothesis p, Hypothesis q)
{
  detail::require(p != q, "source set needs two distinct hypotheses");
  std::vector<Vertex> result;
  for (Vertex i = 0; i < kl.agent_count(); ++i)
  {
    if (kl(i, p, q) > kKlTolerance)
    {
      result.push_back(i);
    }
  }
  return result;
}

inline std::vector<Vertex> source_set(LikelihoodModel const &model, Hypothesis p, Hypothesis q)
{
  return source_set(relative_entropy_table(model), p, q);
}

/// Hypotheses whose likelihood row for agent i matches the true state's row.
inline std::vector<Hypothesis> observationally_equivalent_set(LikelihoodModel const &model,
                                                              Vertex                 i)
{
  auto const &s     = model.structures.at(i);
  auto const  truth = s.row(model.true_state);
  std::vector<Hypothesis> result;
  for (Hypothesis p = 0; p < s.hypothesis_count(); ++p)
  {
    auto const row   = s.row(p);
    bool       equal = true;
    for (std::size_t w = 0; w < row.size(); ++w)
    {
      equal = equal && std::abs(row[w] - truth[w]) <= kKlTolerance;
    }
    if (equal)
    {
      result.push_back(p);
    }
  }
  return result;
}

enum class ViolationKind
{
  ShapeMismatch,
  TrueStateOutOfRange,
  NonPositiveLikelihood,
  RowNotNormalized,
  EmptySourceSet,
};

inline char const *to_string(ViolationKind kind)
{
  switch (kind)
  {
  case ViolationKind::ShapeMismatch:
    return "shape_mismatch";
  case ViolationKind::TrueStateOutOfRange:
    return "true_state_out_of_range";
  case ViolationKind::NonPositiveLikelihood:
    return "non_positive_likelihood";
  case ViolationKind::RowNotNormalized:
    return "row_not_normalized";
  case ViolationKind::EmptySourceSet:
    return "empty_source_set";
  }
  return "unknown";
}

struct Violation
{
  ViolationKind kind;
  std::string   message;
  // Fields that do not apply to a kind are left at npos.
  std::size_t agent        = npos;
  Hypothesis  hypothesis   = npos;
  Hypothesis  other        = npos;
  std::size_t signal       = npos;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Checks positivity and normalization of every likelihood row, then (only if
/// those hold everywhere) that every ordered pair p != q has a source agent.
inline std::vector<Violation> validate_model(LikelihoodModel const &model)
{
  std::vector<Violation> out;
  auto const             m = model.hypothesis_count();
  if (model.true_state >= m)
  {
    out.push_back({ViolationKind::TrueStateOutOfRange,
                   "true_state " + std::to_string(model.true_state) + " is not a hypothesis index"});
  }
  bool entries_ok = true;
  for (std::size_t i = 0; i < model.agent_count(); ++i)
  {
    auto const &s = model.structures[i];
    if (s.hypothesis_count() != m)
    {
      out.push_back({ViolationKind::ShapeMismatch,
                     "agent " + std::to_string(i) + " has " + std::to_string(s.hypothesis_count()) +
                         " likelihood rows, expected " + std::to_string(m),
                     i});
      entries_ok = false;
      continue;
    }
    for (Hypothesis p = 0; p < m; ++p)
    {
      auto const row = s.row(p);
      for (std::size_t w = 0; w < row.size(); ++w)
      {
        if (!(row[w] > 0.0))
        {
          out.push_back({ViolationKind::NonPositiveLikelihood,
                         "agent " + std::to_string(i) + " has l(" + std::to_string(w) + "|" +
                             model.hypotheses.label(p) + ") = " + std::to_string(row[w]),
                         i, p, Violation::npos, w});
          entries_ok = false;
        }
      }
      double const sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (std::abs(sum - 1.0) > kRowTolerance)
      {
        out.push_back({ViolationKind::RowNotNormalized,
                       "agent " + std::to_string(i) + " row " + model.hypotheses.label(p) +
                           " sums to " + std::to_string(sum),
                       i, p});
        entries_ok = false;
      }
    }
  }
  if (!entries_ok || model.agent_count() == 0)
  {
    return out;
  }
  auto const kl = relative_entropy_table(model);
  for (Hypothesis p = 0; p < m; ++p)
  {
    for (Hypothesis q = 0; q < m; ++q)
    {
      if (p != q && source_set(kl, p, q).empty())
      {
        out.push_back({ViolationKind::EmptySourceSet,
                       "no agent can distinguish " + model.hypotheses.label(p) + " from " +
                           model.hypotheses.label(q),
                       Violation::npos, p, q});
      }
    }
  }
  return out;
}

/// Agent psi[k] receives structure k.
inline std::vector<SignalStructure> apply_allocation(std::span<SignalStructure const> structures,
                                                     Allocation const &psi)
{
  detail::require(structures.size() == psi.size(),
                  "allocation size does not match the number of structures");
  std::vector<SignalStructure> result(structures.size());
  for (std::size_t k = 0; k < structures.size(); ++k)
  {
    result[psi.vertex_of(k)] = structures[k];
  }
  return result;
}

inline LikelihoodModel apply_allocation(LikelihoodModel const &model, Allocation const &psi)
{
  LikelihoodModel result = model;
  result.structures      = apply_allocation(model.structures, psi);
  return result;
}

}  // namespace sbn
