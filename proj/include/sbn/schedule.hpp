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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sbn {

/// Communication trigger times t_1 = 1, t_{k+1} = t_k + a^k. With a = 1 every
/// step is a trigger; with a > 1 the gaps grow geometrically and
/// t_{k+1} = a t_k + 1.
class TriggerSchedule
{
public:
  /// Largest time step the schedule reasons about.
  static constexpr std::uint64_t kMaxTime = std::uint64_t{1} << 62;

  explicit TriggerSchedule(std::uint64_t a)
    : a_(a)
  {
    detail::require(a >= 1, "communication parameter a must be a positive integer");
  }

  std::uint64_t a() const noexcept
  {
    return a_;
  }

  bool is_trigger(std::uint64_t t) const
  {
    detail::require(t >= 1, "time steps start at 1");
    detail::require(t <= kMaxTime, "time step " + std::to_string(t) + " exceeds 2^62");
    if (a_ == 1)
    {
      return true;
    }
    bool hit = false;
    for_each_trigger(t, [&](std::uint64_t tk) { hit = tk == t; });
    return hit;
  }

  /// All triggers <= horizon in increasing order.
  std::vector<std::uint64_t> triggers_up_to(std::uint64_t horizon) const
  {
    detail::require(horizon >= 1, "horizon must be positive");
    detail::require(horizon <= kMaxTime, "horizon exceeds 2^62");
    std::vector<std::uint64_t> out;
    for_each_trigger(horizon, [&](std::uint64_t tk) { out.push_back(tk); });
    return out;
  }

  /// Smallest trigger strictly greater than t, or 0 if it would pass 2^62.
  std::uint64_t next_trigger_after(std::uint64_t t) const
  {
    if (a_ == 1)
    {
      return t < kMaxTime ? t + 1 : 0;
    }
    std::uint64_t tk   = 1;
    std::uint64_t step = a_;
    while (tk <= t)
    {
      if (step > kMaxTime - tk)
      {
        return 0;
      }
      tk += step;
      step = step > kMaxTime / a_ ? kMaxTime + 1 : step * a_;
    }
    return tk;
  }

private:
  // Visits triggers <= limit. Increments a^k saturate past 2^62, which ends
  // the walk because limit never exceeds 2^62.
  template <typename Visit>
  void for_each_trigger(std::uint64_t limit, Visit &&visit) const
  {
    std::uint64_t tk   = 1;
    std::uint64_t step = a_;
    while (tk <= limit)
    {
      visit(tk);
      if (step > limit - tk)
      {
        break;
      }
      tk += step;
      if (a_ > 1)
      {
        step = step > kMaxTime / a_ ? kMaxTime + 1 : step * a_;
      }
    }
  }

  std::uint64_t a_;
};

/// First `count` triggers computed from the defining increments a^k in an
/// arbitrary integer type (e.g. a multiprecision integer when the values pass
/// 2^64).
template <typename Int>
std::vector<Int> first_triggers(std::uint64_t a, std::size_t count)
{
  detail::require(a >= 1, "communication parameter a must be a positive integer");
  std::vector<Int> out;
  out.reserve(count);
  Int tk   = 1;
  Int step = a;
  for (std::size_t k = 0; k < count; ++k)
  {
    out.push_back(tk);
    tk += step;
    step *= a;
  }
  return out;
}

}  // namespace sbn
