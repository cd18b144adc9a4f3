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

#include <stdexcept>
#include <string>

namespace sbn {

/// Raised on precondition violations anywhere in the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, std::string const &message)
{
  if (!condition)
  {
    throw Error(message);
  }
}

}  // namespace detail
}  // namespace sbn
