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
#include "sbn/instances.hpp"
#include "sbn/io.hpp"
#include "sbn/graph.hpp"
#include "sbn/protocol.hpp"
#include "sbn/rates_alloc.hpp"
#include "sbn/schedule.hpp"
#include "sbn/signal_model.hpp"
#include "sbn/simulator.hpp"
#include "sbn/verify.hpp"
