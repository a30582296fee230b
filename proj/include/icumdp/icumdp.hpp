// Copyright 2026 The icumdp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ICUMDP_ICUMDP_HPP
#define ICUMDP_ICUMDP_HPP

#include "icumdp/action_grid.hpp"
#include "icumdp/config.hpp"
#include "icumdp/diagnostics.hpp"
#include "icumdp/error.hpp"
#include "icumdp/experiment.hpp"
#include "icumdp/gof.hpp"
#include "icumdp/ingest.hpp"
#include "icumdp/manifest.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/ope.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/random.hpp"
#include "icumdp/rollout.hpp"
#include "icumdp/simgen.hpp"
#include "icumdp/solve.hpp"
#include "icumdp/state_model.hpp"
#include "icumdp/types.hpp"

#endif
