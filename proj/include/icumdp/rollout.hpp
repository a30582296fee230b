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

#ifndef ICUMDP_ROLLOUT_HPP
#define ICUMDP_ROLLOUT_HPP

#include <string>
#include <vector>

#include "icumdp/error.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/random.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

/// Simulate trajectories from an MdpModel under a policy. Trajectories run
/// until a terminal is entered; a trajectory still alive at `max_steps` is
/// censored with a survival label (choose a generous cap).
inline DiscretizedCohort sample_cohort(const MdpModel& model, const StochasticPolicy& policy,
                                       const std::vector<double>& start_distribution, std::size_t n,
                                       Rng& rng, std::size_t max_steps = 10000) {
  if (policy.k() != model.n_clusters) throw ValidationError("sample_cohort: policy/model mismatch");
  if (start_distribution.size() != static_cast<std::size_t>(model.n_states()) &&
      start_distribution.size() != static_cast<std::size_t>(model.n_clusters))
    throw ValidationError("sample_cohort: start distribution has wrong length");

  DiscretizedCohort cohort;
  cohort.n_clusters = model.n_clusters;
  cohort.patients.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DiscretizedPatient p;
    p.patient_id = "sim-" + std::to_string(i);
    int s = rng.categorical(start_distribution);
    if (model.is_terminal(s)) throw ValidationError("sample_cohort: start distribution puts mass on a terminal");
    p.outcome = Outcome::Survived;
    for (std::size_t t = 0; t < max_steps; ++t) {
      const int a = rng.categorical(policy.prob[static_cast<std::size_t>(s)]);
      const auto& row = model.row(s, a);
      if (!row.supported)
        throw ValidationError("sample_cohort: policy sampled unsupported pair (state " + std::to_string(s) +
                              ", action " + std::to_string(a) + ")");
      p.steps.push_back(Step{s, a});
      const int next = row.next[static_cast<std::size_t>(rng.categorical(row.prob))];
      if (model.is_terminal(next)) {
        p.outcome = (next == model.survival_state()) ? Outcome::Survived : Outcome::Died;
        break;
      }
      s = next;
    }
    cohort.patients.push_back(std::move(p));
  }
  return cohort;
}

}  // namespace icumdp

#endif
