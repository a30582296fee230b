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

#ifndef ICUMDP_TYPES_HPP
#define ICUMDP_TYPES_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace icumdp {

constexpr int kNumActions = 25;       // 5 fluid levels x 5 vasopressor levels
constexpr int kLevelsPerDrug = 5;
constexpr double kHypotensionMap = 65.0;  // mm Hg; MAP below this is pathologic
constexpr const char* kMapFeature = "map_mmhg";

enum class Outcome { Survived, Died };

inline const char* to_string(Outcome o) { return o == Outcome::Survived ? "survived" : "died"; }

/// One timestamped observation of a patient.
struct Record {
  double time_h = 0.0;                      // hours from ICU admission
  std::map<std::string, double> features;   // NaN marks an explicitly missing value
  double fluid_ml = 0.0;                    // IV fluid volume given since the previous record
  double vaso_rate = 0.0;                   // normalized vasopressor rate, ug/kg/min-equivalent
};

/// A patient's full stay: ordered records plus the survival label.
struct RawTrajectory {
  std::string patient_id;
  std::vector<Record> records;  // strictly increasing time_h, nonempty
  Outcome outcome = Outcome::Survived;
};

/// One fixed-width time bin after aggregation.
struct Bin {
  int bin_index = 0;
  std::map<std::string, double> features;  // aggregated, imputed (no NaN left)
  double fluid_ml_total = 0.0;             // summed over the bin
  double vaso_rate_bin = 0.0;              // max rate within the bin
  bool observed = false;                   // false for carried-forward empty bins
};

struct BinnedTrajectory {
  std::string patient_id;
  double bin_width_h = 1.0;
  std::vector<Bin> bins;  // contiguous indices starting at 0
  Outcome outcome = Outcome::Survived;
};

/// One (state, action) step of a discretized trajectory.
struct Step {
  int state = 0;   // in [0, k)
  int action = 0;  // in [0, 25)
};

struct DiscretizedPatient {
  std::string patient_id;
  std::vector<Step> steps;
  Outcome outcome = Outcome::Survived;
};

/// Per-patient (state, action) sequences over k cluster states.
///
/// Terminal conventions: state k is absorbing survival, state k+1 absorbing
/// death. Terminals never appear in `steps`; they are entered implicitly when
/// a trajectory ends.
struct DiscretizedCohort {
  int n_clusters = 0;  // k
  std::vector<DiscretizedPatient> patients;

  int n_states() const { return n_clusters + 2; }
  int survival_state() const { return n_clusters; }
  int death_state() const { return n_clusters + 1; }

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& p : patients) n += p.steps.size();
    return n;
  }
};

inline bool is_missing(double x) { return std::isnan(x); }

}  // namespace icumdp

#endif
