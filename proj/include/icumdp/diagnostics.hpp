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

#ifndef ICUMDP_DIAGNOSTICS_HPP
#define ICUMDP_DIAGNOSTICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "icumdp/action_grid.hpp"
#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/ingest.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/random.hpp"
#include "icumdp/state_model.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

// ---------------------------------------------------------------------------
// Action histogram (fluid level x vasopressor level)
// ---------------------------------------------------------------------------

struct ActionHistogram {
  std::array<std::array<long long, kLevelsPerDrug>, kLevelsPerDrug> grid{};  // [fluid][vaso]

  long long total() const {
    long long t = 0;
    for (const auto& row : grid)
      for (long long c : row) t += c;
    return t;
  }
};

inline ActionHistogram action_histogram(const DiscretizedCohort& cohort) {
  ActionHistogram h;
  for (const auto& p : cohort.patients)
    for (const auto& step : p.steps)
      ++h.grid[static_cast<std::size_t>(fluid_level_of(step.action))]
             [static_cast<std::size_t>(vaso_level_of(step.action))];
  return h;
}

inline void write_action_histogram_csv(const ActionHistogram& h, const std::string& path) {
  auto out = csv::open_output(path);
  out << "fluid_level,vaso_level,count\n";
  for (int f = 0; f < kLevelsPerDrug; ++f)
    for (int v = 0; v < kLevelsPerDrug; ++v)
      out << f << ',' << v << ',' << h.grid[static_cast<std::size_t>(f)][static_cast<std::size_t>(v)] << '\n';
}

// ---------------------------------------------------------------------------
// Per-patient timeline: clinician doses vs the learned policy's advice
// ---------------------------------------------------------------------------

struct TimelineRow {
  int bin_index = 0;
  double time_h = 0.0;
  double map = 0.0;
  int clinician_fluid = 0;
  int clinician_vaso = 0;
  int ai_fluid = 0;
  int ai_vaso = 0;
  bool hypotensive_untreated_by_ai = false;  // MAP < 65 while the policy advises (0,0)
  bool unsupported = false;                  // policy's action unsupported at this state
};

/// One row per bin: aggregated MAP, the clinician's levels, the policy's
/// recommended levels, and the flag marking hypotensive bins the policy
/// leaves untreated.
inline std::vector<TimelineRow> patient_timeline(const BinnedTrajectory& binned,
                                                 const DiscretizedPatient& clinician,
                                                 const DeterministicPolicy& ai_policy,
                                                 const StateModel& states, const MdpModel& model) {
  if (clinician.steps.size() != binned.bins.size())
    throw ValidationError("timeline: discretized steps do not match the binned trajectory");
  std::vector<TimelineRow> rows;
  rows.reserve(binned.bins.size());
  for (std::size_t i = 0; i < binned.bins.size(); ++i) {
    const Bin& bin = binned.bins[i];
    TimelineRow row;
    row.bin_index = bin.bin_index;
    row.time_h = bin.bin_index * binned.bin_width_h;
    auto map_it = bin.features.find(kMapFeature);
    if (map_it == bin.features.end()) throw ValidationError("timeline: bin lacks " + std::string(kMapFeature));
    row.map = map_it->second;

    const int state = assign_state(bin.features, states);
    const int clin_action = clinician.steps[i].action;
    const int ai_action = ai_policy.action.at(static_cast<std::size_t>(state));
    row.clinician_fluid = fluid_level_of(clin_action);
    row.clinician_vaso = vaso_level_of(clin_action);
    row.ai_fluid = fluid_level_of(ai_action);
    row.ai_vaso = vaso_level_of(ai_action);
    row.unsupported = !model.supported(state, ai_action);
    row.hypotensive_untreated_by_ai = row.map < kHypotensionMap && ai_action == 0;
    rows.push_back(row);
  }
  return rows;
}

inline void write_timeline_csv(const std::vector<TimelineRow>& rows, const std::string& path) {
  auto out = csv::open_output(path);
  out << "bin_index,time_h,map_mmhg,clinician_fluid,clinician_vaso,ai_fluid,ai_vaso,"
         "hypotensive_untreated,unsupported\n";
  for (const auto& r : rows)
    out << r.bin_index << ',' << csv::format(r.time_h) << ',' << csv::format(r.map) << ','
        << r.clinician_fluid << ',' << r.clinician_vaso << ',' << r.ai_fluid << ',' << r.ai_vaso << ','
        << (r.hypotensive_untreated_by_ai ? 1 : 0) << ',' << (r.unsupported ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Dose excess vs mortality
// ---------------------------------------------------------------------------

enum class DoseCategory { Fluid, Vaso };

struct DoseExcessGroup {
  double excess_lo = 0.0;
  double excess_hi = 0.0;
  std::size_t n_patients = 0;
  double mortality = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% interval
  double ci_hi = 0.0;
};

/// Mean per-patient dose excess (given level minus policy-recommended level;
/// physical units via grid band midpoints when requested), grouped into
/// equal-width bins with bootstrap mortality intervals. Empty groups are
/// omitted.
inline std::vector<DoseExcessGroup> dose_excess_curve(const DiscretizedCohort& cohort,
                                                      const DeterministicPolicy& ai_policy,
                                                      const ActionGrid& grid, DoseCategory category,
                                                      int n_bins, int n_boot, std::uint64_t seed = 0,
                                                      bool physical_units = false) {
  if (n_bins < 1) throw ValidationError("dose_excess_curve: n_bins must be >= 1");
  if (n_boot < 1) throw ValidationError("dose_excess_curve: n_boot must be >= 1");

  // Level -> representative physical dose: 0 for level 0, band midpoints
  // between consecutive edges, and an extrapolated half-band above the top.
  const auto& edges = category == DoseCategory::Fluid ? grid.fluid_edges : grid.vaso_edges;
  std::array<double, kLevelsPerDrug> midpoint{0.0, edges[0] / 2.0, (edges[0] + edges[1]) / 2.0,
                                              (edges[1] + edges[2]) / 2.0, 1.5 * edges[2]};
  auto level_value = [&](int level) {
    return physical_units ? midpoint[static_cast<std::size_t>(level)] : static_cast<double>(level);
  };

  std::vector<double> excess;
  std::vector<int> died;
  excess.reserve(cohort.patients.size());
  for (const auto& p : cohort.patients) {
    double sum = 0.0;
    for (const auto& step : p.steps) {
      const int given = category == DoseCategory::Fluid ? fluid_level_of(step.action) : vaso_level_of(step.action);
      const int advised_action = ai_policy.action.at(static_cast<std::size_t>(step.state));
      const int advised =
          category == DoseCategory::Fluid ? fluid_level_of(advised_action) : vaso_level_of(advised_action);
      sum += level_value(given) - level_value(advised);
    }
    excess.push_back(sum / static_cast<double>(p.steps.size()));
    died.push_back(p.outcome == Outcome::Died ? 1 : 0);
  }

  const double lo = *std::min_element(excess.begin(), excess.end());
  const double hi = *std::max_element(excess.begin(), excess.end());
  const double width = (hi > lo) ? (hi - lo) / n_bins : 1.0;

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < excess.size(); ++i) {
    int g = static_cast<int>(std::floor((excess[i] - lo) / width));
    g = std::clamp(g, 0, n_bins - 1);
    members[static_cast<std::size_t>(g)].push_back(i);
  }

  Rng rng(seed ^ 0x9d5a1f0b2c6e3d47ULL);
  std::vector<DoseExcessGroup> out;
  for (int g = 0; g < n_bins; ++g) {
    const auto& idx = members[static_cast<std::size_t>(g)];
    if (idx.empty()) continue;  // omitted with note at the reporting layer
    DoseExcessGroup group;
    group.excess_lo = lo + g * width;
    group.excess_hi = lo + (g + 1) * width;
    group.n_patients = idx.size();
    long long deaths = 0;
    for (std::size_t i : idx) deaths += died[i];
    group.mortality = static_cast<double>(deaths) / static_cast<double>(idx.size());

    std::vector<double> boot(static_cast<std::size_t>(n_boot));
    for (int b = 0; b < n_boot; ++b) {
      long long d = 0;
      for (std::size_t j = 0; j < idx.size(); ++j) d += died[idx[rng.below(idx.size())]];
      boot[static_cast<std::size_t>(b)] = static_cast<double>(d) / static_cast<double>(idx.size());
    }
    std::sort(boot.begin(), boot.end());
    group.ci_lo = boot[static_cast<std::size_t>(std::floor(0.025 * (n_boot - 1)))];
    group.ci_hi = boot[static_cast<std::size_t>(std::ceil(0.975 * (n_boot - 1)))];
    out.push_back(group);
  }
  return out;
}

inline void write_dose_excess_csv(const std::vector<DoseExcessGroup>& groups, const std::string& path) {
  auto out = csv::open_output(path);
  out << "excess_lo,excess_hi,n_patients,mortality,ci_lo,ci_hi\n";
  for (const auto& g : groups)
    out << csv::format(g.excess_lo) << ',' << csv::format(g.excess_hi) << ',' << g.n_patients << ','
        << csv::format(g.mortality) << ',' << csv::format(g.ci_lo) << ',' << csv::format(g.ci_hi) << '\n';
}

// ---------------------------------------------------------------------------
// Cohort exposure and bin-width aliasing
// ---------------------------------------------------------------------------

/// Fraction of patients with any vasopressor record.
inline double vasopressor_exposure(const std::vector<RawTrajectory>& cohort) {
  if (cohort.empty()) throw ValidationError("vasopressor_exposure: empty cohort");
  std::size_t exposed = 0;
  for (const auto& t : cohort)
    for (const auto& r : t.records)
      if (r.vaso_rate > 0.0) {
        ++exposed;
        break;
      }
  return static_cast<double>(exposed) / static_cast<double>(cohort.size());
}

struct AliasingReport {
  struct PerWidth {
    double width_h = 0.0;
    std::size_t bins = 0;          // observed (nonempty) bins
    std::size_t aliased = 0;       // aggregated MAP >= 65 yet vaso level > 0
    double rate = 0.0;
  };
  std::vector<PerWidth> widths;
  std::size_t records = 0;
  std::size_t raw_aliased = 0;     // record-level MAP >= 65 and vaso_rate > 0
  double raw_rate = 0.0;
};

/// Normotensive-but-dosed rates per bin width, next to the record-level rate.
/// Rates are over observed bins, so a width below the record spacing
/// reproduces the raw rate exactly.
inline AliasingReport binning_aliasing_report(const std::vector<RawTrajectory>& cohort,
                                              const std::vector<double>& widths_h, const ActionGrid& grid,
                                              const BinningConfig& base_config = {}) {
  AliasingReport report;
  for (const auto& t : cohort) {
    for (const auto& r : t.records) {
      auto it = r.features.find(kMapFeature);
      if (it == r.features.end() || is_missing(it->second)) continue;
      ++report.records;
      if (it->second >= kHypotensionMap && r.vaso_rate > 0.0) ++report.raw_aliased;
    }
  }
  if (report.records > 0)
    report.raw_rate = static_cast<double>(report.raw_aliased) / static_cast<double>(report.records);

  for (double w : widths_h) {
    BinningConfig config = base_config;
    config.bin_width_h = w;
    AliasingReport::PerWidth per;
    per.width_h = w;
    const auto binned = bin_cohort(cohort, config);
    for (const auto& t : binned) {
      for (const auto& bin : t.bins) {
        if (!bin.observed) continue;
        ++per.bins;
        const int vaso_level = dose_level(bin.vaso_rate_bin, grid.vaso_edges);
        if (bin.features.at(kMapFeature) >= kHypotensionMap && vaso_level > 0) ++per.aliased;
      }
    }
    if (per.bins > 0) per.rate = static_cast<double>(per.aliased) / static_cast<double>(per.bins);
    report.widths.push_back(per);
  }
  return report;
}

inline void write_aliasing_csv(const AliasingReport& report, const std::string& path) {
  auto out = csv::open_output(path);
  out << "width_h,bins,aliased,rate\n";
  out << "raw," << report.records << ',' << report.raw_aliased << ',' << csv::format(report.raw_rate) << '\n';
  for (const auto& per : report.widths)
    out << csv::format(per.width_h) << ',' << per.bins << ',' << per.aliased << ',' << csv::format(per.rate) << '\n';
}

}  // namespace icumdp

#endif
