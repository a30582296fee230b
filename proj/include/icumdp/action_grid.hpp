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

#ifndef ICUMDP_ACTION_GRID_HPP
#define ICUMDP_ACTION_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/error.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

inline int fluid_level_of(int action_id) { return action_id / kLevelsPerDrug; }
inline int vaso_level_of(int action_id) { return action_id % kLevelsPerDrug; }
inline int action_id_from(int fluid_level, int vaso_level) {
  return kLevelsPerDrug * fluid_level + vaso_level;
}

/// 5x5 dose discretization. Level 0 is reserved for an exactly-zero dose;
/// levels 1-4 partition positive doses by the three edges.
struct ActionGrid {
  std::array<double, 3> fluid_edges{};  // mL per bin, strictly increasing
  std::array<double, 3> vaso_edges{};   // ug/kg/min, strictly increasing

  void validate() const {
    auto check = [](const std::array<double, 3>& e, const char* what) {
      if (!(e[0] > 0.0 && e[0] < e[1] && e[1] < e[2]) || !std::isfinite(e[2]))
        throw ValidationError(std::string("action grid ") + what + " edges must be positive and strictly increasing");
    };
    check(fluid_edges, "fluid");
    check(vaso_edges, "vasopressor");
  }
};

namespace detail {

/// Quantile by sorted linear interpolation (inclusive endpoints).
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::array<double, 3> dose_edges(std::vector<double> nonzero, const char* what) {
  std::set<double> distinct(nonzero.begin(), nonzero.end());
  if (distinct.size() < 4)
    throw ValidationError(std::string("degenerate action grid: fewer than 4 distinct positive ") + what + " doses");
  std::sort(nonzero.begin(), nonzero.end());
  std::array<double, 3> edges{interpolated_quantile(nonzero, 0.25), interpolated_quantile(nonzero, 0.50),
                              interpolated_quantile(nonzero, 0.75)};
  if (!(edges[0] < edges[1] && edges[1] < edges[2]))
    throw ValidationError(std::string("degenerate action grid: coincident ") + what + " quantile edges");
  return edges;
}

}  // namespace detail

/// Fit dose edges as the 25th/50th/75th percentiles of the nonzero per-bin
/// doses in each category.
inline ActionGrid fit_action_grid(const std::vector<BinnedTrajectory>& cohort) {
  std::vector<double> fluid, vaso;
  for (const auto& t : cohort) {
    for (const auto& b : t.bins) {
      if (b.fluid_ml_total > 0.0) fluid.push_back(b.fluid_ml_total);
      if (b.vaso_rate_bin > 0.0) vaso.push_back(b.vaso_rate_bin);
    }
  }
  ActionGrid grid;
  grid.fluid_edges = detail::dose_edges(std::move(fluid), "fluid");
  grid.vaso_edges = detail::dose_edges(std::move(vaso), "vasopressor");
  return grid;
}

/// Level 0 iff the dose is exactly zero; otherwise 1 + number of edges
/// strictly below the dose. Monotone nondecreasing in the dose.
inline int dose_level(double dose, const std::array<double, 3>& edges) {
  if (dose < 0.0) throw ValidationError("dose must be nonnegative");
  if (dose == 0.0) return 0;
  int level = 1;
  for (double e : edges)
    if (e < dose) ++level;
  return level;
}

inline int discretize_action(double fluid_ml, double vaso_rate, const ActionGrid& grid) {
  return action_id_from(dose_level(fluid_ml, grid.fluid_edges), dose_level(vaso_rate, grid.vaso_edges));
}

inline nlohmann::json to_json(const ActionGrid& grid) {
  return nlohmann::json{{"fluid_edges", grid.fluid_edges}, {"vaso_edges", grid.vaso_edges}};
}

inline ActionGrid action_grid_from_json(const nlohmann::json& j) {
  ActionGrid grid;
  const auto& f = j.at("fluid_edges");
  const auto& v = j.at("vaso_edges");
  for (int i = 0; i < 3; ++i) {
    grid.fluid_edges[i] = f.at(i).get<double>();
    grid.vaso_edges[i] = v.at(i).get<double>();
  }
  grid.validate();
  return grid;
}

}  // namespace icumdp

#endif
