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

#ifndef ICUMDP_GOF_HPP
#define ICUMDP_GOF_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/random.hpp"

namespace icumdp {

/// Transition-model fit against held-out data: per supported (s,a) row a
/// chi-square statistic with a Monte Carlo p-value.
struct GofReport {
  struct Row {
    int state = 0;
    int action = 0;
    long long heldout_total = 0;
    double statistic = 0.0;
    double p_value = 1.0;
  };

  std::vector<Row> rows;
  double alpha = 0.05;
  int n_mc = 1000;
  bool empty_warning = false;  // no eligible rows

  std::size_t rejected() const {
    std::size_t n = 0;
    for (const auto& r : rows)
      if (r.p_value <= alpha) ++n;
    return n;
  }

  double rejection_fraction() const {
    return rows.empty() ? 0.0 : static_cast<double>(rejected()) / static_cast<double>(rows.size());
  }
};

namespace detail {

inline double chi_square_statistic(const std::vector<long long>& observed, const std::vector<double>& prob,
                                   long long total) {
  double stat = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    const double expected = static_cast<double>(total) * prob[j];
    const double diff = static_cast<double>(observed[j]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

inline std::vector<long long> sample_multinomial(Rng& rng, const std::vector<double>& prob, long long total) {
  std::vector<long long> counts(prob.size(), 0);
  for (long long i = 0; i < total; ++i) ++counts[static_cast<std::size_t>(rng.categorical(prob))];
  return counts;
}

}  // namespace detail

/// For each supported (s,a) with held-out row total >= 5: chi-square of the
/// held-out successor counts against the fitted multinomial, with a Monte
/// Carlo p-value ((1 + #{simulated >= observed}) / (n_mc + 1)). Held-out mass
/// on a successor the fitted row gives probability 0 is an automatic
/// rejection (p = 0).
inline GofReport goodness_of_fit(const MdpModel& model, const DiscretizedCohort& heldout,
                                 int n_mc = 1000, double alpha = 0.05, std::uint64_t seed = 0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("gof alpha must lie in (0, 1)");
  if (n_mc < 1) throw ValidationError("gof n_mc must be >= 1");
  if (heldout.n_clusters != model.n_clusters)
    throw ValidationError("held-out cohort was discretized over a different state space");

  const TransitionCounts counts = count_transitions(heldout);
  GofReport report;
  report.alpha = alpha;
  report.n_mc = n_mc;
  Rng rng(seed ^ 0x60f07f5bd4a9d1c3ULL);

  for (int s = 0; s < model.n_clusters; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const auto& fitted = model.row(s, a);
      if (!fitted.supported) continue;
      const auto& observed = counts.row(s, a);
      long long total = 0;
      for (const auto& [_, n] : observed) total += n;
      if (total < 5) continue;

      GofReport::Row row;
      row.state = s;
      row.action = a;
      row.heldout_total = total;

      // Align held-out counts with the fitted successor set.
      std::vector<long long> obs(fitted.next.size(), 0);
      bool off_support = false;
      for (const auto& [next, n] : observed) {
        const auto it = std::lower_bound(fitted.next.begin(), fitted.next.end(), next);
        if (it == fitted.next.end() || *it != next) {
          off_support = true;
          break;
        }
        obs[static_cast<std::size_t>(it - fitted.next.begin())] = n;
      }

      if (off_support) {
        row.statistic = std::numeric_limits<double>::infinity();
        row.p_value = 0.0;
      } else {
        row.statistic = detail::chi_square_statistic(obs, fitted.prob, total);
        int at_least = 0;
        for (int m = 0; m < n_mc; ++m) {
          const auto sim = detail::sample_multinomial(rng, fitted.prob, total);
          if (detail::chi_square_statistic(sim, fitted.prob, total) >= row.statistic) ++at_least;
        }
        row.p_value = static_cast<double>(1 + at_least) / static_cast<double>(n_mc + 1);
      }
      report.rows.push_back(row);
    }
  }
  report.empty_warning = report.rows.empty();
  return report;
}

inline void write_gof_csv(const GofReport& report, const std::string& path) {
  auto out = csv::open_output(path);
  out << "s,a,heldout_total,statistic,p_value\n";
  for (const auto& r : report.rows)
    out << r.state << ',' << r.action << ',' << r.heldout_total << ',' << csv::format(r.statistic)
        << ',' << csv::format(r.p_value) << '\n';
}

inline nlohmann::json to_json(const GofReport& report) {
  return nlohmann::json{{"alpha", report.alpha},
                        {"n_mc", report.n_mc},
                        {"eligible_rows", report.rows.size()},
                        {"rejected", report.rejected()},
                        {"rejection_fraction", report.rejection_fraction()},
                        {"empty_warning", report.empty_warning}};
}

}  // namespace icumdp

#endif
