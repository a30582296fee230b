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

#ifndef ICUMDP_OPE_HPP
#define ICUMDP_OPE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

/// Weighted-importance-sampling evaluation output, including the weight
/// diagnostics the estimator's bias shows up in.
struct OpeReport {
  double estimate = 0.0;            // WIS (self-normalized)
  double ordinary_is = 0.0;         // plain IS mean, for comparison
  std::vector<double> weights;      // final per-trajectory importance weights
  std::vector<double> returns;      // realized discounted returns
  double ess = 0.0;                 // (sum w)^2 / sum w^2
  double near_zero_fraction = 0.0;  // share of weights < 1e-6
  double epsilon = 0.0;             // softening used for the evaluation policy

  std::size_t n() const { return weights.size(); }
};

/// Soften a deterministic policy: the chosen action keeps 1 - eps + eps/25,
/// every other action gets eps/25.
inline StochasticPolicy soften_policy(const DeterministicPolicy& policy, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("softening epsilon must lie in (0, 1)");
  StochasticPolicy out;
  out.prob.resize(policy.action.size());
  const double base = epsilon / kNumActions;
  for (std::size_t s = 0; s < policy.action.size(); ++s) {
    out.prob[s].fill(base);
    out.prob[s][static_cast<std::size_t>(policy.action[s])] = 1.0 - epsilon + base;
  }
  return out;
}

/// Realized discounted return of one trajectory: reward is earned on entering
/// each next state, undiscounted at the step it occurs (gamma^t for step t).
inline double trajectory_return(const DiscretizedPatient& patient, const std::vector<double>& reward,
                                double gamma, int survival_state, int death_state) {
  double g = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t + 1 < patient.steps.size(); ++t) {
    g += discount * reward[static_cast<std::size_t>(patient.steps[t + 1].state)];
    discount *= gamma;
  }
  const int terminal = patient.outcome == Outcome::Survived ? survival_state : death_state;
  g += discount * reward[static_cast<std::size_t>(terminal)];
  return g;
}

/// Weighted importance sampling with final-trajectory weights:
/// w = prod_t pi_e(a_t|s_t) / pi_b(a_t|s_t), estimate = sum(w G) / sum(w).
inline OpeReport wis_evaluate(const DiscretizedCohort& cohort, const StochasticPolicy& eval_policy,
                              const StochasticPolicy& behavior, double gamma,
                              const std::vector<double>& reward, double epsilon_used = 0.0) {
  if (eval_policy.k() != cohort.n_clusters || behavior.k() != cohort.n_clusters)
    throw ValidationError("wis_evaluate: policy state count does not match the cohort");
  if (reward.size() != static_cast<std::size_t>(cohort.n_states()))
    throw ValidationError("wis_evaluate: reward vector has wrong length");
  if (cohort.patients.empty()) throw ValidationError("wis_evaluate: empty cohort");

  OpeReport report;
  report.epsilon = epsilon_used;
  report.weights.reserve(cohort.patients.size());
  report.returns.reserve(cohort.patients.size());

  for (const auto& p : cohort.patients) {
    double w = 1.0;
    for (const auto& step : p.steps) {
      const double pb = behavior.prob[static_cast<std::size_t>(step.state)][static_cast<std::size_t>(step.action)];
      if (!(pb > 0.0))
        throw NumericsError("behavior policy assigns probability 0 to observed (state " +
                            std::to_string(step.state) + ", action " + std::to_string(step.action) + ")");
      w *= eval_policy.prob[static_cast<std::size_t>(step.state)][static_cast<std::size_t>(step.action)] / pb;
    }
    report.weights.push_back(w);
    report.returns.push_back(
        trajectory_return(p, reward, gamma, cohort.survival_state(), cohort.death_state()));
  }

  double sum_w = 0.0, sum_w2 = 0.0, sum_wg = 0.0;
  std::size_t near_zero = 0;
  for (std::size_t i = 0; i < report.weights.size(); ++i) {
    sum_w += report.weights[i];
    sum_w2 += report.weights[i] * report.weights[i];
    sum_wg += report.weights[i] * report.returns[i];
    if (report.weights[i] < 1e-6) ++near_zero;
  }
  if (!(sum_w > 0.0))
    throw NumericsError("all importance weights are zero; soften the evaluation policy");
  report.estimate = sum_wg / sum_w;
  report.ordinary_is = sum_wg / static_cast<double>(report.weights.size());
  report.ess = sum_w * sum_w / sum_w2;
  report.near_zero_fraction = static_cast<double>(near_zero) / static_cast<double>(report.weights.size());
  return report;
}

/// Weight-concentration summary; `collapse` flags ESS/n < 0.05.
struct WeightCollapseSummary {
  double ess = 0.0;
  double ess_fraction = 0.0;
  double near_zero_fraction = 0.0;
  double top_percentile_share = 0.0;  // share of total weight on the top 1% of trajectories
  bool collapse = false;
};

inline WeightCollapseSummary weight_collapse_report(const OpeReport& report) {
  WeightCollapseSummary summary;
  const std::size_t n = report.n();
  if (n == 0) throw ValidationError("weight_collapse_report: empty report");
  summary.ess = report.ess;
  summary.ess_fraction = report.ess / static_cast<double>(n);
  summary.near_zero_fraction = report.near_zero_fraction;

  std::vector<double> sorted = report.weights;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(1, (n + 99) / 100);  // ceil(n / 100)
  double total = 0.0, top_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    if (i < top) top_sum += sorted[i];
  }
  summary.top_percentile_share = total > 0.0 ? top_sum / total : 0.0;
  summary.collapse = summary.ess_fraction < 0.05;
  return summary;
}

inline nlohmann::json to_json(const OpeReport& report) {
  const auto summary = weight_collapse_report(report);
  return nlohmann::json{{"estimate_wis", report.estimate},
                        {"estimate_ordinary_is", report.ordinary_is},
                        {"n_trajectories", report.n()},
                        {"ess", report.ess},
                        {"ess_fraction", summary.ess_fraction},
                        {"near_zero_fraction", report.near_zero_fraction},
                        {"top_percentile_share", summary.top_percentile_share},
                        {"collapse", summary.collapse},
                        {"epsilon", report.epsilon}};
}

inline void write_weights_csv(const OpeReport& report, const std::string& path) {
  auto out = csv::open_output(path);
  out << "trajectory,weight,return\n";
  for (std::size_t i = 0; i < report.n(); ++i)
    out << i << ',' << csv::format(report.weights[i]) << ',' << csv::format(report.returns[i]) << '\n';
}

}  // namespace icumdp

#endif
