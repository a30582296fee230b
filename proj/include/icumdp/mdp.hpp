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

#ifndef ICUMDP_MDP_HPP
#define ICUMDP_MDP_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/state_model.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

constexpr double kTerminalReward = 100.0;  // +100 survival entry, -100 death entry

/// Raw transition counts N[s][a][s'] over k+2 states x 25 actions.
/// Terminal self-loops are a convention and carry no counts; every bin of
/// every patient contributes exactly one transition.
struct TransitionCounts {
  int n_clusters = 0;
  std::vector<std::map<int, long long>> cell;  // indexed by s * 25 + a, for nonterminal s

  int n_states() const { return n_clusters + 2; }

  void init(int k) {
    n_clusters = k;
    cell.assign(static_cast<std::size_t>(k) * kNumActions, {});
  }

  std::map<int, long long>& row(int s, int a) { return cell[static_cast<std::size_t>(s) * kNumActions + a]; }
  const std::map<int, long long>& row(int s, int a) const {
    return cell[static_cast<std::size_t>(s) * kNumActions + a];
  }

  long long total() const {
    long long t = 0;
    for (const auto& r : cell)
      for (const auto& [_, n] : r) t += n;
    return t;
  }

  /// Associative merge; counting is additive over cohort unions.
  void merge(const TransitionCounts& other) {
    if (other.n_clusters != n_clusters) throw ValidationError("cannot merge counts over different state spaces");
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (const auto& [next, n] : other.cell[i]) cell[i][next] += n;
  }
};

/// Count (s_t, a_t) -> s_{t+1}; the final observed step transitions to the
/// terminal matching the outcome label.
inline TransitionCounts count_transitions(const DiscretizedCohort& cohort) {
  TransitionCounts counts;
  counts.init(cohort.n_clusters);
  const int survival = cohort.survival_state();
  const int death = cohort.death_state();
  for (const auto& p : cohort.patients) {
    if (p.steps.empty()) throw ValidationError("patient " + p.patient_id + " has no steps");
    for (std::size_t t = 0; t < p.steps.size(); ++t) {
      const Step& step = p.steps[t];
      if (step.state < 0 || step.state >= cohort.n_clusters)
        throw ValidationError("state id out of range for patient " + p.patient_id);
      if (step.action < 0 || step.action >= kNumActions)
        throw ValidationError("action id out of range for patient " + p.patient_id);
      const int next = (t + 1 < p.steps.size()) ? p.steps[t + 1].state
                                                : (p.outcome == Outcome::Survived ? survival : death);
      ++counts.row(step.state, step.action)[next];
    }
  }
  return counts;
}

/// Tabular MDP over k+2 states and 25 actions with reward attached to the
/// entered state (+-100 at the terminals, optional shaping elsewhere).
struct MdpModel {
  struct Row {
    std::vector<int> next;        // sorted successor states
    std::vector<long long> count;
    std::vector<double> prob;     // sums to 1 when supported
    long long total = 0;
    bool supported = false;
  };

  int n_clusters = 0;
  double gamma = 0.99;
  int min_count = 5;
  double smoothing = 0.0;
  std::vector<Row> rows;       // indexed by s * 25 + a, nonterminal s only
  std::vector<double> reward;  // entry reward per state, length k+2
  bool shaped = false;

  int n_states() const { return n_clusters + 2; }
  int survival_state() const { return n_clusters; }
  int death_state() const { return n_clusters + 1; }
  bool is_terminal(int s) const { return s >= n_clusters; }

  const Row& row(int s, int a) const { return rows[static_cast<std::size_t>(s) * kNumActions + a]; }
  bool supported(int s, int a) const { return is_terminal(s) || row(s, a).supported; }

  std::vector<int> supported_actions(int s) const {
    std::vector<int> out;
    for (int a = 0; a < kNumActions; ++a)
      if (row(s, a).supported) out.push_back(a);
    return out;
  }
};

/// Turn counts into probability rows. A pair (s,a) is supported iff its row
/// total reaches min_count; probabilities are (N + smoothing) normalized over
/// the observed successor set only.
inline MdpModel normalize_transitions(const TransitionCounts& counts, int min_count = 5,
                                      double smoothing = 0.0, double gamma = 0.99) {
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  if (smoothing < 0.0) throw ValidationError("smoothing must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in (0, 1]");

  MdpModel model;
  model.n_clusters = counts.n_clusters;
  model.gamma = gamma;
  model.min_count = min_count;
  model.smoothing = smoothing;
  model.rows.resize(counts.cell.size());
  model.reward.assign(static_cast<std::size_t>(model.n_states()), 0.0);
  model.reward[static_cast<std::size_t>(model.survival_state())] = kTerminalReward;
  model.reward[static_cast<std::size_t>(model.death_state())] = -kTerminalReward;

  bool any_supported = false;
  for (std::size_t i = 0; i < counts.cell.size(); ++i) {
    const auto& src = counts.cell[i];
    auto& row = model.rows[i];
    for (const auto& [next, n] : src) {
      row.next.push_back(next);
      row.count.push_back(n);
      row.total += n;
    }
    if (row.total >= min_count) {
      row.supported = true;
      any_supported = true;
      double denom = 0.0;
      for (long long n : row.count) denom += static_cast<double>(n) + smoothing;
      row.prob.resize(row.count.size());
      for (std::size_t j = 0; j < row.count.size(); ++j)
        row.prob[j] = (static_cast<double>(row.count[j]) + smoothing) / denom;
    }
  }
  if (!any_supported) throw NumericsError("vacuous model: no (state, action) pair reaches min_count");
  return model;
}

/// Empirical action frequencies with add-delta smoothing over the 25 actions;
/// states never visited get the uniform distribution.
inline StochasticPolicy estimate_behavior_policy(const DiscretizedCohort& cohort, double delta = 0.01) {
  if (delta < 0.0) throw ValidationError("behavior smoothing delta must be >= 0");
  std::vector<std::array<long long, kNumActions>> counts(
      static_cast<std::size_t>(cohort.n_clusters));
  for (auto& row : counts) row.fill(0);
  std::vector<long long> visits(static_cast<std::size_t>(cohort.n_clusters), 0);
  for (const auto& p : cohort.patients) {
    for (const auto& step : p.steps) {
      ++counts[static_cast<std::size_t>(step.state)][static_cast<std::size_t>(step.action)];
      ++visits[static_cast<std::size_t>(step.state)];
    }
  }
  StochasticPolicy policy;
  policy.prob.resize(counts.size());
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (visits[s] == 0) {
      policy.prob[s].fill(1.0 / kNumActions);
      continue;
    }
    const double denom = static_cast<double>(visits[s]) + kNumActions * delta;
    if (denom <= 0.0) throw ValidationError("behavior policy: empty state row with delta = 0");
    for (int a = 0; a < kNumActions; ++a)
      policy.prob[s][static_cast<std::size_t>(a)] =
          (static_cast<double>(counts[s][static_cast<std::size_t>(a)]) + delta) / denom;
  }
  return policy;
}

/// Empirical first-state frequencies, zero mass on terminals.
inline std::vector<double> empirical_start_distribution(const DiscretizedCohort& cohort) {
  std::vector<double> dist(static_cast<std::size_t>(cohort.n_states()), 0.0);
  if (cohort.patients.empty()) throw ValidationError("empty cohort has no start distribution");
  for (const auto& p : cohort.patients) dist[static_cast<std::size_t>(p.steps.front().state)] += 1.0;
  for (double& d : dist) d /= static_cast<double>(cohort.patients.size());
  return dist;
}

/// Short-term reward knob: +-bonus on entering states above/below the MAP
/// threshold. Off by default; terminal rewards are never touched.
struct ShapingConfig {
  bool enabled = false;
  double map_threshold = kHypotensionMap;
  double bonus = 1.0;

  void validate() const {
    if (bonus < 0.0) throw ValidationError("shaping bonus must be >= 0");
    if (!(map_threshold > 0.0)) throw ValidationError("shaping MAP threshold must be positive");
  }
};

inline MdpModel apply_reward_shaping(MdpModel model, const StateModel& states, const ShapingConfig& config) {
  config.validate();
  if (!config.enabled || config.bonus == 0.0) return model;
  for (int s = 0; s < model.n_clusters; ++s) {
    const double map = states.state_feature_mean(s, kMapFeature);  // throws if MAP absent
    model.reward[static_cast<std::size_t>(s)] +=
        (map >= config.map_threshold) ? config.bonus : -config.bonus;
  }
  model.shaped = true;
  return model;
}

// ---------------------------------------------------------------------------
// Serialization: sparse triplet CSV + JSON header
// ---------------------------------------------------------------------------

inline void write_mdp_csv(const MdpModel& model, const std::string& path) {
  auto out = csv::open_output(path);
  out << "s,a,s_next,count,prob\n";
  for (int s = 0; s < model.n_clusters; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const auto& row = model.row(s, a);
      if (!row.supported) continue;
      for (std::size_t j = 0; j < row.next.size(); ++j)
        out << s << ',' << a << ',' << row.next[j] << ',' << row.count[j] << ','
            << csv::format(row.prob[j]) << '\n';
    }
  }
}

inline nlohmann::json mdp_header_json(const MdpModel& model, const ShapingConfig& shaping) {
  nlohmann::json j;
  j["k"] = model.n_clusters;
  j["gamma"] = model.gamma;
  j["min_count"] = model.min_count;
  j["smoothing"] = model.smoothing;
  j["shaping"] = {{"enabled", shaping.enabled},
                  {"map_threshold", shaping.map_threshold},
                  {"bonus", shaping.bonus}};
  j["reward"] = model.reward;
  return j;
}

inline MdpModel read_mdp(const std::string& csv_path, const nlohmann::json& header) {
  MdpModel model;
  model.n_clusters = header.at("k").get<int>();
  model.gamma = header.at("gamma").get<double>();
  model.min_count = header.at("min_count").get<int>();
  model.smoothing = header.at("smoothing").get<double>();
  model.shaped = header.at("shaping").at("enabled").get<bool>();
  model.reward = header.at("reward").get<std::vector<double>>();
  if (model.reward.size() != static_cast<std::size_t>(model.n_states()))
    throw ValidationError("mdp header reward vector has wrong length");
  model.rows.resize(static_cast<std::size_t>(model.n_clusters) * kNumActions);

  auto in = csv::open_input(csv_path);
  std::string line;
  if (!std::getline(in, line) ||
      csv::split(line) != std::vector<std::string>{"s", "a", "s_next", "count", "prob"})
    throw ValidationError("bad mdp CSV header in " + csv_path);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    const std::string ctx = "line " + std::to_string(line_no);
    if (cells.size() != 5) throw ValidationError("bad mdp CSV row at " + ctx);
    const int s = static_cast<int>(csv::parse_int(cells[0], "s at " + ctx));
    const int a = static_cast<int>(csv::parse_int(cells[1], "a at " + ctx));
    const int next = static_cast<int>(csv::parse_int(cells[2], "s_next at " + ctx));
    if (s < 0 || s >= model.n_clusters || a < 0 || a >= kNumActions || next < 0 || next >= model.n_states())
      throw ValidationError("mdp CSV indices out of range at " + ctx);
    auto& row = model.rows[static_cast<std::size_t>(s) * kNumActions + a];
    row.next.push_back(next);
    row.count.push_back(csv::parse_int(cells[3], "count at " + ctx));
    row.prob.push_back(csv::parse_double(cells[4], "prob at " + ctx));
    row.total += row.count.back();
    row.supported = true;
  }
  for (auto& row : model.rows) {
    if (!row.supported) continue;
    double total = 0.0;
    for (double p : row.prob) total += p;
    if (std::abs(total - 1.0) > 1e-9)
      throw NumericsError("mdp CSV row does not sum to 1 within 1e-9");
  }
  return model;
}

}  // namespace icumdp

#endif
