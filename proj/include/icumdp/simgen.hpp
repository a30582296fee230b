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

#ifndef ICUMDP_SIMGEN_HPP
#define ICUMDP_SIMGEN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/action_grid.hpp"
#include "icumdp/error.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/random.hpp"
#include "icumdp/solve.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

// ---------------------------------------------------------------------------
// Synthetic ICU-trajectory generator.
//
// The true environment is a severity chain: states 0 (mildest) .. S-1
// (sickest) with absorbing survival/death terminals. Dosing shifts the drift
// toward recovery (and, when configured, back toward harm past a toxicity
// threshold). Every estimator in the pipeline can be validated against the
// exact value oracle on the true tensor.
// ---------------------------------------------------------------------------

/// Knobs the world is built from; kept so derived worlds (confounding) can be
/// rebuilt from the same base.
struct WorldParams {
  int n_states = 20;
  double base_improve = 0.10;        // P(move one state healthier), undosed
  double base_worsen = 0.28;         // P(move one state sicker), undosed
  double surv_exit = 0.20;           // survival exit scale, quartic in (1 - severity)
  double die_exit = 0.90;            // death exit scale, quartic in severity
  double benefit_per_level = 0.02;   // drift shift per combined dose level (0..8)
  double toxicity_per_level = 0.0;   // drift penalty per level beyond the threshold
  double toxicity_threshold = 8.0;   // combined level where toxicity starts
  double dose_prob = 0.10;           // base behavior: P(any dose | state)
  double start_decay = 0.75;         // start probability proportional to decay^state
};

/// Record-level MAP dips: the transient hypotension -> vasopressor -> recovery
/// episodes that wide bins average away.
struct DipConfig {
  bool enabled = false;
  double short_prob = 0.45;  // given a vaso dose in a normotensive state
  double long_prob = 0.35;
  double short_map = 56.0;   // MAP during the dip
  double long_map = 48.0;
  int short_records = 1;
  int long_records = 3;
};

struct GeneratorConfig {
  // world identity
  WorldParams params;
  double confound_strength = 0.0;

  // built artifacts (derived from params by make_default_world)
  std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s'] over S+2 states
  StochasticPolicy behavior;                                 // over true states
  std::vector<double> start_probs;                           // over true states

  // feature emission
  std::vector<double> map_mean;                  // per state, mm Hg
  std::vector<std::string> aux_names{"hr_bpm", "lactate_mmol"};
  std::vector<std::vector<double>> aux_mean;     // [state][aux]
  double noise_scale = 0.5;

  // physical dose bands per level (level 0 is exactly zero)
  std::array<std::array<double, 2>, kLevelsPerDrug> fluid_band{};  // mL per decision period
  std::array<std::array<double, 2>, kLevelsPerDrug> vaso_band{};   // ug/kg/min

  // sampling
  int n_patients = 1000;
  int max_horizon_bins = 100;
  double decision_period_h = 1.0;
  double record_spacing_h = 0.5;
  double vaso_gate_prob = 1.0;  // per-patient probability of vasopressor eligibility
  DipConfig dips;
  double gamma = 0.99;          // used by the value oracle
  std::uint64_t seed = 1;

  int n_states_true() const { return params.n_states; }
  int survival_state() const { return params.n_states; }
  int death_state() const { return params.n_states + 1; }

  double severity(int s) const {
    return params.n_states == 1 ? 1.0 : static_cast<double>(s) / (params.n_states - 1);
  }

  void validate() const {
    if (params.n_states < 1) throw ValidationError("generator needs at least one true state");
    if (n_patients < 0) throw ValidationError("n_patients must be >= 0");
    if (max_horizon_bins < 1) throw ValidationError("max_horizon_bins must be >= 1");
    if (!(decision_period_h > 0.0) || !(record_spacing_h > 0.0))
      throw ValidationError("decision period and record spacing must be positive");
    const double ratio = decision_period_h / record_spacing_h;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9)
      throw ValidationError("decision_period_h must be an integer multiple of record_spacing_h");
    if (!(vaso_gate_prob >= 0.0 && vaso_gate_prob <= 1.0))
      throw ValidationError("vaso_gate_prob must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("generator gamma must lie in (0, 1]");
    const auto s = static_cast<std::size_t>(params.n_states);
    if (transition.size() != s || behavior.prob.size() != s || start_probs.size() != s ||
        map_mean.size() != s || aux_mean.size() != s)
      throw ValidationError("generator config arrays do not match n_states");
    for (const auto& per_action : transition) {
      if (per_action.size() != kNumActions) throw ValidationError("transition tensor needs 25 action rows");
      for (const auto& row : per_action) {
        double total = 0.0;
        for (double p : row) {
          if (p < 0.0) throw ValidationError("transition tensor has a negative probability");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("transition tensor row does not sum to 1");
      }
    }
    behavior.validate();
    double start_total = 0.0;
    for (double p : start_probs) start_total += p;
    if (std::abs(start_total - 1.0) > 1e-9) throw ValidationError("start probabilities must sum to 1");
  }
};

/// Cohort plus the generator's ground truth for it: the executed (true state,
/// action) sequences, in the emitted-record range.
struct SimulatedCohort {
  std::vector<RawTrajectory> raw;
  DiscretizedCohort truth;
};

namespace detail {

inline double dose_effect(const WorldParams& p, int action_id) {
  const double level = static_cast<double>(fluid_level_of(action_id) + vaso_level_of(action_id));
  return p.benefit_per_level * level -
         p.toxicity_per_level * std::max(0.0, level - p.toxicity_threshold);
}

/// Transition row for (state, action): exits concentrated at the chain ends
/// (quartic in severity), drift shifted by the dose effect, remainder stays
/// put. Steep exits keep death paths long, so they cross the dosed part of
/// the chain.
inline std::vector<double> transition_row(const WorldParams& p, int s, int action_id) {
  const int n = p.n_states;
  const double sev = (n == 1) ? 1.0 : static_cast<double>(s) / (n - 1);
  const double eff = dose_effect(p, action_id);
  const double sev2 = sev * sev;
  const double mild2 = (1.0 - sev) * (1.0 - sev);
  double p_die = p.die_exit * sev2 * sev2;
  double p_surv = p.surv_exit * mild2 * mild2;
  double p_improve = std::clamp(p.base_improve + eff, 0.0, 0.9);
  double p_worsen = std::clamp(p.base_worsen - eff, 0.0, 0.9);
  double total = p_die + p_surv + p_improve + p_worsen;
  if (total > 0.98) {
    const double scale = 0.98 / total;
    p_die *= scale;
    p_surv *= scale;
    p_improve *= scale;
    p_worsen *= scale;
    total = 0.98;
  }
  std::vector<double> row(static_cast<std::size_t>(n) + 2, 0.0);
  row[static_cast<std::size_t>(n)] += p_surv;       // survival terminal
  row[static_cast<std::size_t>(n) + 1] += p_die;    // death terminal
  if (s > 0) row[static_cast<std::size_t>(s) - 1] += p_improve;
  else row[static_cast<std::size_t>(s)] += p_improve;
  if (s < n - 1) row[static_cast<std::size_t>(s) + 1] += p_worsen;
  else row[static_cast<std::size_t>(s)] += p_worsen;
  row[static_cast<std::size_t>(s)] += 1.0 - total;
  return row;
}

/// Behavior row: no-dose mass plus a dosed block over level pairs. The base
/// split is uniform over nonzero pairs; the confounded split concentrates on
/// severity-matched levels with confound-controlled dosing probability.
inline std::array<double, kNumActions> behavior_row(const WorldParams& p, int s, double confound) {
  const int n = p.n_states;
  const double sev = (n == 1) ? 1.0 : static_cast<double>(s) / (n - 1);
  // Steep ramp: anything past mid-severity is dosed (at full strength), the
  // mildest state never is.
  const double ramp = std::min(1.0, 2.0 * sev);
  const double p_dose = (1.0 - confound) * p.dose_prob + confound * ramp;

  std::array<double, kNumActions> base{};
  for (int a = 1; a < kNumActions; ++a) base[static_cast<std::size_t>(a)] = 1.0 / (kNumActions - 1);

  std::array<double, kNumActions> matched{};
  const double center = 1.0 + 3.0 * sev;
  double matched_total = 0.0;
  for (int fl = 1; fl < kLevelsPerDrug; ++fl) {
    for (int vl = 1; vl < kLevelsPerDrug; ++vl) {
      const double w = 1.0 / (1.0 + std::abs(fl - center)) * 1.0 / (1.0 + std::abs(vl - center));
      matched[static_cast<std::size_t>(action_id_from(fl, vl))] = w;
      matched_total += w;
    }
  }
  for (double& w : matched) w /= matched_total;

  std::array<double, kNumActions> row{};
  row[0] = 1.0 - p_dose;
  for (int a = 1; a < kNumActions; ++a)
    row[static_cast<std::size_t>(a)] =
        p_dose * ((1.0 - confound) * base[static_cast<std::size_t>(a)] + confound * matched[static_cast<std::size_t>(a)]);
  return row;
}

}  // namespace detail

/// Build a complete generator configuration from world knobs.
inline GeneratorConfig make_default_world(const WorldParams& params = {}) {
  GeneratorConfig cfg;
  cfg.params = params;
  const int n = params.n_states;
  cfg.transition.resize(static_cast<std::size_t>(n));
  cfg.behavior.prob.resize(static_cast<std::size_t>(n));
  cfg.start_probs.resize(static_cast<std::size_t>(n));
  cfg.map_mean.resize(static_cast<std::size_t>(n));
  cfg.aux_mean.resize(static_cast<std::size_t>(n));

  double start_total = 0.0;
  for (int s = 0; s < n; ++s) {
    cfg.transition[static_cast<std::size_t>(s)].resize(kNumActions);
    for (int a = 0; a < kNumActions; ++a)
      cfg.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = detail::transition_row(params, s, a);
    cfg.behavior.prob[static_cast<std::size_t>(s)] = detail::behavior_row(params, s, 0.0);
    cfg.start_probs[static_cast<std::size_t>(s)] = std::pow(params.start_decay, s);
    start_total += cfg.start_probs[static_cast<std::size_t>(s)];
    const double sev = cfg.severity(s);
    cfg.map_mean[static_cast<std::size_t>(s)] = 85.0 - 40.0 * sev;
    cfg.aux_mean[static_cast<std::size_t>(s)] = {72.0 + 48.0 * sev, 1.0 + 3.5 * sev};
  }
  for (double& p : cfg.start_probs) p /= start_total;

  cfg.fluid_band = {{{0.0, 0.0}, {20.0, 80.0}, {120.0, 180.0}, {220.0, 280.0}, {320.0, 380.0}}};
  cfg.vaso_band = {{{0.0, 0.0}, {0.03, 0.09}, {0.13, 0.19}, {0.23, 0.29}, {0.33, 0.39}}};
  return cfg;
}

/// Reweight the behavior policy so dosing probability (and intensity) track
/// severity: at strength 1 the mildest state is never dosed and the sickest
/// always is. Strength 0 returns the base world unchanged.
inline GeneratorConfig make_confounded_world(GeneratorConfig config, double strength) {
  if (!(strength >= 0.0 && strength <= 1.0))
    throw ValidationError("confound strength must lie in [0, 1]");
  if (strength == 0.0) return config;
  for (int s = 0; s < config.n_states_true(); ++s)
    config.behavior.prob[static_cast<std::size_t>(s)] = detail::behavior_row(config.params, s, strength);
  config.confound_strength = strength;
  return config;
}

/// Drop all vasopressor mass from a policy (used for gated-out patients):
/// each action keeps its fluid level with vaso level forced to 0.
inline StochasticPolicy strip_vaso(const StochasticPolicy& policy) {
  StochasticPolicy out;
  out.prob.resize(policy.prob.size());
  for (std::size_t s = 0; s < policy.prob.size(); ++s) {
    out.prob[s].fill(0.0);
    for (int a = 0; a < kNumActions; ++a)
      out.prob[s][static_cast<std::size_t>(action_id_from(fluid_level_of(a), 0))] +=
          policy.prob[s][static_cast<std::size_t>(a)];
  }
  return out;
}

/// The true environment as an MdpModel (all 25 actions supported), for exact
/// evaluation of any policy against the generator.
inline MdpModel oracle_model(const GeneratorConfig& config) {
  config.validate();
  MdpModel model;
  model.n_clusters = config.n_states_true();
  model.gamma = config.gamma;
  model.min_count = 1;
  model.smoothing = 0.0;
  model.rows.resize(static_cast<std::size_t>(model.n_clusters) * kNumActions);
  model.reward.assign(static_cast<std::size_t>(model.n_states()), 0.0);
  model.reward[static_cast<std::size_t>(model.survival_state())] = kTerminalReward;
  model.reward[static_cast<std::size_t>(model.death_state())] = -kTerminalReward;
  for (int s = 0; s < model.n_clusters; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      auto& row = model.rows[static_cast<std::size_t>(s) * kNumActions + a];
      const auto& src = config.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      for (std::size_t next = 0; next < src.size(); ++next) {
        if (src[next] <= 0.0) continue;
        row.next.push_back(static_cast<int>(next));
        row.count.push_back(0);
        row.prob.push_back(src[next]);
      }
      row.supported = true;
    }
  }
  return model;
}

/// Exact start value of a policy on the true tensor (terminal rewards +-100,
/// gamma from the config).
inline double oracle_policy_value(const GeneratorConfig& config, const StochasticPolicy& policy) {
  const MdpModel model = oracle_model(config);
  const ValueVector value = policy_evaluation(model, policy);
  std::vector<double> start(static_cast<std::size_t>(model.n_states()), 0.0);
  for (int s = 0; s < config.n_states_true(); ++s) start[static_cast<std::size_t>(s)] = config.start_probs[static_cast<std::size_t>(s)];
  return start_value(value, start);
}

inline double oracle_policy_value(const GeneratorConfig& config, const DeterministicPolicy& policy) {
  return oracle_policy_value(config, as_stochastic(policy));
}

/// Value of the data-generating behavior, accounting for the per-patient
/// vasopressor eligibility gate.
inline double oracle_behavior_value(const GeneratorConfig& config) {
  const double v_full = oracle_policy_value(config, config.behavior);
  if (config.vaso_gate_prob >= 1.0) return v_full;
  const double v_stripped = oracle_policy_value(config, strip_vaso(config.behavior));
  return config.vaso_gate_prob * v_full + (1.0 - config.vaso_gate_prob) * v_stripped;
}

/// Simulate the cohort: state chains under the behavior policy, sub-bin
/// records with state-conditioned MAP (plus configured intra-bin dips), doses
/// drawn from the executed action's physical band, outcomes from the
/// absorbing states. Records stop at max_horizon_bins but the chain runs to
/// absorption so outcome labels carry no truncation bias.
inline SimulatedCohort generate_cohort(const GeneratorConfig& config) {
  config.validate();
  const Rng master(config.seed);
  const int n_rec = static_cast<int>(std::round(config.decision_period_h / config.record_spacing_h));

  SimulatedCohort out;
  out.raw.reserve(static_cast<std::size_t>(config.n_patients));
  out.truth.n_clusters = config.n_states_true();
  out.truth.patients.reserve(static_cast<std::size_t>(config.n_patients));

  int id_width = 1;
  for (int v = std::max(1, config.n_patients - 1); v >= 10; v /= 10) ++id_width;

  for (int i = 0; i < config.n_patients; ++i) {
    Rng rng = master.child(static_cast<std::uint64_t>(i));
    const std::string digits = std::to_string(i);
    const std::size_t pad = static_cast<std::size_t>(id_width) > digits.size()
                                ? static_cast<std::size_t>(id_width) - digits.size()
                                : 0;
    const std::string pid = "p" + std::string(pad, '0') + digits;

    RawTrajectory traj;
    traj.patient_id = pid;
    DiscretizedPatient truth;
    truth.patient_id = pid;

    const bool vaso_eligible = rng.uniform() < config.vaso_gate_prob;
    int s = rng.categorical(config.start_probs);
    Outcome outcome = Outcome::Survived;

    const long hard_cap = 200L * config.max_horizon_bins;
    for (long t = 0;; ++t) {
      if (t >= hard_cap) break;  // astronomically unlikely; censor as survived
      int a = rng.categorical(config.behavior.prob[static_cast<std::size_t>(s)]);
      if (!vaso_eligible) a = action_id_from(fluid_level_of(a), 0);

      if (t < config.max_horizon_bins) {
        truth.steps.push_back(Step{s, a});

        const int fl = fluid_level_of(a);
        const int vl = vaso_level_of(a);
        const double fluid_total =
            fl == 0 ? 0.0 : rng.uniform(config.fluid_band[static_cast<std::size_t>(fl)][0], config.fluid_band[static_cast<std::size_t>(fl)][1]);
        const double vaso_rate =
            vl == 0 ? 0.0 : rng.uniform(config.vaso_band[static_cast<std::size_t>(vl)][0], config.vaso_band[static_cast<std::size_t>(vl)][1]);

        const double state_map = config.map_mean[static_cast<std::size_t>(s)];
        // Dip pattern for vaso doses in normotensive states.
        int dip_records = 0;
        double dip_map = state_map;
        bool routine_dose = true;
        if (config.dips.enabled && vl > 0 && state_map >= kHypotensionMap + 5.0) {
          const double u = rng.uniform();
          if (u < config.dips.short_prob) {
            dip_records = std::min(config.dips.short_records, n_rec);
            dip_map = config.dips.short_map;
            routine_dose = false;
          } else if (u < config.dips.short_prob + config.dips.long_prob) {
            dip_records = std::min(config.dips.long_records, n_rec);
            dip_map = config.dips.long_map;
            routine_dose = false;
          }
        }

        for (int j = 0; j < n_rec; ++j) {
          Record rec;
          rec.time_h = (static_cast<double>(t) + (j + 0.5) / n_rec) * config.decision_period_h;
          const bool in_dip = j < dip_records;
          const double map_base = in_dip ? dip_map : state_map;
          rec.features[kMapFeature] = map_base + config.noise_scale * rng.normal();
          for (std::size_t x = 0; x < config.aux_names.size(); ++x)
            rec.features[config.aux_names[x]] =
                config.aux_mean[static_cast<std::size_t>(s)][x] + config.noise_scale * rng.normal();
          rec.fluid_ml = (j == 0) ? fluid_total : 0.0;
          rec.vaso_rate = (vl > 0 && (routine_dose || in_dip)) ? vaso_rate : 0.0;
          traj.records.push_back(std::move(rec));
        }
      }

      const int next = rng.categorical(config.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
      if (next == config.survival_state()) { outcome = Outcome::Survived; break; }
      if (next == config.death_state()) { outcome = Outcome::Died; break; }
      s = next;
    }

    traj.outcome = outcome;
    truth.outcome = outcome;
    out.raw.push_back(std::move(traj));
    out.truth.patients.push_back(std::move(truth));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON round-trip
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const GeneratorConfig& c) {
  nlohmann::json j;
  j["params"] = {{"n_states", c.params.n_states},
                 {"base_improve", c.params.base_improve},
                 {"base_worsen", c.params.base_worsen},
                 {"surv_exit", c.params.surv_exit},
                 {"die_exit", c.params.die_exit},
                 {"benefit_per_level", c.params.benefit_per_level},
                 {"toxicity_per_level", c.params.toxicity_per_level},
                 {"toxicity_threshold", c.params.toxicity_threshold},
                 {"dose_prob", c.params.dose_prob},
                 {"start_decay", c.params.start_decay}};
  j["confound_strength"] = c.confound_strength;
  j["transition"] = c.transition;
  auto behavior = nlohmann::json::array();
  for (const auto& row : c.behavior.prob) behavior.push_back(std::vector<double>(row.begin(), row.end()));
  j["behavior"] = std::move(behavior);
  j["start_probs"] = c.start_probs;
  j["map_mean"] = c.map_mean;
  j["aux_names"] = c.aux_names;
  j["aux_mean"] = c.aux_mean;
  j["noise_scale"] = c.noise_scale;
  j["fluid_band"] = c.fluid_band;
  j["vaso_band"] = c.vaso_band;
  j["n_patients"] = c.n_patients;
  j["max_horizon_bins"] = c.max_horizon_bins;
  j["decision_period_h"] = c.decision_period_h;
  j["record_spacing_h"] = c.record_spacing_h;
  j["vaso_gate_prob"] = c.vaso_gate_prob;
  j["dips"] = {{"enabled", c.dips.enabled},       {"short_prob", c.dips.short_prob},
               {"long_prob", c.dips.long_prob},   {"short_map", c.dips.short_map},
               {"long_map", c.dips.long_map},     {"short_records", c.dips.short_records},
               {"long_records", c.dips.long_records}};
  j["gamma"] = c.gamma;
  j["seed"] = c.seed;
  return j;
}

inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  const auto& p = j.at("params");
  c.params.n_states = p.at("n_states").get<int>();
  c.params.base_improve = p.at("base_improve").get<double>();
  c.params.base_worsen = p.at("base_worsen").get<double>();
  c.params.surv_exit = p.at("surv_exit").get<double>();
  c.params.die_exit = p.at("die_exit").get<double>();
  c.params.benefit_per_level = p.at("benefit_per_level").get<double>();
  c.params.toxicity_per_level = p.at("toxicity_per_level").get<double>();
  c.params.toxicity_threshold = p.at("toxicity_threshold").get<double>();
  c.params.dose_prob = p.at("dose_prob").get<double>();
  c.params.start_decay = p.at("start_decay").get<double>();
  c.confound_strength = j.at("confound_strength").get<double>();
  c.transition = j.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
  for (const auto& row : j.at("behavior")) {
    const auto vals = row.get<std::vector<double>>();
    if (vals.size() != kNumActions) throw ValidationError("behavior row must have 25 entries");
    std::array<double, kNumActions> arr{};
    std::copy(vals.begin(), vals.end(), arr.begin());
    c.behavior.prob.push_back(arr);
  }
  c.start_probs = j.at("start_probs").get<std::vector<double>>();
  c.map_mean = j.at("map_mean").get<std::vector<double>>();
  c.aux_names = j.at("aux_names").get<std::vector<std::string>>();
  c.aux_mean = j.at("aux_mean").get<std::vector<std::vector<double>>>();
  c.noise_scale = j.at("noise_scale").get<double>();
  c.fluid_band = j.at("fluid_band").get<std::array<std::array<double, 2>, kLevelsPerDrug>>();
  c.vaso_band = j.at("vaso_band").get<std::array<std::array<double, 2>, kLevelsPerDrug>>();
  c.n_patients = j.at("n_patients").get<int>();
  c.max_horizon_bins = j.at("max_horizon_bins").get<int>();
  c.decision_period_h = j.at("decision_period_h").get<double>();
  c.record_spacing_h = j.at("record_spacing_h").get<double>();
  c.vaso_gate_prob = j.at("vaso_gate_prob").get<double>();
  const auto& d = j.at("dips");
  c.dips.enabled = d.at("enabled").get<bool>();
  c.dips.short_prob = d.at("short_prob").get<double>();
  c.dips.long_prob = d.at("long_prob").get<double>();
  c.dips.short_map = d.at("short_map").get<double>();
  c.dips.long_map = d.at("long_map").get<double>();
  c.dips.short_records = d.at("short_records").get<int>();
  c.dips.long_records = d.at("long_records").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

}  // namespace icumdp

#endif
