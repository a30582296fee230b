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

#ifndef ICUMDP_CONFIG_HPP
#define ICUMDP_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/error.hpp"
#include "icumdp/experiment.hpp"
#include "icumdp/ingest.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/simgen.hpp"

namespace icumdp {

/// Single JSON config for the whole pipeline. Every field has a default;
/// all randomness is routed through explicit seeds.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 1;

  // ingest
  BinningConfig binning;

  // discretize
  int k = 750;

  // estimate
  int min_count = 5;
  double smoothing = 0.0;
  double gamma = 0.99;
  double behavior_delta = 0.01;
  ShapingConfig shaping;

  // ope
  double epsilon = 0.01;

  // experiment
  int n_realizations = 500;
  double percentile = 95.0;
  double train_fraction = 0.8;
  bool refit_clustering_per_realization = true;

  // gof
  int gof_n_mc = 1000;
  double gof_alpha = 0.05;

  // diagnostics
  int excess_bins = 9;
  int excess_boot = 200;
  std::vector<double> aliasing_widths_h{1.0, 4.0};
  std::vector<std::string> timeline_patients;  // empty: first patient only
  bool dose_excess_physical_units = false;

  // simgen (world knobs; the full GeneratorConfig is built on demand)
  WorldParams world;
  double confound_strength = 0.0;
  int sim_n_patients = 1000;
  int sim_max_horizon_bins = 100;
  double sim_decision_period_h = 1.0;
  double sim_record_spacing_h = 0.5;
  double sim_vaso_gate_prob = 1.0;
  double sim_noise_scale = 0.5;
  DipConfig dips;
  double sim_gamma = 0.99;

  ExperimentConfig experiment_config() const {
    ExperimentConfig cfg;
    cfg.n_realizations = n_realizations;
    cfg.k = k;
    cfg.bin_width_h = binning.bin_width_h;
    cfg.gamma = gamma;
    cfg.epsilon = epsilon;
    cfg.min_count = min_count;
    cfg.smoothing = smoothing;
    cfg.behavior_delta = behavior_delta;
    cfg.train_fraction = train_fraction;
    cfg.refit_clustering_per_realization = refit_clustering_per_realization;
    cfg.percentile = percentile;
    cfg.shaping = shaping;
    cfg.feature_aggregation = binning.feature_aggregation;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }

  GeneratorConfig generator_config() const {
    GeneratorConfig cfg = make_default_world(world);
    cfg.n_patients = sim_n_patients;
    cfg.max_horizon_bins = sim_max_horizon_bins;
    cfg.decision_period_h = sim_decision_period_h;
    cfg.record_spacing_h = sim_record_spacing_h;
    cfg.vaso_gate_prob = sim_vaso_gate_prob;
    cfg.noise_scale = sim_noise_scale;
    cfg.dips = dips;
    cfg.gamma = sim_gamma;
    cfg.seed = seed;
    if (confound_strength > 0.0) cfg = make_confounded_world(std::move(cfg), confound_strength);
    return cfg;
  }
};

namespace detail {

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  detail::maybe(j, "seed", c.seed);
  detail::maybe(j, "threads", c.threads);

  if (j.contains("ingest")) {
    const auto& s = j.at("ingest");
    detail::maybe(s, "bin_width_h", c.binning.bin_width_h);
    if (s.contains("feature_aggregation"))
      for (const auto& [name, mode] : s.at("feature_aggregation").items())
        c.binning.feature_aggregation[name] = aggregation_from_string(mode.get<std::string>());
  }
  if (j.contains("discretize")) detail::maybe(j.at("discretize"), "k", c.k);
  if (j.contains("estimate")) {
    const auto& s = j.at("estimate");
    detail::maybe(s, "min_count", c.min_count);
    detail::maybe(s, "smoothing", c.smoothing);
    detail::maybe(s, "gamma", c.gamma);
    detail::maybe(s, "behavior_delta", c.behavior_delta);
    if (s.contains("shaping")) {
      const auto& sh = s.at("shaping");
      detail::maybe(sh, "enabled", c.shaping.enabled);
      detail::maybe(sh, "map_threshold", c.shaping.map_threshold);
      detail::maybe(sh, "bonus", c.shaping.bonus);
    }
  }
  if (j.contains("ope")) detail::maybe(j.at("ope"), "epsilon", c.epsilon);
  if (j.contains("experiment")) {
    const auto& s = j.at("experiment");
    detail::maybe(s, "n_realizations", c.n_realizations);
    detail::maybe(s, "percentile", c.percentile);
    detail::maybe(s, "train_fraction", c.train_fraction);
    detail::maybe(s, "refit_clustering_per_realization", c.refit_clustering_per_realization);
  }
  if (j.contains("gof")) {
    detail::maybe(j.at("gof"), "n_mc", c.gof_n_mc);
    detail::maybe(j.at("gof"), "alpha", c.gof_alpha);
  }
  if (j.contains("diagnostics")) {
    const auto& s = j.at("diagnostics");
    detail::maybe(s, "excess_bins", c.excess_bins);
    detail::maybe(s, "excess_boot", c.excess_boot);
    detail::maybe(s, "aliasing_widths_h", c.aliasing_widths_h);
    detail::maybe(s, "timeline_patients", c.timeline_patients);
    detail::maybe(s, "dose_excess_physical_units", c.dose_excess_physical_units);
  }
  if (j.contains("simgen")) {
    const auto& s = j.at("simgen");
    if (s.contains("world")) {
      const auto& w = s.at("world");
      detail::maybe(w, "n_states", c.world.n_states);
      detail::maybe(w, "base_improve", c.world.base_improve);
      detail::maybe(w, "base_worsen", c.world.base_worsen);
      detail::maybe(w, "surv_exit", c.world.surv_exit);
      detail::maybe(w, "die_exit", c.world.die_exit);
      detail::maybe(w, "benefit_per_level", c.world.benefit_per_level);
      detail::maybe(w, "toxicity_per_level", c.world.toxicity_per_level);
      detail::maybe(w, "toxicity_threshold", c.world.toxicity_threshold);
      detail::maybe(w, "dose_prob", c.world.dose_prob);
      detail::maybe(w, "start_decay", c.world.start_decay);
    }
    detail::maybe(s, "confound_strength", c.confound_strength);
    detail::maybe(s, "n_patients", c.sim_n_patients);
    detail::maybe(s, "max_horizon_bins", c.sim_max_horizon_bins);
    detail::maybe(s, "decision_period_h", c.sim_decision_period_h);
    detail::maybe(s, "record_spacing_h", c.sim_record_spacing_h);
    detail::maybe(s, "vaso_gate_prob", c.sim_vaso_gate_prob);
    detail::maybe(s, "noise_scale", c.sim_noise_scale);
    detail::maybe(s, "gamma", c.sim_gamma);
    if (s.contains("dips")) {
      const auto& d = s.at("dips");
      detail::maybe(d, "enabled", c.dips.enabled);
      detail::maybe(d, "short_prob", c.dips.short_prob);
      detail::maybe(d, "long_prob", c.dips.long_prob);
      detail::maybe(d, "short_map", c.dips.short_map);
      detail::maybe(d, "long_map", c.dips.long_map);
      detail::maybe(d, "short_records", c.dips.short_records);
      detail::maybe(d, "long_records", c.dips.long_records);
    }
  }
  return c;
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [name, mode] : c.binning.feature_aggregation) agg[name] = to_string(mode);
  nlohmann::json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["ingest"] = {{"bin_width_h", c.binning.bin_width_h}, {"feature_aggregation", agg}};
  j["discretize"] = {{"k", c.k}};
  j["estimate"] = {{"min_count", c.min_count},
                   {"smoothing", c.smoothing},
                   {"gamma", c.gamma},
                   {"behavior_delta", c.behavior_delta},
                   {"shaping", {{"enabled", c.shaping.enabled},
                                {"map_threshold", c.shaping.map_threshold},
                                {"bonus", c.shaping.bonus}}}};
  j["ope"] = {{"epsilon", c.epsilon}};
  j["experiment"] = {{"n_realizations", c.n_realizations},
                     {"percentile", c.percentile},
                     {"train_fraction", c.train_fraction},
                     {"refit_clustering_per_realization", c.refit_clustering_per_realization}};
  j["gof"] = {{"n_mc", c.gof_n_mc}, {"alpha", c.gof_alpha}};
  j["diagnostics"] = {{"excess_bins", c.excess_bins},
                      {"excess_boot", c.excess_boot},
                      {"aliasing_widths_h", c.aliasing_widths_h},
                      {"timeline_patients", c.timeline_patients},
                      {"dose_excess_physical_units", c.dose_excess_physical_units}};
  j["simgen"] = {{"world", {{"n_states", c.world.n_states},
                            {"base_improve", c.world.base_improve},
                            {"base_worsen", c.world.base_worsen},
                            {"surv_exit", c.world.surv_exit},
                            {"die_exit", c.world.die_exit},
                            {"benefit_per_level", c.world.benefit_per_level},
                            {"toxicity_per_level", c.world.toxicity_per_level},
                            {"toxicity_threshold", c.world.toxicity_threshold},
                            {"dose_prob", c.world.dose_prob},
                            {"start_decay", c.world.start_decay}}},
                 {"confound_strength", c.confound_strength},
                 {"n_patients", c.sim_n_patients},
                 {"max_horizon_bins", c.sim_max_horizon_bins},
                 {"decision_period_h", c.sim_decision_period_h},
                 {"record_spacing_h", c.sim_record_spacing_h},
                 {"vaso_gate_prob", c.sim_vaso_gate_prob},
                 {"noise_scale", c.sim_noise_scale},
                 {"gamma", c.sim_gamma},
                 {"dips", {{"enabled", c.dips.enabled},
                           {"short_prob", c.dips.short_prob},
                           {"long_prob", c.dips.long_prob},
                           {"short_map", c.dips.short_map},
                           {"long_map", c.dips.long_map},
                           {"short_records", c.dips.short_records},
                           {"long_records", c.dips.long_records}}}};
  return j;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

}  // namespace icumdp

#endif
