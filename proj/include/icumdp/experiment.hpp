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

#ifndef ICUMDP_EXPERIMENT_HPP
#define ICUMDP_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/action_grid.hpp"
#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/ingest.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/ope.hpp"
#include "icumdp/parallel.hpp"
#include "icumdp/policy.hpp"
#include "icumdp/random.hpp"
#include "icumdp/solve.hpp"
#include "icumdp/state_model.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"ai", "clinician", "zero_drug", "random"};
  return names;
}

/// The never-dose baseline: action 0 everywhere; states where action 0 is
/// unsupported fall back to their lowest supported action (reported via
/// `substituted`).
inline DeterministicPolicy make_zero_drug_policy(const MdpModel& model,
                                                 std::vector<int>* substituted = nullptr) {
  DeterministicPolicy policy;
  policy.action.resize(static_cast<std::size_t>(model.n_clusters), 0);
  for (int s = 0; s < model.n_clusters; ++s) {
    if (model.row(s, 0).supported) continue;
    const auto actions = model.supported_actions(s);
    if (actions.empty()) throw ValidationError("state " + std::to_string(s) + " has no supported action");
    policy.action[static_cast<std::size_t>(s)] = actions.front();
    if (substituted) substituted->push_back(s);
  }
  return policy;
}

/// Uniform distribution over each state's supported actions.
inline StochasticPolicy make_random_policy(const MdpModel& model) {
  StochasticPolicy policy;
  policy.prob.resize(static_cast<std::size_t>(model.n_clusters));
  for (int s = 0; s < model.n_clusters; ++s) {
    const auto actions = model.supported_actions(s);
    if (actions.empty()) throw ValidationError("state " + std::to_string(s) + " has no supported action");
    policy.prob[static_cast<std::size_t>(s)].fill(0.0);
    for (int a : actions)
      policy.prob[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = 1.0 / static_cast<double>(actions.size());
  }
  return policy;
}

/// With terminal-only +-100 rewards and gamma = 1, value is an affine map of
/// mortality: m = (100 - v) / 200.
inline double value_to_mortality(double v) {
  if (!(v >= -100.0 - 1e-9 && v <= 100.0 + 1e-9))
    throw ValidationError("value " + csv::format(v) + " outside [-100, 100]");
  return (100.0 - v) / 200.0;
}

struct ExperimentConfig {
  int n_realizations = 500;
  int k = 750;
  double bin_width_h = 1.0;
  double gamma = 0.99;
  double epsilon = 0.01;         // softening for deterministic evaluation policies
  int min_count = 5;
  double smoothing = 0.0;
  double behavior_delta = 0.01;
  double train_fraction = 0.8;   // held-out share is the rest, split by patient
  bool refit_clustering_per_realization = true;
  double percentile = 95.0;      // best-policy selection
  ShapingConfig shaping;
  std::map<std::string, Aggregation> feature_aggregation;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const {
    if (n_realizations < 1) throw ValidationError("n_realizations must be >= 1");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw ValidationError("percentile must lie in (0, 100]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("train_fraction must lie in (0, 1)");
    if (k < 1) throw ValidationError("k must be >= 1");
  }
};

/// One bootstrap realization of the environment: values of the four policies
/// on the realization's own model and on held-out data via WIS.
struct RealizationResult {
  std::uint64_t seed = 0;
  std::map<std::string, double> model_value;
  std::map<std::string, double> wis_value;
  std::map<std::string, double> wis_ess;
  DeterministicPolicy learned_policy;
  bool failed = false;
  std::string failure;
};

namespace detail {

struct RealizationInputs {
  const std::vector<BinnedTrajectory>* bins = nullptr;  // all patients, cohort order
  const StateModel* shared_model = nullptr;             // when clustering is not refit
  const ExperimentConfig* config = nullptr;
};

inline RealizationResult run_one_realization(const RealizationInputs& in, std::uint64_t realization_seed) {
  const ExperimentConfig& cfg = *in.config;
  const auto& all_bins = *in.bins;
  RealizationResult result;
  result.seed = realization_seed;

  Rng rng(realization_seed);
  const std::size_t n = all_bins.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  const auto n_heldout = std::max<std::size_t>(1, static_cast<std::size_t>(
      std::floor((1.0 - cfg.train_fraction) * static_cast<double>(n))));
  if (n_heldout >= n) throw ValidationError("cohort too small for the train/held-out split");

  std::vector<BinnedTrajectory> heldout;
  heldout.reserve(n_heldout);
  for (std::size_t i = 0; i < n_heldout; ++i) heldout.push_back(all_bins[order[i]]);

  // Train set: bootstrap resample (with replacement) of the remaining patients.
  const std::size_t pool = n - n_heldout;
  std::vector<BinnedTrajectory> train;
  train.reserve(pool);
  for (std::size_t i = 0; i < pool; ++i)
    train.push_back(all_bins[order[n_heldout + rng.below(pool)]]);

  const ActionGrid grid = fit_action_grid(train);
  StateModel refit;
  if (cfg.refit_clustering_per_realization) refit = fit_state_model(train, cfg.k, realization_seed);
  const StateModel& states = cfg.refit_clustering_per_realization ? refit : *in.shared_model;

  const DiscretizedCohort disc_train = discretize_cohort(train, states, grid);
  const DiscretizedCohort disc_heldout = discretize_cohort(heldout, states, grid);

  MdpModel model = normalize_transitions(count_transitions(disc_train), cfg.min_count, cfg.smoothing, cfg.gamma);
  if (cfg.shaping.enabled) model = apply_reward_shaping(std::move(model), states, cfg.shaping);
  const StochasticPolicy behavior = estimate_behavior_policy(disc_train, cfg.behavior_delta);

  const PolicyIterationResult plan = policy_iteration(model);
  result.learned_policy = plan.policy;

  const DeterministicPolicy zero_drug = make_zero_drug_policy(model);
  const StochasticPolicy random_policy = make_random_policy(model);
  const StochasticPolicy clinician = restrict_to_support(behavior, model);

  const std::vector<double> start = empirical_start_distribution(disc_train);
  result.model_value["ai"] = start_value(plan.value, start);
  result.model_value["clinician"] = start_value(policy_evaluation(model, clinician), start);
  result.model_value["zero_drug"] = start_value(policy_evaluation(model, zero_drug), start);
  result.model_value["random"] = start_value(policy_evaluation(model, random_policy), start);

  const auto evaluate = [&](const StochasticPolicy& eval, double eps) {
    return wis_evaluate(disc_heldout, eval, behavior, cfg.gamma, model.reward, eps);
  };
  const OpeReport ai_rep = evaluate(soften_policy(plan.policy, cfg.epsilon), cfg.epsilon);
  const OpeReport clin_rep = evaluate(behavior, 0.0);
  const OpeReport zero_rep = evaluate(soften_policy(zero_drug, cfg.epsilon), cfg.epsilon);
  const OpeReport rand_rep = evaluate(random_policy, 0.0);
  result.wis_value["ai"] = ai_rep.estimate;
  result.wis_value["clinician"] = clin_rep.estimate;
  result.wis_value["zero_drug"] = zero_rep.estimate;
  result.wis_value["random"] = rand_rep.estimate;
  result.wis_ess["ai"] = ai_rep.ess;
  result.wis_ess["clinician"] = clin_rep.ess;
  result.wis_ess["zero_drug"] = zero_rep.ess;
  result.wis_ess["random"] = rand_rep.ess;
  return result;
}

}  // namespace detail

/// Bootstrap realizations of the environment. Each realization splits
/// patients 80/20 (held out untouched), bootstraps the training side, fits
/// grid/state model (refit or shared per config), estimates the MDP and
/// behavior policy, plans the AI policy, and evaluates all four policies on
/// the model and on held-out data. A failed realization is recorded and
/// skipped. Deterministic given the config seed, for any thread count.
inline std::vector<RealizationResult> run_realizations(const std::vector<RawTrajectory>& cohort,
                                                       const ExperimentConfig& config) {
  config.validate();
  if (cohort.size() < 5) throw ValidationError("cohort too small for realizations");

  BinningConfig binning;
  binning.bin_width_h = config.bin_width_h;
  binning.feature_aggregation = config.feature_aggregation;
  const std::vector<BinnedTrajectory> bins = bin_cohort(cohort, binning);

  StateModel shared;
  if (!config.refit_clustering_per_realization) shared = fit_state_model(bins, config.k, config.seed);

  detail::RealizationInputs inputs;
  inputs.bins = &bins;
  inputs.shared_model = &shared;
  inputs.config = &config;

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.n_realizations));
  std::uint64_t mix = config.seed;
  for (auto& s : seeds) s = splitmix64(mix);

  std::vector<RealizationResult> results(seeds.size());
  parallel_for(seeds.size(), config.threads, [&](std::size_t i) {
    try {
      results[i] = detail::run_one_realization(inputs, seeds[i]);
    } catch (const std::exception& e) {
      results[i].seed = seeds[i];
      results[i].failed = true;
      results[i].failure = e.what();
    }
  });
  return results;
}

/// The realization whose AI model value sits at the nearest-rank percentile
/// of the AI-value distribution (sorted ascending, rank = ceil(p/100 * n)).
struct BestPolicySelection {
  DeterministicPolicy policy;
  double value = 0.0;
  std::size_t realization_index = 0;  // into the results vector
};

inline BestPolicySelection select_best_policy(const std::vector<RealizationResult>& results,
                                              double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) throw ValidationError("percentile must lie in (0, 100]");
  std::vector<std::pair<double, std::size_t>> values;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (!results[i].failed) values.emplace_back(results[i].model_value.at("ai"), i);
  if (values.empty()) throw ValidationError("no successful realizations to select from");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  const std::size_t rank = std::max<std::size_t>(1, static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(n))));
  const auto& [value, index] = values[std::min(rank, n) - 1];
  return BestPolicySelection{results[index].learned_policy, value, index};
}

// ---------------------------------------------------------------------------
// Output artifacts
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [name, mode] : c.feature_aggregation) agg[name] = to_string(mode);
  return nlohmann::json{{"n_realizations", c.n_realizations},
                        {"k", c.k},
                        {"bin_width_h", c.bin_width_h},
                        {"gamma", c.gamma},
                        {"epsilon", c.epsilon},
                        {"min_count", c.min_count},
                        {"smoothing", c.smoothing},
                        {"behavior_delta", c.behavior_delta},
                        {"train_fraction", c.train_fraction},
                        {"refit_clustering_per_realization", c.refit_clustering_per_realization},
                        {"percentile", c.percentile},
                        {"shaping", {{"enabled", c.shaping.enabled},
                                     {"map_threshold", c.shaping.map_threshold},
                                     {"bonus", c.shaping.bonus}}},
                        {"feature_aggregation", agg},
                        {"seed", c.seed},
                        {"threads", c.threads}};
}

inline nlohmann::json experiment_summary_json(const std::vector<RealizationResult>& results,
                                              const ExperimentConfig& config) {
  nlohmann::json realizations = nlohmann::json::array();
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (r.failed) {
      ++failures;
      realizations.push_back({{"seed", r.seed}, {"failed", true}, {"failure", r.failure}});
      continue;
    }
    realizations.push_back({{"seed", r.seed},
                            {"failed", false},
                            {"model_value", r.model_value},
                            {"wis_value", r.wis_value},
                            {"wis_ess", r.wis_ess}});
  }
  nlohmann::json j;
  j["config"] = to_json(config);
  j["n_failures"] = failures;
  j["realizations"] = std::move(realizations);
  const auto selected = select_best_policy(results, config.percentile);
  j["selected"] = {{"realization_index", selected.realization_index},
                   {"model_value", selected.value},
                   {"percentile", config.percentile}};
  return j;
}

inline void write_value_distribution_csv(const std::vector<RealizationResult>& results,
                                         const std::string& path) {
  auto out = csv::open_output(path);
  out << "realization,policy,model_value,wis_value,wis_ess\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].failed) continue;
    for (const auto& name : policy_names())
      out << i << ',' << name << ',' << csv::format(results[i].model_value.at(name)) << ','
          << csv::format(results[i].wis_value.at(name)) << ','
          << csv::format(results[i].wis_ess.at(name)) << '\n';
  }
}

}  // namespace icumdp

#endif
