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

// Batch front door for the pipeline. Every subcommand reads one JSON config
// (all fields defaulted), routes randomness through explicit seeds, and
// writes a manifest listing config echo, input digests, and artifacts.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "icumdp/icumdp.hpp"

namespace fs = std::filesystem;
using icumdp::PipelineConfig;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file (defaults apply when omitted)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "override the config thread count");
}

PipelineConfig load_config(const CommonArgs& args) {
  PipelineConfig config;
  if (!args.config_path.empty()) config = icumdp::load_pipeline_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.threads) config.threads = *args.threads;
  return config;
}

icumdp::Manifest make_manifest(const std::string& command, const PipelineConfig& config) {
  icumdp::Manifest manifest;
  manifest.command = command;
  manifest.config = icumdp::to_json(config);
  manifest.seed = config.seed;
  return manifest;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  return (fs::path(args.out_dir) / name).string();
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw icumdp::ValidationError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

void finish(icumdp::Manifest& manifest, const CommonArgs& args) {
  manifest.add_output("manifest.json");
  std::sort(manifest.outputs.begin(), manifest.outputs.end());
  icumdp::write_manifest(manifest, out_path(args, "manifest.json"));
}

// Shared fit: parse -> bin -> grid -> state model -> discretize -> MDP +
// behavior. Used by fit, and rebuilt from artifacts by downstream commands.
struct FittedArtifacts {
  icumdp::ActionGrid grid;
  icumdp::StateModel states;
  icumdp::MdpModel model;
  icumdp::StochasticPolicy behavior;
  std::vector<double> start_distribution;
};

FittedArtifacts fit_from_cohort(const std::vector<icumdp::RawTrajectory>& cohort,
                                const PipelineConfig& config) {
  FittedArtifacts fitted;
  const auto bins = icumdp::bin_cohort(cohort, config.binning);
  fitted.grid = icumdp::fit_action_grid(bins);
  fitted.states = icumdp::fit_state_model(bins, config.k, config.seed);
  const auto disc = icumdp::discretize_cohort(bins, fitted.states, fitted.grid);
  fitted.model = icumdp::normalize_transitions(icumdp::count_transitions(disc), config.min_count,
                                               config.smoothing, config.gamma);
  if (config.shaping.enabled)
    fitted.model = icumdp::apply_reward_shaping(std::move(fitted.model), fitted.states, config.shaping);
  fitted.behavior = icumdp::estimate_behavior_policy(disc, config.behavior_delta);
  fitted.start_distribution = icumdp::empirical_start_distribution(disc);
  return fitted;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw icumdp::ValidationError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw icumdp::ValidationError("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

FittedArtifacts load_artifacts(const std::string& model_dir) {
  FittedArtifacts fitted;
  const fs::path dir(model_dir);
  fitted.grid = icumdp::action_grid_from_json(read_json_file((dir / "action_grid.json").string()));
  fitted.states = icumdp::state_model_from_json(read_json_file((dir / "state_model.json").string()));
  fitted.model = icumdp::read_mdp((dir / "mdp_model.csv").string(),
                                  read_json_file((dir / "mdp_header.json").string()));
  fitted.start_distribution =
      read_json_file((dir / "start_distribution.json").string()).get<std::vector<double>>();

  const auto behavior_path = (dir / "behavior_policy.csv").string();
  auto in = icumdp::csv::open_input(behavior_path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = icumdp::csv::split(line);
    if (cells.size() != 1 + icumdp::kNumActions)
      throw icumdp::ValidationError("bad behavior policy row in " + behavior_path);
    std::array<double, icumdp::kNumActions> row{};
    for (int a = 0; a < icumdp::kNumActions; ++a)
      row[static_cast<std::size_t>(a)] = icumdp::csv::parse_double(cells[static_cast<std::size_t>(a) + 1], "behavior prob");
    fitted.behavior.prob.push_back(row);
  }
  fitted.behavior.validate();
  return fitted;
}

std::vector<icumdp::BinnedTrajectory> bin_input(const std::vector<icumdp::RawTrajectory>& cohort,
                                                const PipelineConfig& config) {
  return icumdp::bin_cohort(cohort, config.binning);
}

// --------------------------- subcommand bodies ----------------------------

int cmd_simulate(const CommonArgs& args) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("simulate", config);
  const auto generator = config.generator_config();
  const auto sim = icumdp::generate_cohort(generator);

  icumdp::write_trajectories(sim.raw, out_path(args, "cohort.csv"));
  manifest.add_output("cohort.csv");
  write_json(icumdp::to_json(generator), out_path(args, "generator_config.json"));
  manifest.add_output("generator_config.json");
  {
    auto out = icumdp::csv::open_output(out_path(args, "truth.csv"));
    out << "patient_id,step,state,action,outcome\n";
    for (const auto& p : sim.truth.patients)
      for (std::size_t t = 0; t < p.steps.size(); ++t)
        out << p.patient_id << ',' << t << ',' << p.steps[t].state << ',' << p.steps[t].action << ','
            << icumdp::to_string(p.outcome) << '\n';
    manifest.add_output("truth.csv");
  }
  finish(manifest, args);
  std::cout << "simulated " << sim.raw.size() << " patients -> " << args.out_dir << "\n";
  return 0;
}

int cmd_ingest(const CommonArgs& args, const std::string& input) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("ingest", config);
  manifest.add_input(input);

  const auto cohort = icumdp::parse_trajectories(input);
  const auto bins = bin_input(cohort, config);

  std::size_t total_bins = 0;
  for (const auto& t : bins) total_bins += t.bins.size();
  {
    auto out = icumdp::csv::open_output(out_path(args, "binned.csv"));
    const auto features = icumdp::cohort_feature_names(cohort);
    out << "patient_id,bin_index";
    for (const auto& f : features) out << ',' << f;
    out << ",fluid_ml_total,vaso_rate_bin,outcome\n";
    for (const auto& t : bins)
      for (const auto& b : t.bins) {
        out << t.patient_id << ',' << b.bin_index;
        for (const auto& f : features) out << ',' << icumdp::csv::format(b.features.at(f));
        out << ',' << icumdp::csv::format(b.fluid_ml_total) << ',' << icumdp::csv::format(b.vaso_rate_bin)
            << ',' << icumdp::to_string(t.outcome) << '\n';
      }
    manifest.add_output("binned.csv");
  }
  std::size_t died = 0;
  for (const auto& t : cohort)
    if (t.outcome == icumdp::Outcome::Died) ++died;
  write_json(nlohmann::json{{"patients", cohort.size()},
                            {"bins", total_bins},
                            {"bin_width_h", config.binning.bin_width_h},
                            {"mortality", static_cast<double>(died) / static_cast<double>(cohort.size())},
                            {"vasopressor_exposure", icumdp::vasopressor_exposure(cohort)}},
             out_path(args, "ingest_summary.json"));
  manifest.add_output("ingest_summary.json");
  finish(manifest, args);
  std::cout << "validated " << cohort.size() << " patients, " << total_bins << " bins -> " << args.out_dir
            << "\n";
  return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& input) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("fit", config);
  manifest.add_input(input);

  const auto cohort = icumdp::parse_trajectories(input);
  const auto fitted = fit_from_cohort(cohort, config);

  write_json(icumdp::to_json(fitted.grid), out_path(args, "action_grid.json"));
  manifest.add_output("action_grid.json");
  write_json(icumdp::to_json(fitted.states), out_path(args, "state_model.json"));
  manifest.add_output("state_model.json");
  icumdp::write_mdp_csv(fitted.model, out_path(args, "mdp_model.csv"));
  manifest.add_output("mdp_model.csv");
  write_json(icumdp::mdp_header_json(fitted.model, config.shaping), out_path(args, "mdp_header.json"));
  manifest.add_output("mdp_header.json");
  icumdp::write_policy_csv(fitted.behavior, out_path(args, "behavior_policy.csv"));
  manifest.add_output("behavior_policy.csv");
  write_json(nlohmann::json(fitted.start_distribution), out_path(args, "start_distribution.json"));
  manifest.add_output("start_distribution.json");
  finish(manifest, args);
  std::cout << "fitted grid, " << config.k << "-state model and MDP -> " << args.out_dir << "\n";
  return 0;
}

int cmd_plan(const CommonArgs& args, const std::string& model_dir) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("plan", config);
  for (const char* name :
       {"action_grid.json", "state_model.json", "mdp_model.csv", "mdp_header.json", "behavior_policy.csv"})
    manifest.add_input((fs::path(model_dir) / name).string());

  auto fitted = load_artifacts(model_dir);
  const auto plan = icumdp::policy_iteration(fitted.model);
  icumdp::write_policy_csv(plan.policy, out_path(args, "ai_policy.csv"));
  manifest.add_output("ai_policy.csv");

  nlohmann::json values;
  values["iterations"] = plan.iterations;
  values["start_value"] = icumdp::start_value(plan.value, fitted.start_distribution);
  std::vector<double> v(plan.value.v.data(), plan.value.v.data() + plan.value.v.size());
  values["state_values"] = v;
  write_json(values, out_path(args, "plan_values.json"));
  manifest.add_output("plan_values.json");
  finish(manifest, args);
  std::cout << "policy iteration converged in " << plan.iterations << " iterations -> " << args.out_dir
            << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& input, const std::string& model_dir,
                 const std::string& policy_path) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("evaluate", config);
  manifest.add_input(input);
  if (!policy_path.empty()) manifest.add_input(policy_path);

  auto fitted = load_artifacts(model_dir);
  const auto cohort = icumdp::parse_trajectories(input);
  const auto bins = bin_input(cohort, config);
  const auto disc = icumdp::discretize_cohort(bins, fitted.states, fitted.grid);

  // Evaluation policy: a deterministic policy CSV softened at epsilon, or the
  // stored behavior policy itself when --policy is omitted.
  icumdp::StochasticPolicy eval_policy;
  double epsilon_used = 0.0;
  nlohmann::json model_value;
  if (policy_path.empty()) {
    eval_policy = fitted.behavior;
    model_value["policy"] = "behavior";
  } else {
    const auto det = icumdp::read_deterministic_policy_csv(policy_path);
    eval_policy = icumdp::soften_policy(det, config.epsilon);
    epsilon_used = config.epsilon;
    model_value["policy"] = policy_path;
    model_value["model_start_value"] =
        icumdp::start_value(icumdp::policy_evaluation(fitted.model, det), fitted.start_distribution);
  }

  const auto report =
      icumdp::wis_evaluate(disc, eval_policy, fitted.behavior, config.gamma, fitted.model.reward, epsilon_used);
  nlohmann::json j = icumdp::to_json(report);
  j["model_value"] = model_value;
  j["mean_return"] = [&] {
    double s = 0.0;
    for (double g : report.returns) s += g;
    return s / static_cast<double>(report.returns.size());
  }();
  write_json(j, out_path(args, "evaluation.json"));
  manifest.add_output("evaluation.json");
  icumdp::write_weights_csv(report, out_path(args, "weights.csv"));
  manifest.add_output("weights.csv");
  finish(manifest, args);
  std::cout << "WIS estimate " << report.estimate << " (ESS " << report.ess << "/" << report.n() << ") -> "
            << args.out_dir << "\n";
  return 0;
}

int cmd_experiment(const CommonArgs& args, const std::string& input) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("experiment", config);
  manifest.add_input(input);

  const auto cohort = icumdp::parse_trajectories(input);
  const auto results = icumdp::run_realizations(cohort, config.experiment_config());
  write_json(icumdp::experiment_summary_json(results, config.experiment_config()),
             out_path(args, "experiment_summary.json"));
  manifest.add_output("experiment_summary.json");
  icumdp::write_value_distribution_csv(results, out_path(args, "value_distribution.csv"));
  manifest.add_output("value_distribution.csv");
  const auto best = icumdp::select_best_policy(results, config.percentile);
  icumdp::write_policy_csv(best.policy, out_path(args, "best_policy.csv"));
  manifest.add_output("best_policy.csv");
  finish(manifest, args);

  std::size_t failures = 0;
  for (const auto& r : results)
    if (r.failed) ++failures;
  std::cout << results.size() << " realizations (" << failures << " failed), best value " << best.value
            << " -> " << args.out_dir << "\n";
  return 0;
}

int cmd_diagnose(const CommonArgs& args, const std::string& input, const std::string& model_dir,
                 const std::string& policy_path) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("diagnose", config);
  manifest.add_input(input);
  manifest.add_input(policy_path);

  auto fitted = load_artifacts(model_dir);
  const auto policy = icumdp::read_deterministic_policy_csv(policy_path);
  const auto cohort = icumdp::parse_trajectories(input);
  const auto bins = bin_input(cohort, config);
  const auto disc = icumdp::discretize_cohort(bins, fitted.states, fitted.grid);

  icumdp::write_action_histogram_csv(icumdp::action_histogram(disc), out_path(args, "action_histogram.csv"));
  manifest.add_output("action_histogram.csv");

  std::vector<std::string> timeline_ids = config.timeline_patients;
  if (timeline_ids.empty()) timeline_ids.push_back(cohort.front().patient_id);
  for (const auto& pid : timeline_ids) {
    std::size_t index = bins.size();
    for (std::size_t i = 0; i < bins.size(); ++i)
      if (bins[i].patient_id == pid) {
        index = i;
        break;
      }
    if (index == bins.size()) throw icumdp::ValidationError("timeline patient not found: " + pid);
    const auto rows =
        icumdp::patient_timeline(bins[index], disc.patients[index], policy, fitted.states, fitted.model);
    const std::string name = "timeline_" + pid + ".csv";
    icumdp::write_timeline_csv(rows, out_path(args, name));
    manifest.add_output(name);
  }

  const auto fluid_curve =
      icumdp::dose_excess_curve(disc, policy, fitted.grid, icumdp::DoseCategory::Fluid, config.excess_bins,
                                config.excess_boot, config.seed, config.dose_excess_physical_units);
  icumdp::write_dose_excess_csv(fluid_curve, out_path(args, "dose_excess_fluid.csv"));
  manifest.add_output("dose_excess_fluid.csv");
  const auto vaso_curve =
      icumdp::dose_excess_curve(disc, policy, fitted.grid, icumdp::DoseCategory::Vaso, config.excess_bins,
                                config.excess_boot, config.seed, config.dose_excess_physical_units);
  icumdp::write_dose_excess_csv(vaso_curve, out_path(args, "dose_excess_vaso.csv"));
  manifest.add_output("dose_excess_vaso.csv");

  const auto aliasing =
      icumdp::binning_aliasing_report(cohort, config.aliasing_widths_h, fitted.grid, config.binning);
  icumdp::write_aliasing_csv(aliasing, out_path(args, "aliasing.csv"));
  manifest.add_output("aliasing.csv");

  write_json(nlohmann::json{{"vasopressor_exposure", icumdp::vasopressor_exposure(cohort)},
                            {"patients", cohort.size()},
                            {"action_total", icumdp::action_histogram(disc).total()}},
             out_path(args, "diagnostics_summary.json"));
  manifest.add_output("diagnostics_summary.json");
  finish(manifest, args);
  std::cout << "diagnostics written -> " << args.out_dir << "\n";
  return 0;
}

int cmd_gof(const CommonArgs& args, const std::string& input, const std::string& model_dir) {
  const PipelineConfig config = load_config(args);
  auto manifest = make_manifest("gof", config);
  manifest.add_input(input);

  auto fitted = load_artifacts(model_dir);
  const auto cohort = icumdp::parse_trajectories(input);
  const auto bins = bin_input(cohort, config);
  const auto disc = icumdp::discretize_cohort(bins, fitted.states, fitted.grid);

  const auto report =
      icumdp::goodness_of_fit(fitted.model, disc, config.gof_n_mc, config.gof_alpha, config.seed);
  icumdp::write_gof_csv(report, out_path(args, "gof.csv"));
  manifest.add_output("gof.csv");
  write_json(icumdp::to_json(report), out_path(args, "gof_summary.json"));
  manifest.add_output("gof_summary.json");
  finish(manifest, args);
  if (report.empty_warning)
    std::cerr << "warning: no (state, action) row had enough held-out data to test\n";
  std::cout << "gof: " << report.rows.size() << " rows, rejection fraction " << report.rejection_fraction()
            << " -> " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline tabular RL pipeline for ICU dosing trajectories"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string input, model_dir, policy_path;

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  add_common(simulate, args);

  auto* ingest = app.add_subcommand("ingest", "validate and bin a trajectory file");
  add_common(ingest, args);
  ingest->add_option("--input", input, "trajectory CSV")->required();

  auto* fit = app.add_subcommand("fit", "fit action grid, state model, MDP and behavior policy");
  add_common(fit, args);
  fit->add_option("--input", input, "trajectory CSV")->required();

  auto* plan = app.add_subcommand("plan", "policy-iterate the fitted MDP");
  add_common(plan, args);
  plan->add_option("--model", model_dir, "directory with fit artifacts")->required();

  auto* evaluate = app.add_subcommand("evaluate", "model values plus WIS/ESS on a cohort");
  add_common(evaluate, args);
  evaluate->add_option("--input", input, "trajectory CSV")->required();
  evaluate->add_option("--model", model_dir, "directory with fit artifacts")->required();
  evaluate->add_option("--policy", policy_path, "deterministic policy CSV (default: behavior policy)");

  auto* experiment = app.add_subcommand("experiment", "bootstrap realizations and best-policy selection");
  add_common(experiment, args);
  experiment->add_option("--input", input, "trajectory CSV")->required();

  auto* diagnose = app.add_subcommand("diagnose", "histograms, timelines, dose-excess, aliasing, exposure");
  add_common(diagnose, args);
  diagnose->add_option("--input", input, "trajectory CSV")->required();
  diagnose->add_option("--model", model_dir, "directory with fit artifacts")->required();
  diagnose->add_option("--policy", policy_path, "deterministic policy CSV")->required();

  auto* gof = app.add_subcommand("gof", "transition goodness-of-fit on held-out data");
  add_common(gof, args);
  gof->add_option("--input", input, "held-out trajectory CSV")->required();
  gof->add_option("--model", model_dir, "directory with fit artifacts")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << R"({"error":{"kind":"usage","message":)" << nlohmann::json(std::string(e.what())).dump()
              << "}}\n";
    return 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (ingest->parsed()) return cmd_ingest(args, input);
    if (fit->parsed()) return cmd_fit(args, input);
    if (plan->parsed()) return cmd_plan(args, model_dir);
    if (evaluate->parsed()) return cmd_evaluate(args, input, model_dir, policy_path);
    if (experiment->parsed()) return cmd_experiment(args, input);
    if (diagnose->parsed()) return cmd_diagnose(args, input, model_dir, policy_path);
    if (gof->parsed()) return cmd_gof(args, input, model_dir);
  } catch (const icumdp::ValidationError& e) {
    std::cerr << R"({"error":{"kind":"validation","message":)" << nlohmann::json(std::string(e.what())).dump()
              << "}}\n";
    return 2;
  } catch (const icumdp::NumericsError& e) {
    std::cerr << R"({"error":{"kind":"numerical","message":)" << nlohmann::json(std::string(e.what())).dump()
              << "}}\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":{"kind":"internal","message":)" << nlohmann::json(std::string(e.what())).dump()
              << "}}\n";
    return 3;
  }
  return 1;
}
