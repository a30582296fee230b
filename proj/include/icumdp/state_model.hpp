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

#ifndef ICUMDP_STATE_MODEL_HPP
#define ICUMDP_STATE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "icumdp/action_grid.hpp"
#include "icumdp/error.hpp"
#include "icumdp/random.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

/// k-means state model over z-normalized per-bin feature vectors.
///
/// Cluster ids are the MDP's nonterminal states. The two absorbing terminals
/// (ids k and k+1) are appended downstream and never produced by assignment.
struct StateModel {
  int k = 0;
  std::vector<std::string> feature_order;   // canonical feature names (post constant-drop)
  Eigen::VectorXd scaler_mean;              // per feature
  Eigen::VectorXd scaler_std;               // per feature, all > 0
  Eigen::MatrixXd centroids;                // k x d, normalized space
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(feature_order.size()); }

  Eigen::VectorXd normalize(const Eigen::VectorXd& raw) const {
    return (raw - scaler_mean).cwiseQuotient(scaler_std);
  }

  /// Raw-unit mean of one feature at a centroid (inverse of the scaler).
  double state_feature_mean(int state, const std::string& feature) const {
    auto it = std::find(feature_order.begin(), feature_order.end(), feature);
    if (it == feature_order.end())
      throw ValidationError("feature '" + feature + "' not in state model");
    const auto j = static_cast<Eigen::Index>(it - feature_order.begin());
    return centroids(state, j) * scaler_std(j) + scaler_mean(j);
  }
};

/// Per-fit diagnostics (inertia trace, dropped features).
struct StateModelFitInfo {
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  std::vector<std::string> dropped_constant_features;
  int iterations = 0;
};

namespace detail {

inline Eigen::VectorXd feature_vector(const std::map<std::string, double>& features,
                                      const std::vector<std::string>& order) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j) {
    auto it = features.find(order[j]);
    if (it == features.end() || is_missing(it->second))
      throw ValidationError("missing required feature: " + order[j]);
    x(static_cast<Eigen::Index>(j)) = it->second;
  }
  return x;
}

/// Squared distances from every row of `points` to every centroid row.
inline Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids) {
  const Eigen::VectorXd pn = points.rowwise().squaredNorm();
  const Eigen::VectorXd cn = centroids.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * points * centroids.transpose();
  d.colwise() += pn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

inline int nearest_row(const Eigen::MatrixXd& centroids, const Eigen::VectorXd& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < centroids.rows(); ++i) {
    const double d = (centroids.row(i).transpose() - x).squaredNorm();
    if (d < best_d) {  // strict: ties keep the lowest id
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace detail

/// Flatten a binned cohort into the clustering matrix (row per bin) in
/// patient order, bin order.
inline Eigen::MatrixXd cohort_feature_matrix(const std::vector<BinnedTrajectory>& cohort,
                                             const std::vector<std::string>& order) {
  std::size_t n = 0;
  for (const auto& t : cohort) n += t.bins.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(order.size()));
  Eigen::Index row = 0;
  for (const auto& t : cohort)
    for (const auto& b : t.bins) m.row(row++) = detail::feature_vector(b.features, order).transpose();
  return m;
}

/// Fit the k-means state model: z-normalize, k-means++ seeding, Lloyd
/// iterations until the relative inertia change drops below 1e-6 (or 300
/// iterations). Constant features are dropped and reported via `info`.
inline StateModel fit_state_model(const std::vector<BinnedTrajectory>& cohort, int k, std::uint64_t seed,
                                  StateModelFitInfo* info = nullptr) {
  if (k < 1) throw ValidationError("state count k must be >= 1");

  std::set<std::string> names;
  for (const auto& t : cohort)
    for (const auto& b : t.bins)
      for (const auto& [name, _] : b.features) names.insert(name);
  std::vector<std::string> order(names.begin(), names.end());
  if (order.empty()) throw ValidationError("cohort has no features to cluster");

  Eigen::MatrixXd raw = cohort_feature_matrix(cohort, order);
  const Eigen::Index n = raw.rows();

  // Scaler over all bins; drop constant columns.
  Eigen::VectorXd mean = raw.colwise().mean();
  Eigen::VectorXd var = (raw.rowwise() - mean.transpose()).array().square().colwise().mean();
  std::vector<std::string> kept;
  std::vector<Eigen::Index> kept_cols;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (var(j) > 1e-24) {
      kept.push_back(order[static_cast<std::size_t>(j)]);
      kept_cols.push_back(j);
    } else if (info) {
      info->dropped_constant_features.push_back(order[static_cast<std::size_t>(j)]);
    }
  }
  if (kept.empty()) throw ValidationError("all features are constant; nothing to cluster");

  StateModel model;
  model.k = k;
  model.seed = seed;
  model.feature_order = kept;
  model.scaler_mean.resize(static_cast<Eigen::Index>(kept_cols.size()));
  model.scaler_std.resize(static_cast<Eigen::Index>(kept_cols.size()));
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kept_cols.size()));
  for (std::size_t j = 0; j < kept_cols.size(); ++j) {
    model.scaler_mean(static_cast<Eigen::Index>(j)) = mean(kept_cols[j]);
    model.scaler_std(static_cast<Eigen::Index>(j)) = std::sqrt(var(kept_cols[j]));
    x.col(static_cast<Eigen::Index>(j)) =
        (raw.col(kept_cols[j]).array() - mean(kept_cols[j])) / model.scaler_std(static_cast<Eigen::Index>(j));
  }

  // Distinct-row count gates k.
  {
    std::set<std::vector<double>> distinct;
    for (Eigen::Index i = 0; i < n && distinct.size() < static_cast<std::size_t>(k); ++i) {
      std::vector<double> row(x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
      distinct.insert(std::move(row));
    }
    if (distinct.size() < static_cast<std::size_t>(k))
      throw ValidationError("fewer distinct bins than k=" + std::to_string(k));
  }

  Rng rng(seed);

  // k-means++ seeding.
  Eigen::MatrixXd centroids(k, x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd min_d = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) weights[static_cast<std::size_t>(i)] = min_d(i);
    const int pick = rng.categorical(weights);
    centroids.row(c) = x.row(pick);
    min_d = min_d.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  // Lloyd iterations.
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < 300; ++iter) {
    const Eigen::MatrixXd d = detail::pairwise_sq_dist(x, centroids);
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      const double best_d = d.row(i).minCoeff(&best);
      assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
      inertia += best_d;
    }
    if (info) info->inertia_history.push_back(inertia);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      count(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (count(c) > 0.0) centroids.row(c) = sums.row(c) / count(c);  // empty clusters keep their centroid

    const double denom = std::max(prev_inertia, 1e-30);
    if (std::isfinite(prev_inertia) && (prev_inertia - inertia) / denom < 1e-6) {
      ++iter;
      break;
    }
    prev_inertia = inertia;
  }
  if (info) info->iterations = iter;

  model.centroids = std::move(centroids);
  return model;
}

/// Nearest centroid in normalized space; ties broken by lowest id.
inline int assign_state(const std::map<std::string, double>& features, const StateModel& model) {
  const Eigen::VectorXd x = model.normalize(detail::feature_vector(features, model.feature_order));
  return detail::nearest_row(model.centroids, x);
}

/// Map every bin to (state, action) and copy the terminal label.
inline DiscretizedCohort discretize_cohort(const std::vector<BinnedTrajectory>& cohort,
                                           const StateModel& model, const ActionGrid& grid) {
  DiscretizedCohort out;
  out.n_clusters = model.k;
  out.patients.reserve(cohort.size());
  for (const auto& t : cohort) {
    DiscretizedPatient p;
    p.patient_id = t.patient_id;
    p.outcome = t.outcome;
    p.steps.reserve(t.bins.size());
    for (const auto& b : t.bins)
      p.steps.push_back(Step{assign_state(b.features, model),
                             discretize_action(b.fluid_ml_total, b.vaso_rate_bin, grid)});
    out.patients.push_back(std::move(p));
  }
  return out;
}

inline nlohmann::json to_json(const StateModel& model) {
  nlohmann::json j;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["feature_order"] = model.feature_order;
  j["scaler_mean"] = std::vector<double>(model.scaler_mean.data(), model.scaler_mean.data() + model.scaler_mean.size());
  j["scaler_std"] = std::vector<double>(model.scaler_std.data(), model.scaler_std.data() + model.scaler_std.size());
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.centroids.rows(); ++i) {
    std::vector<double> row(model.centroids.cols());
    for (Eigen::Index c = 0; c < model.centroids.cols(); ++c) row[static_cast<std::size_t>(c)] = model.centroids(i, c);
    rows.push_back(row);
  }
  j["centroids"] = std::move(rows);
  return j;
}

inline StateModel state_model_from_json(const nlohmann::json& j) {
  StateModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.feature_order = j.at("feature_order").get<std::vector<std::string>>();
  const auto mean = j.at("scaler_mean").get<std::vector<double>>();
  const auto stdv = j.at("scaler_std").get<std::vector<double>>();
  const auto rows = j.at("centroids");
  if (mean.size() != m.feature_order.size() || stdv.size() != m.feature_order.size() ||
      rows.size() != static_cast<std::size_t>(m.k))
    throw ValidationError("state model JSON has inconsistent shapes");
  const auto d = static_cast<Eigen::Index>(m.feature_order.size());
  m.scaler_mean.resize(d);
  m.scaler_std.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    m.scaler_mean(i) = mean[static_cast<std::size_t>(i)];
    m.scaler_std(i) = stdv[static_cast<std::size_t>(i)];
    if (!(m.scaler_std(i) > 0.0)) throw ValidationError("state model scaler std must be positive");
  }
  m.centroids.resize(m.k, d);
  for (int i = 0; i < m.k; ++i) {
    const auto row = rows.at(i).get<std::vector<double>>();
    if (row.size() != m.feature_order.size()) throw ValidationError("state model centroid has wrong width");
    for (Eigen::Index c = 0; c < d; ++c) m.centroids(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace icumdp

#endif
