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

#ifndef ICUMDP_SOLVE_HPP
#define ICUMDP_SOLVE_HPP

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "icumdp/error.hpp"
#include "icumdp/mdp.hpp"
#include "icumdp/policy.hpp"

namespace icumdp {

/// State values with the terminals pinned at 0 (reward is earned on entry).
struct ValueVector {
  Eigen::VectorXd v;  // length n_states

  double at(int s) const { return v(s); }
};

struct PolicyIterationResult {
  DeterministicPolicy policy;
  ValueVector value;
  int iterations = 0;
};

namespace detail {

/// Effective policy rows: (action, probability) pairs with positive mass,
/// validated against the model's support mask.
///
/// A state whose policy mass lies entirely on unsupported pairs is treated as
/// isolated (empty row, value pinned at 0) as long as nothing transitions into
/// it; this covers clusters the data never visited. Partial unsupported mass,
/// or an unsupported-but-reachable state, is an error.
inline std::vector<std::vector<std::pair<int, double>>> effective_rows(const MdpModel& model,
                                                                       const StochasticPolicy& policy) {
  if (policy.k() != model.n_clusters)
    throw ValidationError("policy covers " + std::to_string(policy.k()) + " states, model has " +
                          std::to_string(model.n_clusters));
  policy.validate();
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(model.n_clusters));
  std::vector<char> isolated(static_cast<std::size_t>(model.n_clusters), 0);
  for (int s = 0; s < model.n_clusters; ++s) {
    bool any_supported = false, any_unsupported = false;
    int bad_action = -1;
    for (int a = 0; a < kNumActions; ++a) {
      const double p = policy.prob[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      if (p <= 0.0) continue;
      if (model.row(s, a).supported) {
        any_supported = true;
        rows[static_cast<std::size_t>(s)].emplace_back(a, p);
      } else {
        any_unsupported = true;
        bad_action = a;
      }
    }
    if (any_supported && any_unsupported)
      throw ValidationError("policy places mass on unsupported pair (state " + std::to_string(s) +
                            ", action " + std::to_string(bad_action) + ")");
    if (!any_supported) isolated[static_cast<std::size_t>(s)] = 1;
  }
  for (int s = 0; s < model.n_clusters; ++s)
    for (const auto& [a, p] : rows[static_cast<std::size_t>(s)])
      for (std::size_t j = 0; j < model.row(s, a).next.size(); ++j) {
        const int next = model.row(s, a).next[j];
        if (next < model.n_clusters && isolated[static_cast<std::size_t>(next)] && model.row(s, a).prob[j] > 0.0)
          throw ValidationError("policy has no supported action at reachable state " + std::to_string(next));
      }
  return rows;
}

/// Every nonterminal state must reach a terminal with positive probability
/// under the policy (backward reachability); required for gamma = 1.
inline void check_absorbing(const MdpModel& model,
                            const std::vector<std::vector<std::pair<int, double>>>& rows) {
  const int k = model.n_clusters;
  // incoming[s'] = nonterminal states with a positive-probability edge into s'
  std::vector<std::vector<int>> incoming(static_cast<std::size_t>(model.n_states()));
  for (int s = 0; s < k; ++s)
    for (const auto& [a, p] : rows[static_cast<std::size_t>(s)])
      for (std::size_t j = 0; j < model.row(s, a).next.size(); ++j)
        if (model.row(s, a).prob[j] > 0.0) incoming[static_cast<std::size_t>(model.row(s, a).next[j])].push_back(s);

  std::vector<char> reaches(static_cast<std::size_t>(model.n_states()), 0);
  std::deque<int> queue{model.survival_state(), model.death_state()};
  reaches[static_cast<std::size_t>(model.survival_state())] = 1;
  reaches[static_cast<std::size_t>(model.death_state())] = 1;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int from : incoming[static_cast<std::size_t>(s)]) {
      if (!reaches[static_cast<std::size_t>(from)]) {
        reaches[static_cast<std::size_t>(from)] = 1;
        queue.push_back(from);
      }
    }
  }
  for (int s = 0; s < k; ++s)
    if (!reaches[static_cast<std::size_t>(s)] && !rows[static_cast<std::size_t>(s)].empty())
      throw NumericsError("gamma = 1 requires an absorbing chain, but state " + std::to_string(s) +
                          " cannot reach a terminal under the policy");
}

inline double bellman_residual(const MdpModel& model,
                               const std::vector<std::vector<std::pair<int, double>>>& rows,
                               const Eigen::VectorXd& v) {
  double worst = 0.0;
  for (int s = 0; s < model.n_clusters; ++s) {
    double backup = 0.0;
    for (const auto& [a, p] : rows[static_cast<std::size_t>(s)]) {
      const auto& row = model.row(s, a);
      double q = 0.0;
      for (std::size_t j = 0; j < row.next.size(); ++j)
        q += row.prob[j] * (model.reward[static_cast<std::size_t>(row.next[j])] + model.gamma * v(row.next[j]));
      backup += p * q;
    }
    worst = std::max(worst, std::abs(v(s) - backup));
  }
  return worst;
}

}  // namespace detail

/// Expected one-step-lookahead value of (s, a).
inline double q_value(const MdpModel& model, const ValueVector& value, int s, int a) {
  const auto& row = model.row(s, a);
  if (!row.supported)
    throw ValidationError("q_value on unsupported pair (state " + std::to_string(s) + ", action " +
                          std::to_string(a) + ")");
  double q = 0.0;
  for (std::size_t j = 0; j < row.next.size(); ++j)
    q += row.prob[j] *
         (model.reward[static_cast<std::size_t>(row.next[j])] + model.gamma * value.v(row.next[j]));
  return q;
}

/// Exact policy evaluation: solves V = R^pi + gamma P^pi V by sparse direct
/// solve, with a value-iteration fallback at tolerance 1e-10. For gamma = 1
/// the chain must be absorbing (verified first). The returned values satisfy
/// a Bellman residual of at most 1e-8.
inline ValueVector policy_evaluation(const MdpModel& model, const StochasticPolicy& policy) {
  const auto rows = detail::effective_rows(model, policy);
  if (model.gamma >= 1.0) detail::check_absorbing(model, rows);

  const int k = model.n_clusters;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(k);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(k) * 4);
  for (int s = 0; s < k; ++s) {
    double diag = 1.0;
    std::map<int, double> off;
    for (const auto& [a, p] : rows[static_cast<std::size_t>(s)]) {
      const auto& row = model.row(s, a);
      for (std::size_t j = 0; j < row.next.size(); ++j) {
        const int next = row.next[j];
        const double mass = p * row.prob[j];
        r(s) += mass * model.reward[static_cast<std::size_t>(next)];
        if (next < k) off[next] += model.gamma * mass;  // terminal values are pinned at 0
      }
    }
    for (const auto& [next, mass] : off) {
      if (next == s) diag -= mass;
      else triplets.emplace_back(s, next, -mass);
    }
    triplets.emplace_back(s, s, diag);
  }

  Eigen::SparseMatrix<double> a(k, k);
  a.setFromTriplets(triplets.begin(), triplets.end());

  ValueVector value;
  value.v = Eigen::VectorXd::Zero(model.n_states());
  bool solved = false;
  {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() == Eigen::Success) {
      value.v.head(k) = lu.solve(r);
      solved = (lu.info() == Eigen::Success) && value.v.head(k).allFinite();
    }
  }
  if (!solved) {
    // Value-iteration fallback; guaranteed progress on absorbing / discounted chains.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(model.n_states());
    Eigen::VectorXd next_v = v;
    for (long iter = 0; iter < 2000000; ++iter) {
      double delta = 0.0;
      for (int s = 0; s < k; ++s) {
        double backup = 0.0;
        for (const auto& [act, p] : rows[static_cast<std::size_t>(s)]) {
          const auto& row = model.row(s, act);
          double q = 0.0;
          for (std::size_t j = 0; j < row.next.size(); ++j)
            q += row.prob[j] *
                 (model.reward[static_cast<std::size_t>(row.next[j])] + model.gamma * v(row.next[j]));
          backup += p * q;
        }
        next_v(s) = backup;
        delta = std::max(delta, std::abs(backup - v(s)));
      }
      v.head(k) = next_v.head(k);
      if (delta < 1e-10) break;
    }
    value.v = v;
  }

  const double residual = detail::bellman_residual(model, rows, value.v);
  if (!(residual <= 1e-8))
    throw NumericsError("policy evaluation residual " + csv::format(residual) + " exceeds 1e-8 (singular system?)");
  return value;
}

inline ValueVector policy_evaluation(const MdpModel& model, const DeterministicPolicy& policy) {
  return policy_evaluation(model, as_stochastic(policy));
}

/// Greedy argmax over supported actions; ties broken by lowest action id.
inline DeterministicPolicy policy_improvement(const MdpModel& model, const ValueVector& value) {
  if (!value.v.allFinite()) throw NumericsError("policy improvement requires finite values");
  DeterministicPolicy policy;
  policy.action.resize(static_cast<std::size_t>(model.n_clusters));
  for (int s = 0; s < model.n_clusters; ++s) {
    int best = -1;
    double best_q = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (!model.row(s, a).supported) continue;
      const double q = q_value(model, value, s, a);
      if (best < 0 || q > best_q) {
        best = a;
        best_q = q;
      }
    }
    if (best < 0)
      throw ValidationError("state " + std::to_string(s) + " has no supported action");
    policy.action[static_cast<std::size_t>(s)] = best;
  }
  return policy;
}

/// Alternate exact evaluation and greedy improvement from the
/// all-lowest-supported-action policy until the policy is stable.
///
/// The in-loop improvement keeps the incumbent action unless a strictly
/// better one exceeds it by 1e-10; without that margin, pairs of actions
/// whose true Q values tie can flip forever on evaluation round-off.
inline PolicyIterationResult policy_iteration(const MdpModel& model) {
  DeterministicPolicy policy;
  policy.action.resize(static_cast<std::size_t>(model.n_clusters));
  for (int s = 0; s < model.n_clusters; ++s) {
    const auto actions = model.supported_actions(s);
    if (actions.empty()) throw ValidationError("state " + std::to_string(s) + " has no supported action");
    policy.action[static_cast<std::size_t>(s)] = actions.front();
  }

  constexpr double kSwitchMargin = 1e-10;
  PolicyIterationResult result;
  for (int iter = 1; iter <= 1000; ++iter) {
    ValueVector value = policy_evaluation(model, policy);
    DeterministicPolicy next = policy;
    for (int s = 0; s < model.n_clusters; ++s) {
      const int incumbent = policy.action[static_cast<std::size_t>(s)];
      double best_q = q_value(model, value, s, incumbent);
      for (int a = 0; a < kNumActions; ++a) {
        if (a == incumbent || !model.row(s, a).supported) continue;
        const double q = q_value(model, value, s, a);
        if (q > best_q + kSwitchMargin) {
          next.action[static_cast<std::size_t>(s)] = a;
          best_q = q;
        }
      }
    }
    result.iterations = iter;
    if (next.action == policy.action) {
      result.policy = std::move(policy);
      result.value = std::move(value);
      return result;
    }
    policy = std::move(next);
  }
  throw NumericsError("policy iteration failed to converge in 1000 iterations");
}

/// Dot product of a start distribution with the values.
inline double start_value(const ValueVector& value, const std::vector<double>& start_distribution) {
  if (static_cast<Eigen::Index>(start_distribution.size()) != value.v.size())
    throw ValidationError("start distribution length does not match the state count");
  double total = 0.0, dot = 0.0;
  for (std::size_t s = 0; s < start_distribution.size(); ++s) {
    if (start_distribution[s] < 0.0) throw ValidationError("start distribution has a negative entry");
    total += start_distribution[s];
    dot += start_distribution[s] * value.v(static_cast<Eigen::Index>(s));
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("start distribution sums to " + csv::format(total) + ", expected 1");
  return dot;
}

/// Project a stochastic policy onto the model's support mask, renormalizing
/// each row. Needed to evaluate the smoothed behavior policy on a model whose
/// rare pairs fall below min_count. A state with no supported action at all
/// keeps its row unchanged; evaluation then treats it as isolated.
inline StochasticPolicy restrict_to_support(const StochasticPolicy& policy, const MdpModel& model) {
  if (policy.k() != model.n_clusters)
    throw ValidationError("policy/model state count mismatch in restrict_to_support");
  StochasticPolicy out = policy;
  for (int s = 0; s < model.n_clusters; ++s) {
    if (model.supported_actions(s).empty()) continue;
    double kept = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (!model.row(s, a).supported) out.prob[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = 0.0;
      kept += out.prob[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    }
    if (kept <= 0.0)
      throw ValidationError("state " + std::to_string(s) + " has no supported action under the policy");
    for (int a = 0; a < kNumActions; ++a) out.prob[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] /= kept;
  }
  return out;
}

}  // namespace icumdp

#endif
