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

#ifndef ICUMDP_POLICY_HPP
#define ICUMDP_POLICY_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

/// One action per nonterminal state.
struct DeterministicPolicy {
  std::vector<int> action;  // length k, entries in [0, 25)

  int k() const { return static_cast<int>(action.size()); }
};

/// Per-state distribution over the 25 actions.
struct StochasticPolicy {
  std::vector<std::array<double, kNumActions>> prob;  // rows sum to 1

  int k() const { return static_cast<int>(prob.size()); }

  void validate() const {
    for (std::size_t s = 0; s < prob.size(); ++s) {
      double total = 0.0;
      for (double p : prob[s]) {
        if (!(p >= 0.0)) throw ValidationError("policy row " + std::to_string(s) + " has a negative probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("policy row " + std::to_string(s) + " sums to " + csv::format(total));
    }
  }
};

/// Point-mass rows for a deterministic policy.
inline StochasticPolicy as_stochastic(const DeterministicPolicy& policy) {
  StochasticPolicy out;
  out.prob.resize(policy.action.size());
  for (std::size_t s = 0; s < policy.action.size(); ++s) {
    out.prob[s].fill(0.0);
    out.prob[s][static_cast<std::size_t>(policy.action[s])] = 1.0;
  }
  return out;
}

inline void write_policy_csv(const DeterministicPolicy& policy, const std::string& path) {
  auto out = csv::open_output(path);
  out << "state_id,action_id\n";
  for (std::size_t s = 0; s < policy.action.size(); ++s)
    out << s << ',' << policy.action[s] << '\n';
}

inline void write_policy_csv(const StochasticPolicy& policy, const std::string& path) {
  auto out = csv::open_output(path);
  out << "state_id";
  for (int a = 0; a < kNumActions; ++a) out << ",a" << a;
  out << '\n';
  for (std::size_t s = 0; s < policy.prob.size(); ++s) {
    out << s;
    for (int a = 0; a < kNumActions; ++a) out << ',' << csv::format(policy.prob[s][static_cast<std::size_t>(a)]);
    out << '\n';
  }
}

inline DeterministicPolicy read_deterministic_policy_csv(const std::string& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"state_id", "action_id"})
    throw ValidationError("bad deterministic policy header in " + path);
  DeterministicPolicy policy;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 2) throw ValidationError("bad policy row at line " + std::to_string(line_no));
    const auto state = csv::parse_int(cells[0], "state_id");
    const auto action = csv::parse_int(cells[1], "action_id");
    if (state != static_cast<long long>(policy.action.size()))
      throw ValidationError("policy rows must cover states 0..k-1 in order (" + path + ")");
    if (action < 0 || action >= kNumActions)
      throw ValidationError("action_id out of range at line " + std::to_string(line_no));
    policy.action.push_back(static_cast<int>(action));
  }
  return policy;
}

}  // namespace icumdp

#endif
