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

#ifndef ICUMDP_INGEST_HPP
#define ICUMDP_INGEST_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "icumdp/csv.hpp"
#include "icumdp/error.hpp"
#include "icumdp/types.hpp"

namespace icumdp {

/// How a feature is aggregated inside a time bin.
enum class Aggregation { Mean, Max, Min, Sum, First, Last };

inline Aggregation aggregation_from_string(const std::string& s) {
  if (s == "mean") return Aggregation::Mean;
  if (s == "max") return Aggregation::Max;
  if (s == "min") return Aggregation::Min;
  if (s == "sum") return Aggregation::Sum;
  if (s == "first") return Aggregation::First;
  if (s == "last") return Aggregation::Last;
  throw ValidationError("unknown aggregation mode: " + s);
}

inline const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Mean: return "mean";
    case Aggregation::Max: return "max";
    case Aggregation::Min: return "min";
    case Aggregation::Sum: return "sum";
    case Aggregation::First: return "first";
    case Aggregation::Last: return "last";
  }
  return "mean";
}

/// Binning rules. Dose rules are fixed (fluid summed, vasopressor rate maxed);
/// named features default to the within-bin mean unless overridden.
struct BinningConfig {
  double bin_width_h = 1.0;
  std::map<std::string, Aggregation> feature_aggregation;
  /// Cohort-level medians used for features missing before their first
  /// observation. Filled by bin_cohort(); may be provided directly.
  std::map<std::string, double> leading_impute;

  Aggregation aggregation_for(const std::string& feature) const {
    auto it = feature_aggregation.find(feature);
    return it == feature_aggregation.end() ? Aggregation::Mean : it->second;
  }
};

// ---------------------------------------------------------------------------
// Trajectory CSV parsing
//
// Schema: patient_id,time_h,<feature columns...>,fluid_ml,vaso_rate,outcome
// The feature block is every column between time_h and fluid_ml; map_mmhg is
// required. Missing feature cells are empty. outcome repeats on every row.
// ---------------------------------------------------------------------------

inline std::vector<RawTrajectory> parse_trajectories(const std::string& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty trajectory file: " + path);
  const auto header = csv::split(line);

  const std::vector<std::string> required = {"patient_id", "time_h", "fluid_ml", "vaso_rate", "outcome"};
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : required)
    if (!col.count(name)) throw ValidationError("missing required column: " + name);
  if (col.at("patient_id") != 0 || col.at("time_h") != 1 || col.at("outcome") + 1 != header.size() ||
      col.at("vaso_rate") + 2 != header.size() || col.at("fluid_ml") + 3 != header.size())
    throw ValidationError("trajectory header must be patient_id,time_h,<features...>,fluid_ml,vaso_rate,outcome");
  const std::size_t feature_begin = 2;
  const std::size_t feature_end = col.at("fluid_ml");
  std::vector<std::string> feature_names(header.begin() + feature_begin, header.begin() + feature_end);
  if (std::find(feature_names.begin(), feature_names.end(), kMapFeature) == feature_names.end())
    throw ValidationError(std::string("missing required column: ") + kMapFeature);

  std::vector<RawTrajectory> cohort;
  std::unordered_map<std::string, std::size_t> index_of;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split(line);
    const std::string at_line = "line " + std::to_string(line_no);
    if (cells.size() != header.size())
      throw ValidationError("malformed row at " + at_line + ": expected " + std::to_string(header.size()) +
                            " cells, got " + std::to_string(cells.size()));

    Record rec;
    const std::string& pid = cells[0];
    if (pid.empty()) throw ValidationError("empty patient_id at " + at_line);
    rec.time_h = csv::parse_double(cells[1], "time_h at " + at_line);
    if (!std::isfinite(rec.time_h)) throw ValidationError("non-finite time_h at " + at_line);
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
      const auto& cell = cells[feature_begin + f];
      if (cell.empty()) {
        rec.features[feature_names[f]] = std::numeric_limits<double>::quiet_NaN();
      } else {
        const double v = csv::parse_double(cell, feature_names[f] + " at " + at_line);
        if (!std::isfinite(v))
          throw ValidationError("non-finite value for " + feature_names[f] + " at " + at_line);
        rec.features[feature_names[f]] = v;
      }
    }
    rec.fluid_ml = csv::parse_double(cells[feature_end], "fluid_ml at " + at_line);
    rec.vaso_rate = csv::parse_double(cells[feature_end + 1], "vaso_rate at " + at_line);
    if (!std::isfinite(rec.fluid_ml) || rec.fluid_ml < 0.0)
      throw ValidationError("fluid_ml must be finite and >= 0 at " + at_line);
    if (!std::isfinite(rec.vaso_rate) || rec.vaso_rate < 0.0)
      throw ValidationError("vaso_rate must be finite and >= 0 at " + at_line);

    Outcome outcome;
    const std::string& oc = cells[feature_end + 2];
    if (oc == "survived") outcome = Outcome::Survived;
    else if (oc == "died") outcome = Outcome::Died;
    else throw ValidationError("outcome must be 'survived' or 'died' at " + at_line);

    auto it = index_of.find(pid);
    if (it == index_of.end()) {
      index_of.emplace(pid, cohort.size());
      cohort.push_back(RawTrajectory{pid, {}, outcome});
      cohort.back().records.push_back(std::move(rec));
    } else {
      RawTrajectory& traj = cohort[it->second];
      if (traj.outcome != outcome)
        throw ValidationError("inconsistent outcome for patient " + pid + " at " + at_line);
      if (rec.time_h <= traj.records.back().time_h)
        throw ValidationError("non-monotone timestamps for patient " + pid +
                              " (time_h " + csv::format(rec.time_h) + " at " + at_line + ")");
      traj.records.push_back(std::move(rec));
    }
  }
  if (cohort.empty()) throw ValidationError("no trajectories in file: " + path);
  return cohort;
}

/// Canonical feature order for a cohort: sorted union of feature names.
inline std::vector<std::string> cohort_feature_names(const std::vector<RawTrajectory>& cohort) {
  std::set<std::string> names;
  for (const auto& t : cohort)
    for (const auto& r : t.records)
      for (const auto& [name, _] : r.features) names.insert(name);
  return {names.begin(), names.end()};
}

/// Write a cohort in the trajectory CSV schema (round-trips through parse).
inline void write_trajectories(const std::vector<RawTrajectory>& cohort, const std::string& path) {
  const auto features = cohort_feature_names(cohort);
  auto out = csv::open_output(path);
  out << "patient_id,time_h";
  for (const auto& f : features) out << ',' << f;
  out << ",fluid_ml,vaso_rate,outcome\n";
  for (const auto& traj : cohort) {
    for (const auto& rec : traj.records) {
      out << traj.patient_id << ',' << csv::format(rec.time_h);
      for (const auto& f : features) {
        out << ',';
        auto it = rec.features.find(f);
        if (it != rec.features.end() && !is_missing(it->second)) out << csv::format(it->second);
      }
      out << ',' << csv::format(rec.fluid_ml) << ',' << csv::format(rec.vaso_rate) << ','
          << to_string(traj.outcome) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Time binning
// ---------------------------------------------------------------------------

namespace detail {

inline double aggregate(Aggregation mode, const std::vector<double>& values) {
  switch (mode) {
    case Aggregation::Mean: {
      double s = 0.0;
      for (double v : values) s += v;
      return s / static_cast<double>(values.size());
    }
    case Aggregation::Max: return *std::max_element(values.begin(), values.end());
    case Aggregation::Min: return *std::min_element(values.begin(), values.end());
    case Aggregation::Sum: {
      double s = 0.0;
      for (double v : values) s += v;
      return s;
    }
    case Aggregation::First: return values.front();
    case Aggregation::Last: return values.back();
  }
  return values.front();
}

}  // namespace detail

/// Aggregate one patient's records into fixed-width bins.
///
/// Bin b covers [b*w, (b+1)*w). Fluid is summed, vasopressor rate maxed,
/// features aggregated per config. Bins without records carry the previous
/// bin's features forward with zero doses. Features missing throughout a bin
/// fall back to the last observed value, and before any observation to the
/// cohort median in `config.leading_impute`.
inline BinnedTrajectory bin_trajectory(const RawTrajectory& raw, const BinningConfig& config) {
  if (!(config.bin_width_h > 0.0)) throw ValidationError("bin_width_h must be positive");
  if (raw.records.empty()) throw ValidationError("patient " + raw.patient_id + " has no records");
  const double w = config.bin_width_h;

  std::set<std::string> names;
  for (const auto& r : raw.records)
    for (const auto& [name, _] : r.features) names.insert(name);

  BinnedTrajectory out;
  out.patient_id = raw.patient_id;
  out.bin_width_h = w;
  out.outcome = raw.outcome;

  const int last_bin = static_cast<int>(std::floor(raw.records.back().time_h / w));
  std::map<std::string, double> carried;  // last imputed value per feature
  std::size_t next_record = 0;

  for (int b = 0; b <= last_bin; ++b) {
    const double hi = (static_cast<double>(b) + 1.0) * w;
    Bin bin;
    bin.bin_index = b;

    std::map<std::string, std::vector<double>> observed;
    while (next_record < raw.records.size() && raw.records[next_record].time_h < hi) {
      const Record& rec = raw.records[next_record];
      bin.observed = true;
      bin.fluid_ml_total += rec.fluid_ml;
      bin.vaso_rate_bin = std::max(bin.vaso_rate_bin, rec.vaso_rate);
      for (const auto& [name, value] : rec.features)
        if (!is_missing(value)) observed[name].push_back(value);
      ++next_record;
    }

    for (const auto& name : names) {
      auto it = observed.find(name);
      if (it != observed.end()) {
        carried[name] = detail::aggregate(config.aggregation_for(name), it->second);
      } else if (!carried.count(name)) {
        auto med = config.leading_impute.find(name);
        if (med == config.leading_impute.end())
          throw ValidationError("patient " + raw.patient_id + ": feature '" + name +
                                "' missing before first observation and no cohort median available");
        carried[name] = med->second;
      }
      bin.features[name] = carried[name];
    }
    out.bins.push_back(std::move(bin));
  }
  return out;
}

/// Median of all non-missing raw values per feature, for leading imputation.
inline std::map<std::string, double> cohort_feature_medians(const std::vector<RawTrajectory>& cohort) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& t : cohort)
    for (const auto& r : t.records)
      for (const auto& [name, v] : r.features)
        if (!is_missing(v)) values[name].push_back(v);
  std::map<std::string, double> medians;
  for (auto& [name, xs] : values) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n == 0) continue;
    medians[name] = (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  }
  return medians;
}

/// Bin a whole cohort, computing cohort medians for leading imputation first.
inline std::vector<BinnedTrajectory> bin_cohort(const std::vector<RawTrajectory>& cohort,
                                                BinningConfig config) {
  if (config.leading_impute.empty()) config.leading_impute = cohort_feature_medians(cohort);
  std::vector<BinnedTrajectory> out;
  out.reserve(cohort.size());
  for (const auto& t : cohort) out.push_back(bin_trajectory(t, config));
  return out;
}

}  // namespace icumdp

#endif
