// Copyright 2026 The tccrank Authors.
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

#include "tccrank/tcc.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "tccrank/csv.h"
#include "tccrank/errors.h"

namespace tccrank {

std::string_view DirectionName(Direction direction) {
  return direction == Direction::kBeneficial ? "beneficial" : "harmful";
}

Direction ParseDirection(std::string_view name) {
  if (name == "beneficial") return Direction::kBeneficial;
  if (name == "harmful") return Direction::kHarmful;
  throw DataError(error_code::kInvalidConfig,
                  "direction must be 'beneficial' or 'harmful', got '" +
                      std::string(name) + "'");
}

RoeConfig BuildRoe(double mcid, const RoeOverrides& overrides,
                   Direction direction) {
  if (!(mcid > 1.0) || !std::isfinite(mcid)) {
    throw DataError(error_code::kInvalidConfig,
                    "mcid must be a ratio greater than 1");
  }
  RoeConfig roe;
  roe.mcid = mcid;
  roe.direction = direction;
  roe.null_effect = 0.0;
  roe.roe_upper = std::log(mcid);
  roe.roe_lower = std::log(1.0 / mcid);
  for (const auto& [ratio, target] :
       {std::pair{overrides.lower_ratio, &roe.roe_lower},
        std::pair{overrides.upper_ratio, &roe.roe_upper}}) {
    if (!ratio) continue;
    if (!(*ratio > 0.0)) {
      throw DataError(error_code::kInvalidConfig,
                      "ROE bounds must be positive ratios");
    }
    *target = std::log(*ratio);
  }
  if (!(roe.roe_lower < roe.null_effect && roe.null_effect < roe.roe_upper)) {
    throw DataError(error_code::kInvalidConfig,
                    "ROE must satisfy lower < 1 < upper on the ratio scale");
  }
  return roe;
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kFirstWins:
      return "first_wins";
    case Verdict::kSecondWins:
      return "second_wins";
    case Verdict::kTie:
      break;
  }
  return "tie";
}

Verdict ParseVerdict(std::string_view name) {
  if (name == "first_wins") return Verdict::kFirstWins;
  if (name == "second_wins") return Verdict::kSecondWins;
  if (name == "tie") return Verdict::kTie;
  throw DataError(error_code::kInvalidRow,
                  "unknown verdict '" + std::string(name) + "'");
}

TccDecision EvaluateTcc(double effect, double lower, double upper,
                        const RoeConfig& roe) {
  TccDecision d;
  const bool clears_upper =
      lower > roe.roe_upper ||
      (effect > roe.roe_upper && lower > roe.null_effect);
  const bool clears_lower =
      upper < roe.roe_lower ||
      (effect < roe.roe_lower && upper < roe.null_effect);
  d.upper_indicator = clears_upper ? 1 : 0;
  d.lower_indicator = clears_lower ? -1 : 0;
  int sum = d.upper_indicator + d.lower_indicator;
  if (roe.direction == Direction::kHarmful) sum = -sum;
  d.verdict = sum > 0   ? Verdict::kFirstWins
              : sum < 0 ? Verdict::kSecondWins
                        : Verdict::kTie;
  return d;
}

PreferenceRecord ApplyTcc(const StudyEffect& effect, const RoeConfig& roe) {
  if (!effect.ci_lower || !effect.ci_upper) {
    throw DataError(error_code::kMissingInterval,
                    "study '" + effect.study_id +
                        "': the criterion needs a completed interval");
  }
  PreferenceRecord record;
  record.study_id = effect.study_id;
  record.first = effect.treat_a;
  record.second = effect.treat_b;
  record.verdict =
      EvaluateTcc(effect.effect, *effect.ci_lower, *effect.ci_upper, roe)
          .verdict;
  record.covariates = effect.covariates;
  return record;
}

std::vector<PreferenceRecord> ApplyTcc(const Network& network,
                                       const RoeConfig& roe) {
  std::vector<PreferenceRecord> records;
  records.reserve(network.NumContrasts());
  for (const Study& study : network.studies) {
    for (const StudyEffect& e : study.contrasts) {
      records.push_back(ApplyTcc(CompleteIntervals(e), roe));
    }
  }
  return records;
}

void WriteRecordTable(const std::vector<PreferenceRecord>& records,
                      const CovariateSchema& schema, std::ostream& out) {
  out << "study,treat1,treat2,verdict";
  for (const auto& [name, spec] : schema) out << ',' << CsvEscape(name);
  out << '\n';
  for (const PreferenceRecord& r : records) {
    out << CsvEscape(r.study_id) << ',' << CsvEscape(r.first) << ','
        << CsvEscape(r.second) << ',' << VerdictName(r.verdict);
    for (const auto& [name, spec] : schema) {
      out << ',';
      auto it = r.covariates.find(name);
      if (it == r.covariates.end()) continue;
      if (const double* value = std::get_if<double>(&it->second)) {
        out << FormatRoundTrip(*value);
      } else {
        out << CsvEscape(std::get<std::string>(it->second));
      }
    }
    out << '\n';
  }
}

RecordTable ParseRecordTable(std::istream& in, const CovariateSchema& schema) {
  const CsvTable table = ReadCsv(in);
  auto require = [&](const char* name) {
    std::optional<int> index = table.ColumnIndex(name);
    if (!index) {
      throw DataError(error_code::kMissingColumn,
                      std::string("missing mandatory column '") + name + "'");
    }
    return *index;
  };
  const int study_col = require("study");
  const int first_col = require("treat1");
  const int second_col = require("treat2");
  const int verdict_col = require("verdict");

  RecordTable out;
  std::vector<std::pair<int, std::string>> covariate_cols;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    if (c == study_col || c == first_col || c == second_col ||
        c == verdict_col) {
      continue;
    }
    const std::string& name = table.header[c];
    covariate_cols.emplace_back(c, name);
    if (auto it = schema.find(name); it != schema.end()) {
      out.covariate_schema[name] = it->second;
      continue;
    }
    bool numeric = true;
    for (const auto& row : table.rows) {
      if (!row[c].empty() && !ParseDouble(row[c])) numeric = false;
    }
    out.covariate_schema[name].kind =
        numeric ? CovariateKind::kContinuous : CovariateKind::kCategorical;
  }

  std::set<std::string> seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where =
        "line " + std::to_string(table.line_numbers[r]) + ": ";
    PreferenceRecord record;
    record.study_id = row[study_col];
    record.first = row[first_col];
    record.second = row[second_col];
    if (record.first.empty() || record.second.empty() ||
        record.first == record.second) {
      throw DataError(error_code::kInvalidRow,
                      where + "a record needs two distinct treatments");
    }
    try {
      record.verdict = ParseVerdict(row[verdict_col]);
    } catch (const DataError& e) {
      throw DataError(e.code(), where + e.what());
    }
    for (const auto& [col, name] : covariate_cols) {
      const std::string& field = row[col];
      if (field.empty()) continue;
      CovariateSpec& spec = out.covariate_schema[name];
      if (spec.kind == CovariateKind::kContinuous) {
        std::optional<double> value = ParseDouble(field);
        if (!value) {
          throw DataError(error_code::kBadCovariate,
                          where + "covariate '" + name +
                              "' expects a number, got '" + field + "'");
        }
        record.covariates[name] = *value;
      } else {
        if (std::find(spec.levels.begin(), spec.levels.end(), field) ==
            spec.levels.end()) {
          if (schema.count(name) && !schema.at(name).levels.empty()) {
            throw DataError(error_code::kBadCovariate,
                            where + "covariate '" + name +
                                "' has unknown level '" + field + "'");
          }
          spec.levels.push_back(field);
        }
        record.covariates[name] = field;
      }
    }
    for (const std::string* label : {&record.first, &record.second}) {
      if (seen.insert(*label).second) out.treatments.push_back(*label);
    }
    out.records.push_back(std::move(record));
  }
  return out;
}

Tournament::Tournament(std::vector<std::string> treatments)
    : treatments_(std::move(treatments)) {
  for (int i = 0; i < static_cast<int>(treatments_.size()); ++i) {
    if (!index_.emplace(treatments_[i], i).second) {
      throw DataError(error_code::kInvalidConfig,
                      "duplicate treatment label '" + treatments_[i] + "'");
    }
  }
}

std::optional<int> Tournament::IndexOf(std::string_view treatment) const {
  auto it = index_.find(treatment);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Tournament::Add(int a, int b, Verdict verdict, int count) {
  if (a == b || a < 0 || b < 0 || a >= num_treatments() ||
      b >= num_treatments()) {
    throw DataError(error_code::kUnknownTreatment, "invalid treatment pair");
  }
  if (a > b) {
    std::swap(a, b);
    if (verdict == Verdict::kFirstWins) {
      verdict = Verdict::kSecondWins;
    } else if (verdict == Verdict::kSecondWins) {
      verdict = Verdict::kFirstWins;
    }
  }
  PairCounts& c = counts_[{a, b}];
  switch (verdict) {
    case Verdict::kFirstWins:
      c.first_wins += count;
      break;
    case Verdict::kSecondWins:
      c.second_wins += count;
      break;
    case Verdict::kTie:
      c.ties += count;
      break;
  }
}

int Tournament::Wins(int a, int b) const {
  auto it = counts_.find({std::min(a, b), std::max(a, b)});
  if (it == counts_.end()) return 0;
  return a < b ? it->second.first_wins : it->second.second_wins;
}

int Tournament::Ties(int a, int b) const {
  auto it = counts_.find({std::min(a, b), std::max(a, b)});
  return it == counts_.end() ? 0 : it->second.ties;
}

std::vector<PairTally> Tournament::Pairs() const {
  std::vector<PairTally> pairs;
  pairs.reserve(counts_.size());
  for (const auto& [key, c] : counts_) {
    if (c.total() == 0) continue;
    pairs.push_back({key.first, key.second, static_cast<double>(c.first_wins),
                     static_cast<double>(c.second_wins),
                     static_cast<double>(c.ties)});
  }
  return pairs;
}

int Tournament::TotalRecords() const {
  int total = 0;
  for (const auto& [key, c] : counts_) total += c.total();
  return total;
}

int Tournament::TotalTies() const {
  int total = 0;
  for (const auto& [key, c] : counts_) total += c.ties;
  return total;
}

Tournament Tournament::Scaled(int factor) const {
  Tournament out = *this;
  for (auto& [key, c] : out.counts_) {
    c.first_wins *= factor;
    c.second_wins *= factor;
    c.ties *= factor;
  }
  return out;
}

Tournament AggregateTournament(const std::vector<PreferenceRecord>& records,
                               const std::vector<std::string>& treatments) {
  Tournament t(treatments);
  for (const PreferenceRecord& r : records) {
    std::optional<int> a = t.IndexOf(r.first);
    std::optional<int> b = t.IndexOf(r.second);
    if (!a || !b) {
      throw DataError(error_code::kUnknownTreatment,
                      "record from study '" + r.study_id +
                          "' names a treatment outside the network: " +
                          (a ? r.second : r.first));
    }
    t.Add(*a, *b, r.verdict);
  }
  return t;
}

}  // namespace tccrank
