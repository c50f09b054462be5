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

#include "tccrank/study_data.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

#include "tccrank/csv.h"
#include "tccrank/errors.h"
#include "tccrank/stats.h"

namespace tccrank {
namespace {

std::string LinePrefix(int line) { return "line " + std::to_string(line) + ": "; }

double RequireNumber(const std::string& field, const char* column, int line) {
  std::optional<double> value = ParseDouble(field);
  if (!value) {
    throw DataError(error_code::kBadNumber, LinePrefix(line) + "column '" +
                                                column + "' is not a number: '" +
                                                field + "'");
  }
  return *value;
}

std::optional<double> OptionalNumber(const std::string& field,
                                     const char* column, int line) {
  if (field.empty()) return std::nullopt;
  return RequireNumber(field, column, line);
}

double ToLogScale(double value, const char* column, int line) {
  if (!(value > 0.0)) {
    throw DataError(error_code::kBadNumber,
                    LinePrefix(line) + "column '" + column +
                        "' must be positive on the ratio scale");
  }
  return std::log(value);
}

std::pair<std::string, std::string> UnorderedPair(const std::string& a,
                                                  const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

size_t Network::NumContrasts() const {
  size_t total = 0;
  for (const Study& study : studies) total += study.contrasts.size();
  return total;
}

void ValidateStudyEffect(const StudyEffect& e) {
  const std::string where = "study '" + e.study_id + "' (" + e.treat_a +
                            " vs " + e.treat_b + "): ";
  if (e.treat_a == e.treat_b) {
    throw DataError(error_code::kInvalidRow,
                    where + "a contrast needs two distinct treatments");
  }
  if (!std::isfinite(e.effect)) {
    throw DataError(error_code::kBadNumber, where + "effect is not finite");
  }
  if (e.se && !(*e.se >= 0.0)) {
    throw DataError(error_code::kNegativeSe, where + "se must be >= 0");
  }
  if (e.ci_lower.has_value() != e.ci_upper.has_value()) {
    throw DataError(error_code::kMissingInterval,
                    where + "interval needs both lower and upper bounds");
  }
  if (e.ci_lower && !(*e.ci_lower <= e.effect && e.effect <= *e.ci_upper)) {
    throw DataError(error_code::kInvalidRow,
                    where + "interval does not contain the point estimate");
  }
  if (!e.se && !e.ci_lower) {
    throw DataError(error_code::kMissingInterval,
                    where + "either se or lower/upper bounds are required");
  }
  if (!(e.ci_level > 0.0 && e.ci_level < 1.0)) {
    throw DataError(error_code::kInvalidRow,
                    where + "ci_level must lie in (0, 1)");
  }
}

StudyEffect CompleteIntervals(const StudyEffect& effect) {
  StudyEffect out = effect;
  const double z = WaldMultiplier(effect.ci_level);
  if (!out.ci_lower && out.se) {
    out.ci_lower = out.effect - z * *out.se;
    out.ci_upper = out.effect + z * *out.se;
  } else if (out.ci_lower && !out.se) {
    out.se = (*out.ci_upper - *out.ci_lower) / (2.0 * z);
  }
  return out;
}

Network ParseContrastTable(std::istream& in, const ParseOptions& options) {
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
  const int treat1_col = require("treat1");
  const int treat2_col = require("treat2");
  const int effect_col = require("effect");
  const std::optional<int> se_col = table.ColumnIndex("se");
  const std::optional<int> lower_col = table.ColumnIndex("lower");
  const std::optional<int> upper_col = table.ColumnIndex("upper");
  const std::optional<int> level_col = table.ColumnIndex("ci_level");
  if (lower_col.has_value() != upper_col.has_value()) {
    throw DataError(error_code::kMissingColumn,
                    "columns 'lower' and 'upper' must appear together");
  }
  if (!se_col && !lower_col) {
    throw DataError(error_code::kMissingColumn,
                    "need either an 'se' column or 'lower' and 'upper'");
  }

  std::set<int> reserved = {study_col, treat1_col, treat2_col, effect_col};
  for (const auto& col : {se_col, lower_col, upper_col, level_col}) {
    if (col) reserved.insert(*col);
  }

  // Covariate columns and their specs.
  Network network;
  std::vector<std::pair<int, std::string>> covariate_cols;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    if (reserved.count(c)) continue;
    const std::string& name = table.header[c];
    covariate_cols.emplace_back(c, name);
    auto it = options.schema.find(name);
    if (it != options.schema.end()) {
      network.covariate_schema[name] = it->second;
      continue;
    }
    bool numeric = true;
    for (const auto& row : table.rows) {
      if (!row[c].empty() && !ParseDouble(row[c])) {
        numeric = false;
        break;
      }
    }
    network.covariate_schema[name].kind =
        numeric ? CovariateKind::kContinuous : CovariateKind::kCategorical;
  }

  std::unordered_map<std::string, size_t> study_index;
  std::set<std::string> seen_treatments;
  std::set<std::pair<std::string, std::pair<std::string, std::string>>>
      seen_pairs;

  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int line = table.line_numbers[r];
    StudyEffect e;
    e.study_id = row[study_col];
    e.treat_a = row[treat1_col];
    e.treat_b = row[treat2_col];
    if (e.study_id.empty() || e.treat_a.empty() || e.treat_b.empty()) {
      throw DataError(error_code::kInvalidRow,
                      LinePrefix(line) + "study and treatment labels are required");
    }
    e.effect = RequireNumber(row[effect_col], "effect", line);
    if (se_col) e.se = OptionalNumber(row[*se_col], "se", line);
    if (lower_col) {
      e.ci_lower = OptionalNumber(row[*lower_col], "lower", line);
      e.ci_upper = OptionalNumber(row[*upper_col], "upper", line);
    }
    if (level_col && !row[*level_col].empty()) {
      e.ci_level = RequireNumber(row[*level_col], "ci_level", line);
    }
    if (options.scale == EffectScale::kRatio) {
      e.effect = ToLogScale(e.effect, "effect", line);
      if (e.ci_lower) e.ci_lower = ToLogScale(*e.ci_lower, "lower", line);
      if (e.ci_upper) e.ci_upper = ToLogScale(*e.ci_upper, "upper", line);
    }
    if (e.se && *e.se < 0.0) {
      throw DataError(error_code::kNegativeSe,
                      LinePrefix(line) + "se must be non-negative");
    }

    for (const auto& [col, name] : covariate_cols) {
      const std::string& field = row[col];
      if (field.empty()) continue;
      CovariateSpec& spec = network.covariate_schema[name];
      if (spec.kind == CovariateKind::kContinuous) {
        std::optional<double> value = ParseDouble(field);
        if (!value) {
          throw DataError(error_code::kBadCovariate,
                          LinePrefix(line) + "covariate '" + name +
                              "' expects a number, got '" + field + "'");
        }
        e.covariates[name] = *value;
      } else {
        const bool fixed_levels = options.schema.count(name) &&
                                  !options.schema.at(name).levels.empty();
        auto level = std::find(spec.levels.begin(), spec.levels.end(), field);
        if (level == spec.levels.end()) {
          if (fixed_levels) {
            throw DataError(error_code::kBadCovariate,
                            LinePrefix(line) + "covariate '" + name +
                                "' has unknown level '" + field + "'");
          }
          spec.levels.push_back(field);
        }
        e.covariates[name] = field;
      }
    }

    try {
      ValidateStudyEffect(e);
    } catch (const DataError& error) {
      throw DataError(error.code(), LinePrefix(line) + error.what());
    }

    if (!seen_pairs.insert({e.study_id, UnorderedPair(e.treat_a, e.treat_b)})
             .second) {
      throw DataError(error_code::kDuplicatePair,
                      LinePrefix(line) + "study '" + e.study_id +
                          "' lists the pair " + e.treat_a + "/" + e.treat_b +
                          " more than once");
    }
    for (const std::string* label : {&e.treat_a, &e.treat_b}) {
      if (seen_treatments.insert(*label).second) {
        network.treatments.push_back(*label);
      }
    }
    auto [it, inserted] = study_index.try_emplace(e.study_id,
                                                  network.studies.size());
    if (inserted) network.studies.push_back(Study{e.study_id, {}});
    network.studies[it->second].contrasts.push_back(std::move(e));
  }
  return network;
}

void WriteContrastTable(const Network& network, std::ostream& out) {
  out << "study,treat1,treat2,effect,se,lower,upper,ci_level";
  for (const auto& [name, spec] : network.covariate_schema) {
    out << ',' << CsvEscape(name);
  }
  out << '\n';
  auto optional_number = [](const std::optional<double>& v) {
    return v ? FormatRoundTrip(*v) : std::string();
  };
  for (const Study& study : network.studies) {
    for (const StudyEffect& e : study.contrasts) {
      out << CsvEscape(e.study_id) << ',' << CsvEscape(e.treat_a) << ','
          << CsvEscape(e.treat_b) << ',' << FormatRoundTrip(e.effect) << ','
          << optional_number(e.se) << ',' << optional_number(e.ci_lower)
          << ',' << optional_number(e.ci_upper) << ','
          << FormatRoundTrip(e.ci_level);
      for (const auto& [name, spec] : network.covariate_schema) {
        out << ',';
        auto it = e.covariates.find(name);
        if (it == e.covariates.end()) continue;
        if (const double* value = std::get_if<double>(&it->second)) {
          out << FormatRoundTrip(*value);
        } else {
          out << CsvEscape(std::get<std::string>(it->second));
        }
      }
      out << '\n';
    }
  }
}

ValidationReport ValidateNetwork(const Network& network) {
  ValidationReport report;
  std::set<std::string> used;
  std::set<std::string> missing_covariates;
  for (const Study& study : network.studies) {
    std::set<std::string> arms;
    for (const StudyEffect& e : study.contrasts) {
      arms.insert(e.treat_a);
      arms.insert(e.treat_b);
      for (const auto& [name, spec] : network.covariate_schema) {
        if (!e.covariates.count(name)) missing_covariates.insert(name);
      }
    }
    used.insert(arms.begin(), arms.end());
    const int t = static_cast<int>(arms.size());
    const int expected = t * (t - 1) / 2;
    const int have = static_cast<int>(study.contrasts.size());
    if (have < expected) {
      report.incomplete_studies.push_back({study.id, t, have, expected});
    }
  }
  for (const std::string& treatment : network.treatments) {
    if (!used.count(treatment)) report.isolated_treatments.push_back(treatment);
  }
  report.covariates_with_missing.assign(missing_covariates.begin(),
                                        missing_covariates.end());
  return report;
}

}  // namespace tccrank
