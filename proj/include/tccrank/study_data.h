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

// Study-level contrast data: one row per pairwise relative effect within a
// study, on the log-ratio scale, with either a standard error or an interval.
//
// Effects of multi-arm studies are taken as already adjusted for the
// correlation between their contrasts; nothing here rescales variances.

#ifndef TCCRANK_STUDY_DATA_H_
#define TCCRANK_STUDY_DATA_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace tccrank {

using CovariateValue = std::variant<double, std::string>;
using CovariateMap = std::map<std::string, CovariateValue>;

enum class CovariateKind { kContinuous, kCategorical };

struct CovariateSpec {
  CovariateKind kind = CovariateKind::kContinuous;
  // Categorical levels in first-appearance order. When a schema is passed to
  // the parser with non-empty levels, values outside this list are rejected.
  std::vector<std::string> levels;

  bool operator==(const CovariateSpec&) const = default;
};

using CovariateSchema = std::map<std::string, CovariateSpec>;

// One contrast from one study. `effect` is the log-ratio of treat_a versus
// treat_b, so that a positive value favours treat_a on a beneficial outcome.
struct StudyEffect {
  std::string study_id;
  std::string treat_a;
  std::string treat_b;
  double effect = 0.0;
  std::optional<double> se;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  double ci_level = 0.95;
  CovariateMap covariates;

  bool operator==(const StudyEffect&) const = default;
};

struct Study {
  std::string id;
  std::vector<StudyEffect> contrasts;

  bool operator==(const Study&) const = default;
};

struct Network {
  std::vector<std::string> treatments;
  std::vector<Study> studies;
  CovariateSchema covariate_schema;

  size_t NumContrasts() const;
  bool operator==(const Network&) const = default;
};

enum class EffectScale { kLog, kRatio };

struct ParseOptions {
  EffectScale scale = EffectScale::kLog;
  // Columns listed here are parsed according to their spec; any other
  // non-mandatory column is inferred (all-numeric => continuous).
  CovariateSchema schema;
};

// Reads a contrast table. Mandatory columns: study, treat1, treat2, effect and
// either se or lower+upper (both may be present; each row must fill one).
// Optional: ci_level. Remaining columns become covariates; an empty cell is
// a missing covariate value.
Network ParseContrastTable(std::istream& in, const ParseOptions& options = {});

// Writes a table that ParseContrastTable reads back into an equal Network.
void WriteContrastTable(const Network& network, std::ostream& out);

// Fills whichever of (se) or (ci_lower, ci_upper) is absent using the normal
// quantile at ci_level. Existing values are never overwritten.
StudyEffect CompleteIntervals(const StudyEffect& effect);

// Checks the StudyEffect invariants; throws DataError on violation.
void ValidateStudyEffect(const StudyEffect& effect);

struct IncompleteStudy {
  std::string study_id;
  int arms = 0;
  int contrasts = 0;
  int expected = 0;
};

struct ValidationReport {
  std::vector<std::string> isolated_treatments;
  std::vector<IncompleteStudy> incomplete_studies;
  std::vector<std::string> covariates_with_missing;

  bool empty() const {
    return isolated_treatments.empty() && incomplete_studies.empty() &&
           covariates_with_missing.empty();
  }
};

ValidationReport ValidateNetwork(const Network& network);

}  // namespace tccrank

#endif  // TCCRANK_STUDY_DATA_H_
