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

// Treatment-choice criterion: turns a study contrast (estimate + interval)
// into a preference for one of the two treatments or a tie, using a range of
// equivalence (ROE) around the null effect built from the minimal clinically
// important difference (MCID). Preferences are tallied into a Tournament.

#ifndef TCCRANK_TCC_H_
#define TCCRANK_TCC_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tccrank/study_data.h"

namespace tccrank {

enum class Direction { kBeneficial, kHarmful };

std::string_view DirectionName(Direction direction);
Direction ParseDirection(std::string_view name);

// All bounds are on the log scale.
struct RoeConfig {
  double mcid = 1.0;  // ratio scale
  double roe_lower = 0.0;
  double roe_upper = 0.0;
  double null_effect = 0.0;
  Direction direction = Direction::kBeneficial;
};

// Optional replacement bounds, given on the ratio scale.
struct RoeOverrides {
  std::optional<double> lower_ratio;
  std::optional<double> upper_ratio;
};

// Defaults to (log(1/mcid), log(mcid)). Throws DataError if mcid <= 1 or the
// bounds do not straddle the null effect.
RoeConfig BuildRoe(double mcid, const RoeOverrides& overrides = {},
                   Direction direction = Direction::kBeneficial);

enum class Verdict { kFirstWins, kSecondWins, kTie };

std::string_view VerdictName(Verdict verdict);
Verdict ParseVerdict(std::string_view name);

struct TccDecision {
  int upper_indicator = 0;  // 1 when the effect clears the ROE upwards
  int lower_indicator = 0;  // -1 when it clears the ROE downwards
  Verdict verdict = Verdict::kTie;
};

// Applies the criterion to a log-scale effect of the first treatment versus
// the second with interval [lower, upper]. Comparisons are strict: values
// equal to an ROE limit or to the null do not count as clearing it.
TccDecision EvaluateTcc(double effect, double lower, double upper,
                        const RoeConfig& roe);

struct PreferenceRecord {
  std::string study_id;
  std::string first;
  std::string second;
  Verdict verdict = Verdict::kTie;
  CovariateMap covariates;

  bool operator==(const PreferenceRecord&) const = default;
};

// Requires completed intervals; throws DataError otherwise.
PreferenceRecord ApplyTcc(const StudyEffect& effect, const RoeConfig& roe);

// Completes intervals and applies the criterion to every contrast, in
// network order. Each contrast of a multi-arm study yields its own record.
std::vector<PreferenceRecord> ApplyTcc(const Network& network,
                                       const RoeConfig& roe);

// Record CSV: study, treat1, treat2, verdict, then covariate columns.
void WriteRecordTable(const std::vector<PreferenceRecord>& records,
                      const CovariateSchema& schema, std::ostream& out);

struct RecordTable {
  std::vector<std::string> treatments;  // first-appearance order
  std::vector<PreferenceRecord> records;
  CovariateSchema covariate_schema;
};

RecordTable ParseRecordTable(std::istream& in,
                             const CovariateSchema& schema = {});

// Win/win/tie counts for the unordered pair (first, second) with
// first < second by treatment index.
struct PairCounts {
  int first_wins = 0;
  int second_wins = 0;
  int ties = 0;

  int total() const { return first_wins + second_wins + ties; }
  bool operator==(const PairCounts&) const = default;
};

// One observed pair in index form, the unit the likelihood kernels consume.
struct PairTally {
  int first = 0;
  int second = 0;
  double first_wins = 0.0;
  double second_wins = 0.0;
  double ties = 0.0;
};

class Tournament {
 public:
  Tournament() = default;
  explicit Tournament(std::vector<std::string> treatments);

  const std::vector<std::string>& treatments() const { return treatments_; }
  int num_treatments() const { return static_cast<int>(treatments_.size()); }
  std::optional<int> IndexOf(std::string_view treatment) const;

  // Records one outcome between treatments `a` and `b` (indices).
  // `verdict` is read relative to (a, b).
  void Add(int a, int b, Verdict verdict, int count = 1);

  // Number of times treatment `a` was preferred to `b`.
  int Wins(int a, int b) const;
  int Ties(int a, int b) const;

  // Keyed by (i, j) with i < j.
  const std::map<std::pair<int, int>, PairCounts>& counts() const {
    return counts_;
  }
  std::vector<PairTally> Pairs() const;

  int TotalRecords() const;
  int TotalTies() const;
  int TotalWins() const { return TotalRecords() - TotalTies(); }

  // Multiplies every count by `factor` (used for invariance checks).
  Tournament Scaled(int factor) const;

 private:
  std::vector<std::string> treatments_;
  std::map<std::string, int, std::less<>> index_;
  std::map<std::pair<int, int>, PairCounts> counts_;
};

// Exact tallies; throws DataError on a label not in `treatments`.
Tournament AggregateTournament(const std::vector<PreferenceRecord>& records,
                               const std::vector<std::string>& treatments);

}  // namespace tccrank

#endif  // TCCRANK_TCC_H_
