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

// Conventional ranking metrics computed from a league table of network
// meta-analysis estimates: P-scores, P-scores against an MCID threshold, and
// the probability of having the best value.

#ifndef TCCRANK_COMPARE_H_
#define TCCRANK_COMPARE_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tccrank/tcc.h"

namespace tccrank {

struct Contrast {
  double estimate = 0.0;  // log scale, first versus second
  double se = 0.0;
};

class LeagueTable {
 public:
  // Pairwise form. `entries` are keyed by ordered (first, second) labels;
  // either or both orientations may be given, and must agree.
  static LeagueTable FromPairwise(
      std::vector<std::string> treatments,
      const std::vector<std::pair<std::pair<std::string, std::string>,
                                  Contrast>>& entries,
      Direction direction);

  // Basic form: estimates of each treatment versus `reference` (whose own
  // entry is 0). `covariance` is over all treatments with the reference's
  // row and column zero; when absent, the diagonal of squared SEs is used.
  static LeagueTable FromBasic(std::vector<std::string> treatments,
                               int reference, Eigen::VectorXd estimates,
                               Eigen::VectorXd se,
                               std::optional<Eigen::MatrixXd> covariance,
                               Direction direction);

  const std::vector<std::string>& treatments() const { return treatments_; }
  int num_treatments() const { return static_cast<int>(treatments_.size()); }
  Direction direction() const { return direction_; }
  void set_direction(Direction direction) { direction_ = direction; }

  // Estimate and SE of `a` versus `b` (indices).
  Contrast Get(int a, int b) const;

  int reference() const { return reference_; }
  const Eigen::VectorXd& basic_estimates() const { return basic_estimates_; }
  const Eigen::MatrixXd& basic_covariance() const { return basic_covariance_; }
  // True when the basic covariance was derived from SEs alone.
  bool independence_assumed() const { return independence_assumed_; }

 private:
  std::vector<std::string> treatments_;
  Direction direction_ = Direction::kBeneficial;
  // Upper triangle, (i, j) with i < j: estimate of i versus j.
  std::map<std::pair<int, int>, Contrast> pairwise_;
  int reference_ = 0;
  Eigen::VectorXd basic_estimates_;
  Eigen::MatrixXd basic_covariance_;
  bool independence_assumed_ = true;
};

// CSV readers. Pairwise: treat1, treat2, estimate, se. Basic: treat,
// estimate_vs_ref, se, with the reference either named or given as the row
// with estimate 0 and se 0. Covariance: header "treat,<names...>".
LeagueTable ParsePairwiseLeagueTable(std::istream& in, Direction direction);
LeagueTable ParseBasicLeagueTable(std::istream& in,
                                  std::optional<std::string> reference,
                                  std::istream* covariance,
                                  Direction direction);

using ScoreTable = std::vector<std::pair<std::string, double>>;

ScoreTable PScores(const LeagueTable& table);

// Mean over rivals of the probability that the benefit over the rival
// exceeds log(mcid).
ScoreTable PScoresCiv(const LeagueTable& table, double mcid);

struct ProbBestOptions {
  std::int64_t nsim = 100000;
  std::uint64_t seed = 1;
  bool parallel = true;
};

struct ProbBestResult {
  ScoreTable probabilities;
  bool independence_assumed = false;
  std::vector<std::int64_t> tally;
};

// Throws DataError (covariance_not_psd) for an indefinite covariance.
ProbBestResult ProbBest(const LeagueTable& table,
                        const ProbBestOptions& options = {});

}  // namespace tccrank

#endif  // TCCRANK_COMPARE_H_
