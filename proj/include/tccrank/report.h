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

// Serialization of fits, trees and comparison metrics. CSV numbers carry six
// significant digits; JSON numbers round-trip exactly. All output is a pure
// function of its inputs.

#ifndef TCCRANK_REPORT_H_
#define TCCRANK_REPORT_H_

#include <filesystem>
#include <ostream>
#include <string>

#include "json.hpp"
#include "tccrank/compare.h"
#include "tccrank/davidson.h"
#include "tccrank/partition.h"
#include "tccrank/tcc.h"

namespace tccrank {

// Ranks by descending ability, 1 = best; equal abilities share a rank.
std::vector<int> AbilityRanks(const AbilityFit& fit);

nlohmann::ordered_json FitToJson(const AbilityFit& fit,
                                 const Tournament* tournament = nullptr);

// treatment, psi, se, pi, rank; rows sorted by rank.
void WriteRankingCsv(const AbilityFit& fit, std::ostream& out);

// Dot-and-interval plot: one row per treatment ordered by ability, point at
// pi, segment over its confidence interval, log-scaled x axis.
std::string RenderAbilityPlot(const AbilityFit& fit,
                              const std::string& title = "Treatment abilities");
// Throws DataError (io_error) when the file cannot be written.
void EmitPlot(const AbilityFit& fit, const std::filesystem::path& path);

nlohmann::ordered_json TreeToJson(const PartitionTree& tree);
std::string RenderTreeText(const PartitionTree& tree);

// `p_scores_civ` is empty when no MCID was given.
struct CompareReport {
  ScoreTable p_scores;
  ScoreTable p_scores_civ;
  ProbBestResult prob_best;
  double mcid = 0.0;
  std::int64_t nsim = 0;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json CompareToJson(const CompareReport& report);
void WriteCompareCsv(const CompareReport& report, std::ostream& out);

}  // namespace tccrank

#endif  // TCCRANK_REPORT_H_
