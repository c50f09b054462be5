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

// Batch driver: contrast or record tables in, ranking artifacts out.
//
//   tccrank rank      --input contrasts.csv --mcid 1.2 --out-dir out
//   tccrank partition --input contrasts.csv --mcid 1.2 --partition year,arm
//   tccrank compare   --input league.csv --league pairwise --mcid 1.2
//   tccrank tcc-dump  --input contrasts.csv --mcid 1.2
//
// Exit status is 0 on success, 1 on data or configuration errors and 2 on
// model errors. Every failure writes error.json to the output directory (when
// it can be created) and the same report to stderr.

#ifndef TCCRANK_CLI_H_
#define TCCRANK_CLI_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tccrank/errors.h"
#include "tccrank/partition.h"
#include "tccrank/study_data.h"
#include "tccrank/tcc.h"

namespace tccrank::cli {

enum class Subcommand { kRank, kPartition, kCompare, kTccDump };

enum class LeagueForm { kPairwise, kBasic };

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitModelError = 2;

struct RunConfig {
  Subcommand subcommand = Subcommand::kRank;

  // Contrast table, league table (compare) or, with `input_is_records`, a
  // preference-record table.
  std::filesystem::path input;
  bool input_is_records = false;
  std::filesystem::path out_dir = ".";
  std::set<std::string> formats = {"csv", "json", "svg"};
  double ci_level = 0.95;
  std::uint64_t seed = 1;

  EffectScale scale = EffectScale::kLog;
  std::vector<std::string> categorical;

  // Required whenever the criterion is applied; optional for compare.
  std::optional<double> mcid;
  RoeOverrides roe;
  Direction direction = Direction::kBeneficial;
  bool dump_records = false;

  std::vector<std::string> partition_covariates;
  PartitionConfig partition;

  LeagueForm league = LeagueForm::kPairwise;
  std::filesystem::path covariance;
  std::optional<std::string> reference;
  std::int64_t nsim = 100000;

  bool parallel = true;
};

// Throws DataError (invalid_config) on unknown flags or invalid values.
// Returns nullopt after printing help to `out`.
std::optional<RunConfig> ParseArguments(const std::vector<std::string>& args,
                                        std::ostream& out);

// Executes `config`, writing artifacts below `config.out_dir`. Library
// errors propagate.
void Run(const RunConfig& config, std::ostream& log);

// Structured error report for `error`.
nlohmann::ordered_json ErrorReport(const Error& error, int exit_code);

int ExitCodeFor(const Error& error);

// ParseArguments + Run with error reporting; returns the exit status.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

}  // namespace tccrank::cli

#endif  // TCCRANK_CLI_H_
