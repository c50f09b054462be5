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

#ifndef TCCRANK_ERRORS_H_
#define TCCRANK_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace tccrank {

// Base class for all errors raised by the library. `code()` is a stable,
// machine-readable identifier that ends up in the CLI error report.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Bad input: malformed tables, invariant violations, invalid configuration.
class DataError : public Error {
 public:
  using Error::Error;
};

// The model cannot be fitted to otherwise valid data (Ford condition,
// ties only, non-convergence).
class ModelError : public Error {
 public:
  using Error::Error;
};

namespace error_code {
inline constexpr char kMissingColumn[] = "missing_column";
inline constexpr char kBadNumber[] = "bad_number";
inline constexpr char kNegativeSe[] = "negative_se";
inline constexpr char kBadCovariate[] = "bad_covariate";
inline constexpr char kDuplicatePair[] = "duplicate_pair";
inline constexpr char kInvalidRow[] = "invalid_row";
inline constexpr char kUnknownTreatment[] = "unknown_treatment";
inline constexpr char kMissingInterval[] = "missing_interval";
inline constexpr char kInvalidConfig[] = "invalid_config";
inline constexpr char kIo[] = "io_error";
inline constexpr char kFordViolation[] = "ford_condition_violated";
inline constexpr char kOnlyTies[] = "only_ties";
inline constexpr char kNotConverged[] = "not_converged";
inline constexpr char kNoAdmissibleSplit[] = "no_admissible_split";
inline constexpr char kConstantCovariate[] = "constant_covariate";
inline constexpr char kTooFewRecords[] = "too_few_records";
inline constexpr char kIncompleteTable[] = "incomplete_league_table";
inline constexpr char kNotPsd[] = "covariance_not_psd";
}  // namespace error_code

}  // namespace tccrank

#endif  // TCCRANK_ERRORS_H_
