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

// Model-based recursive partitioning of preference records by study-level
// covariates. Each node fits the Davidson model, tests every covariate for
// parameter instability using the per-record score contributions, and splits
// on the most unstable covariate at the cut that maximizes the summed
// log-likelihood of the two child fits.
//
// Categorical covariates use the score-based chi-squared statistic with
// k (Q - 1) degrees of freedom (k free parameters, Q levels). Continuous
// covariates use the sup-LM statistic over trimmed cut positions with a
// permutation reference distribution. p-values are Bonferroni-adjusted over
// the covariates tested at a node. nu is re-estimated in every node.

#ifndef TCCRANK_PARTITION_H_
#define TCCRANK_PARTITION_H_

#include <climits>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tccrank/davidson.h"
#include "tccrank/study_data.h"
#include "tccrank/tcc.h"

namespace tccrank {

struct PartitionConfig {
  double alpha = 0.05;
  int min_node_size = 10;
  int max_depth = INT_MAX;
  int permutations = 1000;
  std::uint64_t seed = 1;
  // Fraction of records excluded at each end of the sup-LM scan.
  double trim = 0.1;
  bool parallel = true;
  FitOptions fit;
};

struct StabilityResult {
  std::string covariate;
  CovariateKind kind = CovariateKind::kContinuous;
  double statistic = 0.0;
  double p_value = 1.0;
  // Chi-squared degrees of freedom (categorical) or parameters scanned.
  int df = 0;
};

// Throws DataError (constant_covariate, too_few_records, bad_covariate) when
// the covariate cannot be tested on these records. `stream` selects the
// permutation RNG stream.
StabilityResult StabilityTest(const std::vector<PreferenceRecord>& records,
                              const std::string& covariate,
                              const CovariateSpec& spec, const AbilityFit& fit,
                              const PartitionConfig& config,
                              std::uint64_t stream = 0);

struct SplitRule {
  std::string covariate;
  CovariateKind kind = CovariateKind::kContinuous;
  // Continuous: values <= cutpoint go left.
  double cutpoint = 0.0;
  // Categorical: these levels go left.
  std::vector<std::string> left_levels;

  bool GoesLeft(const CovariateValue& value) const;
};

struct SplitCandidate {
  SplitRule rule;
  double partitioned_loglik = 0.0;
  int left_size = 0;
  int right_size = 0;
};

// Throws DataError (constant_covariate) or ModelError (no_admissible_split).
SplitCandidate BestSplit(const std::vector<PreferenceRecord>& records,
                         const std::string& covariate,
                         const CovariateSpec& spec,
                         const PartitionConfig& config);

struct NodeSplit {
  SplitRule rule;
  double statistic = 0.0;
  double p_value = 1.0;          // Bonferroni-adjusted
  double raw_p_value = 1.0;
  double partitioned_loglik = 0.0;
};

struct PartitionNode {
  // Heap numbering: root 1, children 2k and 2k + 1.
  std::uint64_t id = 1;
  int depth = 0;
  // Indices into PartitionTree::records.
  std::vector<size_t> record_indices;
  AbilityFit fit;
  std::vector<StabilityResult> tests;
  std::optional<NodeSplit> split;
  std::unique_ptr<PartitionNode> left;
  std::unique_ptr<PartitionNode> right;
  // Why growth stopped at a leaf, for the report.
  std::string stop_reason;

  bool is_leaf() const { return !split.has_value(); }
};

struct PartitionTree {
  std::vector<PreferenceRecord> records;
  std::vector<std::string> covariates;
  PartitionConfig config;
  std::unique_ptr<PartitionNode> root;

  int Depth() const;
  std::vector<const PartitionNode*> Leaves() const;
};

// Root fit errors propagate. `covariates` lists the names to consider, all
// of which must be present in `schema` and observed on every record.
PartitionTree GrowTree(std::vector<PreferenceRecord> records,
                       const CovariateSchema& schema,
                       const std::vector<std::string>& covariates,
                       const PartitionConfig& config = {});

// Treatments appearing in `records`, in first-appearance order.
std::vector<std::string> TreatmentsOf(
    const std::vector<PreferenceRecord>& records);

}  // namespace tccrank

#endif  // TCCRANK_PARTITION_H_
