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

#include "tccrank/partition.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include <Eigen/Eigenvalues>

#include "tccrank/csv.h"
#include "tccrank/errors.h"
#include "tccrank/kernels.h"
#include "tccrank/stats.h"

namespace tccrank {
namespace {

// Largest number of categorical levels for exhaustive subset search.
constexpr int kMaxSubsetLevels = 16;

const CovariateValue& RequireValue(const PreferenceRecord& record,
                                   const std::string& covariate) {
  auto it = record.covariates.find(covariate);
  if (it == record.covariates.end()) {
    throw DataError(error_code::kBadCovariate,
                    "study '" + record.study_id + "' has no value for '" +
                        covariate + "'");
  }
  return it->second;
}

double NumericValue(const PreferenceRecord& record,
                    const std::string& covariate) {
  const CovariateValue& v = RequireValue(record, covariate);
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw DataError(error_code::kBadCovariate,
                  "covariate '" + covariate + "' is not numeric");
}

std::string LevelValue(const CovariateValue& v) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  return FormatRoundTrip(std::get<double>(v));
}

// Observed levels in first-appearance order and each record's level index.
std::pair<std::vector<std::string>, std::vector<int>> LevelsOf(
    const std::vector<PreferenceRecord>& records,
    const std::string& covariate) {
  std::vector<std::string> levels;
  std::vector<int> codes;
  codes.reserve(records.size());
  for (const PreferenceRecord& r : records) {
    const std::string level = LevelValue(RequireValue(r, covariate));
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) {
      codes.push_back(static_cast<int>(levels.size()));
      levels.push_back(level);
    } else {
      codes.push_back(static_cast<int>(it - levels.begin()));
    }
  }
  return {std::move(levels), std::move(codes)};
}

// Scores multiplied by the inverse square root of their outer-product
// covariance, restricted to its numerically non-null subspace.
Eigen::MatrixXd WhitenedScores(const Eigen::MatrixXd& scores) {
  const double n = static_cast<double>(scores.rows());
  const Eigen::MatrixXd opg = scores.transpose() * scores / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(opg);
  const Eigen::VectorXd values = eigen.eigenvalues();
  const double cutoff = 1e-10 * std::max(values.maxCoeff(), 1e-300);
  std::vector<int> keep;
  for (int i = 0; i < values.size(); ++i) {
    if (values[i] > cutoff) keep.push_back(i);
  }
  Eigen::MatrixXd transform(scores.cols(), keep.size());
  for (size_t c = 0; c < keep.size(); ++c) {
    transform.col(c) =
        eigen.eigenvectors().col(keep[c]) / std::sqrt(values[keep[c]]);
  }
  return scores * transform;
}

std::vector<IndexedRecord> IndexRecords(
    const std::vector<PreferenceRecord>& records, const AbilityFit& fit) {
  std::vector<IndexedRecord> out;
  out.reserve(records.size());
  for (const PreferenceRecord& r : records) {
    out.push_back({fit.IndexOf(r.first), fit.IndexOf(r.second), r.verdict});
  }
  return out;
}

struct SideFit {
  bool ok = false;
  double loglik = 0.0;
};

SideFit FitSide(const std::vector<PreferenceRecord>& records,
                const std::vector<size_t>& members,
                const PartitionConfig& config) {
  std::vector<PreferenceRecord> subset;
  subset.reserve(members.size());
  for (size_t i : members) subset.push_back(records[i]);
  SideFit out;
  try {
    FitOptions options = config.fit;
    options.parallel = false;
    options.reference = 0;
    const Tournament t = AggregateTournament(subset, TreatmentsOf(subset));
    if (t.num_treatments() < 2) return out;
    const AbilityFit fit = FitDavidson(t, options);
    out.ok = true;
    out.loglik = fit.loglik;
  } catch (const ModelError&) {
  } catch (const DataError&) {
  }
  return out;
}

struct ScoredCandidate {
  SplitCandidate candidate;
  bool ok = false;
  // Secondary keys for tie-breaking.
  int imbalance = 0;
  double order_key = 0.0;
};

// Higher criterion wins; within a relative 1e-10 the more balanced split,
// then the smaller order key.
bool Better(const ScoredCandidate& a, const ScoredCandidate& b) {
  const double ca = a.candidate.partitioned_loglik;
  const double cb = b.candidate.partitioned_loglik;
  const double tol = 1e-10 * std::max({1.0, std::abs(ca), std::abs(cb)});
  if (ca > cb + tol) return true;
  if (cb > ca + tol) return false;
  if (a.imbalance != b.imbalance) return a.imbalance < b.imbalance;
  return a.order_key < b.order_key;
}

SplitCandidate PickBest(std::vector<ScoredCandidate>& scored,
                        const std::string& covariate) {
  const ScoredCandidate* best = nullptr;
  for (const ScoredCandidate& c : scored) {
    if (!c.ok) continue;
    if (best == nullptr || Better(c, *best)) best = &c;
  }
  if (best == nullptr) {
    throw ModelError(error_code::kNoAdmissibleSplit,
                     "no split on '" + covariate +
                         "' leaves both sides large enough and fittable");
  }
  return best->candidate;
}

void EvaluateCandidates(const std::vector<PreferenceRecord>& records,
                        const std::vector<std::vector<size_t>>& lefts,
                        const PartitionConfig& config,
                        std::vector<ScoredCandidate>& scored) {
  const int n = static_cast<int>(records.size());
  const int count = static_cast<int>(scored.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (int c = 0; c < count; ++c) {
    const std::vector<size_t>& left = lefts[c];
    const int left_size = static_cast<int>(left.size());
    const int right_size = n - left_size;
    ScoredCandidate& s = scored[c];
    s.candidate.left_size = left_size;
    s.candidate.right_size = right_size;
    s.imbalance = std::abs(left_size - right_size);
    if (left_size < config.min_node_size || right_size < config.min_node_size) {
      continue;
    }
    std::vector<char> in_left(n, 0);
    for (size_t i : left) in_left[i] = 1;
    std::vector<size_t> right;
    right.reserve(right_size);
    for (int i = 0; i < n; ++i) {
      if (!in_left[i]) right.push_back(i);
    }
    const SideFit l = FitSide(records, left, config);
    if (!l.ok) continue;
    const SideFit r = FitSide(records, right, config);
    if (!r.ok) continue;
    s.candidate.partitioned_loglik = l.loglik + r.loglik;
    s.ok = true;
  }
}

}  // namespace

std::vector<std::string> TreatmentsOf(
    const std::vector<PreferenceRecord>& records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const PreferenceRecord& r : records) {
    for (const std::string* label : {&r.first, &r.second}) {
      if (seen.insert(*label).second) out.push_back(*label);
    }
  }
  return out;
}

bool SplitRule::GoesLeft(const CovariateValue& value) const {
  if (kind == CovariateKind::kContinuous) {
    const double* d = std::get_if<double>(&value);
    if (d == nullptr) {
      throw DataError(error_code::kBadCovariate,
                      "covariate '" + covariate + "' is not numeric");
    }
    return *d <= cutpoint;
  }
  const std::string level = LevelValue(value);
  return std::find(left_levels.begin(), left_levels.end(), level) !=
         left_levels.end();
}

StabilityResult StabilityTest(const std::vector<PreferenceRecord>& records,
                              const std::string& covariate,
                              const CovariateSpec& spec, const AbilityFit& fit,
                              const PartitionConfig& config,
                              std::uint64_t stream) {
  const int n = static_cast<int>(records.size());
  if (n < std::max(2, config.min_node_size)) {
    throw DataError(error_code::kTooFewRecords,
                    "stability test on '" + covariate + "' needs at least " +
                        std::to_string(std::max(2, config.min_node_size)) +
                        " records");
  }
  StabilityResult result;
  result.covariate = covariate;
  result.kind = spec.kind;

  const std::vector<IndexedRecord> indexed = IndexRecords(records, fit);
  const Eigen::MatrixXd scores = WhitenedScores(RecordScores(fit, indexed));
  const int k = static_cast<int>(scores.cols());

  if (spec.kind == CovariateKind::kCategorical) {
    const auto [levels, codes] = LevelsOf(records, covariate);
    const int q = static_cast<int>(levels.size());
    if (q < 2) {
      throw DataError(error_code::kConstantCovariate,
                      "covariate '" + covariate + "' takes a single level");
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(q, k);
    std::vector<int> sizes(q, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(codes[i]) += scores.row(i);
      ++sizes[codes[i]];
    }
    double statistic = 0.0;
    for (int l = 0; l < q; ++l) {
      statistic += sums.row(l).squaredNorm() / sizes[l];
    }
    result.statistic = statistic;
    result.df = k * (q - 1);
    result.p_value = ChiSquaredSurvival(statistic, result.df);
    return result;
  }

  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = NumericValue(records[i], covariate);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  if (values[order.front()] == values[order.back()]) {
    throw DataError(error_code::kConstantCovariate,
                    "covariate '" + covariate + "' is constant");
  }
  Eigen::MatrixXd sorted(n, k);
  for (int i = 0; i < n; ++i) sorted.row(i) = scores.row(order[i]);
  std::vector<std::uint8_t> admissible(n, 0);
  const double lo = config.trim * n;
  const double hi = (1.0 - config.trim) * n;
  bool any = false;
  for (int r = 0; r + 1 < n; ++r) {
    const double left = r + 1;
    if (values[order[r]] < values[order[r + 1]] && left >= lo && left <= hi) {
      admissible[r] = 1;
      any = true;
    }
  }
  if (!any) {
    // Trimming removed every cut; fall back to all value changes.
    for (int r = 0; r + 1 < n; ++r) {
      admissible[r] = values[order[r]] < values[order[r + 1]];
    }
  }
  result.df = k;
  result.statistic = kernels::SupLmScan(sorted, admissible);
  const std::vector<double> null =
      config.parallel
          ? kernels::SupLmPermutationsParallel(sorted, admissible,
                                               config.permutations,
                                               config.seed, stream)
          : kernels::SupLmPermutationsSerial(sorted, admissible,
                                             config.permutations, config.seed,
                                             stream);
  const double threshold = result.statistic * (1.0 - 1e-12);
  const auto exceed = std::count_if(null.begin(), null.end(),
                                    [&](double s) { return s >= threshold; });
  result.p_value = (1.0 + static_cast<double>(exceed)) /
                   (1.0 + static_cast<double>(null.size()));
  return result;
}

SplitCandidate BestSplit(const std::vector<PreferenceRecord>& records,
                         const std::string& covariate,
                         const CovariateSpec& spec,
                         const PartitionConfig& config) {
  const int n = static_cast<int>(records.size());
  std::vector<ScoredCandidate> scored;
  std::vector<std::vector<size_t>> lefts;

  if (spec.kind == CovariateKind::kContinuous) {
    std::vector<double> values(n);
    for (int i = 0; i < n; ++i) values[i] = NumericValue(records[i], covariate);
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() < 2) {
      throw DataError(error_code::kConstantCovariate,
                      "covariate '" + covariate + "' is constant");
    }
    for (size_t d = 0; d + 1 < distinct.size(); ++d) {
      const double cut = 0.5 * (distinct[d] + distinct[d + 1]);
      ScoredCandidate s;
      s.candidate.rule.covariate = covariate;
      s.candidate.rule.kind = CovariateKind::kContinuous;
      s.candidate.rule.cutpoint = cut;
      s.order_key = cut;
      std::vector<size_t> left;
      for (int i = 0; i < n; ++i) {
        if (values[i] <= cut) left.push_back(i);
      }
      scored.push_back(std::move(s));
      lefts.push_back(std::move(left));
    }
  } else {
    const auto [levels, codes] = LevelsOf(records, covariate);
    const int q = static_cast<int>(levels.size());
    if (q < 2) {
      throw DataError(error_code::kConstantCovariate,
                      "covariate '" + covariate + "' takes a single level");
    }
    if (q > kMaxSubsetLevels) {
      throw DataError(error_code::kBadCovariate,
                      "covariate '" + covariate + "' has more than " +
                          std::to_string(kMaxSubsetLevels) + " levels");
    }
    // Subsets containing the first level, excluding the full set.
    const std::uint32_t full = (1u << q) - 1;
    for (std::uint32_t mask = 1; mask < full; mask += 2) {
      ScoredCandidate s;
      s.candidate.rule.covariate = covariate;
      s.candidate.rule.kind = CovariateKind::kCategorical;
      for (int l = 0; l < q; ++l) {
        if (mask & (1u << l)) s.candidate.rule.left_levels.push_back(levels[l]);
      }
      s.order_key = static_cast<double>(mask);
      std::vector<size_t> left;
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << codes[i])) left.push_back(i);
      }
      scored.push_back(std::move(s));
      lefts.push_back(std::move(left));
    }
  }
  EvaluateCandidates(records, lefts, config, scored);
  return PickBest(scored, covariate);
}

int PartitionTree::Depth() const {
  int depth = 0;
  for (const PartitionNode* leaf : Leaves()) depth = std::max(depth, leaf->depth);
  return depth;
}

std::vector<const PartitionNode*> PartitionTree::Leaves() const {
  std::vector<const PartitionNode*> out;
  std::vector<const PartitionNode*> stack;
  if (root) stack.push_back(root.get());
  while (!stack.empty()) {
    const PartitionNode* node = stack.back();
    stack.pop_back();
    if (node->is_leaf()) {
      out.push_back(node);
    } else {
      stack.push_back(node->right.get());
      stack.push_back(node->left.get());
    }
  }
  return out;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const PartitionTree& tree, const CovariateSchema& schema)
      : tree_(tree), schema_(schema), order_(TreatmentsOf(tree.records)) {}

  std::unique_ptr<PartitionNode> Grow(std::vector<size_t> indices,
                                      std::uint64_t id, int depth) {
    auto node = std::make_unique<PartitionNode>();
    node->id = id;
    node->depth = depth;
    node->record_indices = std::move(indices);
    const std::vector<PreferenceRecord> records = Subset(node->record_indices);
    node->fit = Fit(records);

    const PartitionConfig& config = tree_.config;
    if (depth >= config.max_depth) {
      node->stop_reason = "maximum depth reached";
      return node;
    }
    if (static_cast<int>(records.size()) < 2 * config.min_node_size) {
      node->stop_reason = "too few records to form two children";
      return node;
    }

    for (size_t c = 0; c < tree_.covariates.size(); ++c) {
      const std::string& name = tree_.covariates[c];
      try {
        node->tests.push_back(StabilityTest(records, name, schema_.at(name),
                                            node->fit, config,
                                            MixSeed(id, c, 0)));
      } catch (const DataError& e) {
        if (e.code() == error_code::kBadCovariate) throw;
        // Constant within this node, or too small: not testable here.
      }
    }
    if (node->tests.empty()) {
      node->stop_reason = "no testable covariate";
      return node;
    }
    const double tested = static_cast<double>(node->tests.size());
    const StabilityResult* best = nullptr;
    for (const StabilityResult& r : node->tests) {
      if (best == nullptr || r.p_value < best->p_value) best = &r;
    }
    const double adjusted = std::min(1.0, best->p_value * tested);
    if (!(adjusted < config.alpha)) {
      node->stop_reason = "no significant instability";
      return node;
    }
    SplitCandidate candidate;
    try {
      candidate = BestSplit(records, best->covariate,
                            schema_.at(best->covariate), config);
    } catch (const ModelError&) {
      node->stop_reason = "no admissible split on " + best->covariate;
      return node;
    }
    NodeSplit split;
    split.rule = candidate.rule;
    split.statistic = best->statistic;
    split.raw_p_value = best->p_value;
    split.p_value = adjusted;
    split.partitioned_loglik = candidate.partitioned_loglik;

    std::vector<size_t> left;
    std::vector<size_t> right;
    for (size_t i : node->record_indices) {
      const PreferenceRecord& r = tree_.records[i];
      (split.rule.GoesLeft(r.covariates.at(split.rule.covariate)) ? left : right)
          .push_back(i);
    }
    node->split = std::move(split);
    node->left = Grow(std::move(left), 2 * id, depth + 1);
    node->right = Grow(std::move(right), 2 * id + 1, depth + 1);
    return node;
  }

 private:
  std::vector<PreferenceRecord> Subset(const std::vector<size_t>& idx) const {
    std::vector<PreferenceRecord> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(tree_.records[i]);
    return out;
  }

  AbilityFit Fit(const std::vector<PreferenceRecord>& records) const {
    // Keep the root's treatment order so node tables line up.
    std::set<std::string> present;
    for (const PreferenceRecord& r : records) {
      present.insert(r.first);
      present.insert(r.second);
    }
    std::vector<std::string> treatments;
    for (const std::string& t : order_) {
      if (present.count(t)) treatments.push_back(t);
    }
    FitOptions options = tree_.config.fit;
    options.reference = 0;
    return FitDavidson(AggregateTournament(records, treatments), options);
  }

  const PartitionTree& tree_;
  const CovariateSchema& schema_;
  std::vector<std::string> order_;
};

}  // namespace

PartitionTree GrowTree(std::vector<PreferenceRecord> records,
                       const CovariateSchema& schema,
                       const std::vector<std::string>& covariates,
                       const PartitionConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw DataError(error_code::kInvalidConfig, "alpha must lie in [0, 1]");
  }
  if (config.min_node_size < 1 || config.permutations < 1 ||
      config.max_depth < 0) {
    throw DataError(error_code::kInvalidConfig,
                    "min_node_size and permutations must be positive");
  }
  for (const std::string& name : covariates) {
    if (!schema.count(name)) {
      throw DataError(error_code::kBadCovariate,
                      "unknown partition covariate '" + name + "'");
    }
    for (const PreferenceRecord& r : records) RequireValue(r, name);
  }
  PartitionTree tree;
  tree.records = std::move(records);
  tree.covariates = covariates;
  tree.config = config;
  std::vector<size_t> all(tree.records.size());
  std::iota(all.begin(), all.end(), 0);
  TreeGrower grower(tree, schema);
  tree.root = grower.Grow(std::move(all), 1, 0);
  return tree;
}

}  // namespace tccrank
