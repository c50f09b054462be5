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

// Reference implementations of the kernels in kernels.h.

#include <vector>

#include "kernels_internal.h"
#include "tccrank/kernels.h"

namespace tccrank::kernels {

double DavidsonLogLikSerial(std::span<const PairTally> pairs,
                            const DavidsonPoint& point) {
  double total = 0.0;
  for (const PairTally& pair : pairs) {
    total += internal::EvaluatePair(pair, point).value;
  }
  return total;
}

DavidsonDerivatives DavidsonDerivativesSerial(std::span<const PairTally> pairs,
                                              const DavidsonPoint& point) {
  const int t = static_cast<int>(point.log_ability.size());
  DavidsonDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(t + 1);
  out.hessian = Eigen::MatrixXd::Zero(t + 1, t + 1);
  for (const PairTally& pair : pairs) {
    const internal::PairTerms terms = internal::EvaluatePair(pair, point);
    out.value += terms.value;
    internal::AccumulatePair(pair, terms, point.with_ties, t, out.gradient,
                             out.hessian);
  }
  return out;
}

double SupLmScan(const Eigen::MatrixXd& scores,
                 std::span<const std::uint8_t> admissible) {
  std::vector<int> order(scores.rows());
  std::iota(order.begin(), order.end(), 0);
  return internal::ScanOrder(scores, admissible, order);
}

std::vector<double> SupLmPermutationsSerial(
    const Eigen::MatrixXd& scores, std::span<const std::uint8_t> admissible,
    int permutations, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> out(permutations);
  std::vector<int> order(scores.rows());
  for (int p = 0; p < permutations; ++p) {
    out[p] = internal::PermutedScan(scores, admissible, seed, stream, p, order);
  }
  return out;
}

std::vector<std::int64_t> ProbBestTallySerial(const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& factor,
                                              double sign, std::int64_t nsim,
                                              std::uint64_t seed) {
  std::vector<std::int64_t> tally(mean.size(), 0);
  for (std::int64_t begin = 0; begin < nsim; begin += kProbBestBlock) {
    const std::int64_t end = std::min(nsim, begin + kProbBestBlock);
    internal::TallyBlock(mean, factor, sign, begin, end, seed,
                         begin / kProbBestBlock, tally.data());
  }
  return tally;
}

}  // namespace tccrank::kernels
