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

// OpenMP implementations of the kernels in kernels.h.

#include <omp.h>

#include <vector>

#include "kernels_internal.h"
#include "tccrank/kernels.h"

namespace tccrank::kernels {
namespace {

// Below this many pairs the thread start-up cost dominates.
constexpr int kMinParallelPairs = 2 * internal::kPairChunk;

int NumChunks(size_t n, int chunk) {
  return static_cast<int>((n + chunk - 1) / chunk);
}

}  // namespace

double DavidsonLogLikParallel(std::span<const PairTally> pairs,
                              const DavidsonPoint& point) {
  const int chunks = NumChunks(pairs.size(), internal::kPairChunk);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static) if (pairs.size() >= kMinParallelPairs)
  for (int c = 0; c < chunks; ++c) {
    const size_t begin = static_cast<size_t>(c) * internal::kPairChunk;
    const size_t end = std::min(pairs.size(), begin + internal::kPairChunk);
    double sum = 0.0;
    for (size_t p = begin; p < end; ++p) {
      sum += internal::EvaluatePair(pairs[p], point).value;
    }
    partial[c] = sum;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

DavidsonDerivatives DavidsonDerivativesParallel(
    std::span<const PairTally> pairs, const DavidsonPoint& point) {
  const int t = static_cast<int>(point.log_ability.size());
  const int chunks = NumChunks(pairs.size(), internal::kPairChunk);
  std::vector<DavidsonDerivatives> partial(chunks);
#pragma omp parallel for schedule(static) if (pairs.size() >= kMinParallelPairs)
  for (int c = 0; c < chunks; ++c) {
    DavidsonDerivatives& acc = partial[c];
    acc.gradient = Eigen::VectorXd::Zero(t + 1);
    acc.hessian = Eigen::MatrixXd::Zero(t + 1, t + 1);
    const size_t begin = static_cast<size_t>(c) * internal::kPairChunk;
    const size_t end = std::min(pairs.size(), begin + internal::kPairChunk);
    for (size_t p = begin; p < end; ++p) {
      const internal::PairTerms terms = internal::EvaluatePair(pairs[p], point);
      acc.value += terms.value;
      internal::AccumulatePair(pairs[p], terms, point.with_ties, t,
                               acc.gradient, acc.hessian);
    }
  }
  DavidsonDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(t + 1);
  out.hessian = Eigen::MatrixXd::Zero(t + 1, t + 1);
  for (const DavidsonDerivatives& acc : partial) {
    out.value += acc.value;
    out.gradient += acc.gradient;
    out.hessian += acc.hessian;
  }
  return out;
}

std::vector<double> SupLmPermutationsParallel(
    const Eigen::MatrixXd& scores, std::span<const std::uint8_t> admissible,
    int permutations, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> out(permutations);
#pragma omp parallel
  {
    std::vector<int> order(scores.rows());
#pragma omp for schedule(static)
    for (int p = 0; p < permutations; ++p) {
      out[p] =
          internal::PermutedScan(scores, admissible, seed, stream, p, order);
    }
  }
  return out;
}

std::vector<std::int64_t> ProbBestTallyParallel(const Eigen::VectorXd& mean,
                                                const Eigen::MatrixXd& factor,
                                                double sign, std::int64_t nsim,
                                                std::uint64_t seed) {
  const int t = static_cast<int>(mean.size());
  const std::int64_t blocks = (nsim + kProbBestBlock - 1) / kProbBestBlock;
  std::vector<std::int64_t> per_block(blocks * t, 0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t begin = b * kProbBestBlock;
    const std::int64_t end = std::min(nsim, begin + kProbBestBlock);
    internal::TallyBlock(mean, factor, sign, begin, end, seed, b,
                         per_block.data() + b * t);
  }
  std::vector<std::int64_t> tally(t, 0);
  for (std::int64_t b = 0; b < blocks; ++b) {
    for (int x = 0; x < t; ++x) tally[x] += per_block[b * t + x];
  }
  return tally;
}

}  // namespace tccrank::kernels
