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

// Data-parallel inner loops. Every kernel has a `...Serial` reference
// implementation and an OpenMP implementation with the same signature.
// Random kernels draw from counter-seeded streams, so serial and parallel
// results are bit-identical for any thread count. Likelihood kernels reduce
// fixed-size chunks in chunk order: deterministic for any thread count, and
// equal to the serial sum up to floating-point reassociation.

#ifndef TCCRANK_KERNELS_H_
#define TCCRANK_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tccrank/tcc.h"

namespace tccrank::kernels {

// Davidson log-likelihood over observed pairs, parametrized by the full
// vector of log-abilities (length T) and log(nu). When `with_ties` is false
// the tie term is dropped and the model reduces to Bradley-Terry.
struct DavidsonPoint {
  std::span<const double> log_ability;
  double log_nu = 0.0;
  bool with_ties = true;
};

struct DavidsonDerivatives {
  double value = 0.0;
  // Length T + 1; the last entry is d/d log(nu) (zero without ties).
  Eigen::VectorXd gradient;
  // (T + 1) x (T + 1).
  Eigen::MatrixXd hessian;
};

double DavidsonLogLikSerial(std::span<const PairTally> pairs,
                            const DavidsonPoint& point);
double DavidsonLogLikParallel(std::span<const PairTally> pairs,
                              const DavidsonPoint& point);

DavidsonDerivatives DavidsonDerivativesSerial(std::span<const PairTally> pairs,
                                              const DavidsonPoint& point);
DavidsonDerivatives DavidsonDerivativesParallel(
    std::span<const PairTally> pairs, const DavidsonPoint& point);

// Sup-LM scan over a cumulative score process. `scores` is n x k and already
// whitened (rows multiplied by the inverse square root of the score
// covariance). `admissible[i]` marks a cut after row i (rows i+1.. go right).
// Returns max_i |sum_{r<=i} z_r|^2 / (n t (1 - t)) with t = (i + 1) / n.
double SupLmScan(const Eigen::MatrixXd& scores,
                 std::span<const std::uint8_t> admissible);

// Reference distribution of SupLmScan under random row permutations.
// Permutation p uses an RNG seeded from MixSeed(seed, stream, p).
std::vector<double> SupLmPermutationsSerial(
    const Eigen::MatrixXd& scores, std::span<const std::uint8_t> admissible,
    int permutations, std::uint64_t seed, std::uint64_t stream);
std::vector<double> SupLmPermutationsParallel(
    const Eigen::MatrixXd& scores, std::span<const std::uint8_t> admissible,
    int permutations, std::uint64_t seed, std::uint64_t stream);

// Monte-Carlo tally of which treatment has the best value. Draws
// mean + factor * N(0, I); draw d belongs to block d / kProbBestBlock whose
// RNG is seeded from MixSeed(seed, 0, block). `sign` is +1 when larger is
// better and -1 otherwise. Exact ties go to the lowest index.
inline constexpr std::int64_t kProbBestBlock = 4096;

std::vector<std::int64_t> ProbBestTallySerial(const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& factor,
                                              double sign, std::int64_t nsim,
                                              std::uint64_t seed);
std::vector<std::int64_t> ProbBestTallyParallel(const Eigen::VectorXd& mean,
                                                const Eigen::MatrixXd& factor,
                                                double sign,
                                                std::int64_t nsim,
                                                std::uint64_t seed);

}  // namespace tccrank::kernels

#endif  // TCCRANK_KERNELS_H_
