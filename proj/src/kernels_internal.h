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

#ifndef TCCRANK_SRC_KERNELS_INTERNAL_H_
#define TCCRANK_SRC_KERNELS_INTERNAL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tccrank/kernels.h"
#include "tccrank/stats.h"

namespace tccrank::kernels::internal {

inline constexpr int kPairChunk = 256;

struct PairTerms {
  double value;
  double p_first;  // Pr(first wins)
  double p_second;
  double p_tie;
};

inline PairTerms EvaluatePair(const PairTally& pair,
                              const DavidsonPoint& point) {
  const double ti = point.log_ability[pair.first];
  const double tj = point.log_ability[pair.second];
  const double m = pair.first_wins + pair.second_wins + pair.ties;
  PairTerms out{};
  if (point.with_ties) {
    const double h = point.log_nu + 0.5 * (ti + tj);
    const double top = std::max({ti, tj, h});
    const double log_denominator =
        top + std::log(std::exp(ti - top) + std::exp(tj - top) +
                       std::exp(h - top));
    out.p_first = std::exp(ti - log_denominator);
    out.p_second = std::exp(tj - log_denominator);
    out.p_tie = std::exp(h - log_denominator);
    out.value = pair.first_wins * ti + pair.second_wins * tj + pair.ties * h -
                m * log_denominator;
  } else {
    const double top = std::max(ti, tj);
    const double log_denominator =
        top + std::log(std::exp(ti - top) + std::exp(tj - top));
    out.p_first = std::exp(ti - log_denominator);
    out.p_second = std::exp(tj - log_denominator);
    out.p_tie = 0.0;
    out.value = pair.first_wins * ti + pair.second_wins * tj -
                m * log_denominator;
  }
  return out;
}

// Adds one pair's gradient and Hessian contribution to the accumulators.
// The tie parameter sits at index `tie_index`.
inline void AccumulatePair(const PairTally& pair, const PairTerms& terms,
                           bool with_ties, int tie_index,
                           Eigen::VectorXd& gradient, Eigen::MatrixXd& hessian) {
  const int i = pair.first;
  const int j = pair.second;
  const double m = pair.first_wins + pair.second_wins + pair.ties;
  const double pt = terms.p_tie;
  const double ai = terms.p_first + 0.5 * pt;
  const double aj = terms.p_second + 0.5 * pt;
  gradient[i] += pair.first_wins + 0.5 * pair.ties - m * ai;
  gradient[j] += pair.second_wins + 0.5 * pair.ties - m * aj;
  hessian(i, i) -= m * (terms.p_first + 0.25 * pt - ai * ai);
  hessian(j, j) -= m * (terms.p_second + 0.25 * pt - aj * aj);
  const double hij = -m * (0.25 * pt - ai * aj);
  hessian(i, j) += hij;
  hessian(j, i) += hij;
  if (with_ties) {
    const int l = tie_index;
    gradient[l] += pair.ties - m * pt;
    hessian(l, l) -= m * (pt - pt * pt);
    const double hil = -m * (0.5 * pt - ai * pt);
    const double hjl = -m * (0.5 * pt - aj * pt);
    hessian(i, l) += hil;
    hessian(l, i) += hil;
    hessian(j, l) += hjl;
    hessian(l, j) += hjl;
  }
}

inline double ScanOrder(const Eigen::MatrixXd& scores,
                        std::span<const std::uint8_t> admissible,
                        std::span<const int> order) {
  const int n = static_cast<int>(scores.rows());
  const int k = static_cast<int>(scores.cols());
  Eigen::VectorXd running = Eigen::VectorXd::Zero(k);
  double best = 0.0;
  for (int r = 0; r + 1 < n; ++r) {
    running += scores.row(order[r]).transpose();
    if (!admissible[r]) continue;
    const double t = static_cast<double>(r + 1) / n;
    best = std::max(best, running.squaredNorm() / (n * t * (1.0 - t)));
  }
  return best;
}

inline double PermutedScan(const Eigen::MatrixXd& scores,
                           std::span<const std::uint8_t> admissible,
                           std::uint64_t seed, std::uint64_t stream, int p,
                           std::vector<int>& order) {
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(MixSeed(seed, stream, static_cast<std::uint64_t>(p)));
  std::shuffle(order.begin(), order.end(), rng);
  return ScanOrder(scores, admissible, order);
}

inline void TallyBlock(const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& factor, double sign,
                       std::int64_t begin, std::int64_t end,
                       std::uint64_t seed, std::int64_t block,
                       std::int64_t* tally) {
  const int t = static_cast<int>(mean.size());
  std::mt19937_64 rng(MixSeed(seed, 0, static_cast<std::uint64_t>(block)));
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(factor.cols());
  Eigen::VectorXd value(t);
  for (std::int64_t d = begin; d < end; ++d) {
    for (int c = 0; c < z.size(); ++c) z[c] = normal(rng);
    value.noalias() = mean + factor * z;
    int best = 0;
    for (int x = 1; x < t; ++x) {
      if (sign * value[x] > sign * value[best]) best = x;
    }
    ++tally[best];
  }
}

}  // namespace tccrank::kernels::internal

#endif  // TCCRANK_SRC_KERNELS_INTERNAL_H_
