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

#ifndef TCCRANK_STATS_H_
#define TCCRANK_STATS_H_

#include <cstdint>

namespace tccrank {

double NormalCdf(double z);
double NormalQuantile(double p);

// Two-sided Wald multiplier for a confidence level in (0, 1).
double WaldMultiplier(double ci_level);

// Upper tail of a chi-squared distribution with `df` degrees of freedom.
double ChiSquaredSurvival(double statistic, double df);

// Counter-based seed derivation: every (seed, stream, counter) triple maps to
// an independent 64-bit seed, so parallel draws do not depend on scheduling.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter);

}  // namespace tccrank

#endif  // TCCRANK_STATS_H_
