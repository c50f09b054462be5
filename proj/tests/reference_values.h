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

// Published values used as consistency checks.

#ifndef TCCRANK_TESTS_REFERENCE_VALUES_H_
#define TCCRANK_TESTS_REFERENCE_VALUES_H_

#include <string_view>
#include <utility>
#include <vector>

namespace tccrank {

// Normalized abilities reported for an 18-antidepressant network, two
// decimals.
inline const std::vector<std::pair<std::string_view, double>>
    kAntidepressantPi = {
        {"vortioxetine", 0.05}, {"escitalopram", 0.18}, {"bupropion", 0.21},
        {"mirtazapine", 0.10},  {"amitriptyline", 0.05}, {"agomelatine", 0.05},
        {"paroxetine", 0.05},   {"venlafaxine", 0.07},  {"duloxetine", 0.02},
        {"milnacipran", 0.03},  {"sertraline", 0.05},   {"nefazodone", 0.03},
        {"citalopram", 0.04},   {"clomipramine", 0.02}, {"fluvoxamine", 0.01},
        {"fluoxetine", 0.02},   {"trazodone", 0.01},    {"reboxetine", 0.01},
};

// Tie prevalence and the two leading abilities from the same analysis.
inline constexpr double kAntidepressantNu = 10.31;
inline constexpr double kBupropionPi = 0.21;
inline constexpr double kEscitalopramPi = 0.18;

}  // namespace tccrank

#endif  // TCCRANK_TESTS_REFERENCE_VALUES_H_
