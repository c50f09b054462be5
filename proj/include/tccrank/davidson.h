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

// Maximum-likelihood fit of the Davidson tie model for paired comparisons:
//
//   Pr(X > Y) = psi_X / D,  Pr(X = Y) = nu sqrt(psi_X psi_Y) / D,
//   D = psi_X + psi_Y + nu sqrt(psi_X psi_Y).
//
// The likelihood is maximized over theta = log(psi) with the reference
// treatment's theta fixed at 0, plus log(nu). In these coordinates the
// log-likelihood is concave (linear minus a log-sum-exp), so damped Newton
// iterations from the origin reach the unique maximum whenever the win graph
// is strongly connected. Reported abilities are rescaled to sum to one.

#ifndef TCCRANK_DAVIDSON_H_
#define TCCRANK_DAVIDSON_H_

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "tccrank/tcc.h"

namespace tccrank {

// Log-likelihood at abilities `psi` (one per tournament treatment, all > 0)
// and tie prevalence `nu` >= 0. With nu == 0, any tie makes the value -inf.
double LogLikelihood(const Tournament& tournament, std::span<const double> psi,
                     double nu);

struct OutcomeProbabilities {
  double first_wins = 0.0;
  double second_wins = 0.0;
  double tie = 0.0;
};

OutcomeProbabilities PairwiseProbabilities(double psi_first, double psi_second,
                                           double nu);

// Result of the Ford regularity check. On failure `violating_set` is a
// non-empty proper subset S of treatment indices such that no treatment
// outside S ever beats a treatment in S.
struct FordCheck {
  bool passed = false;
  std::vector<int> violating_set;
};

FordCheck CheckFord(const Tournament& tournament);

enum class FitMethod {
  // Damped Newton; falls back to fixed-point sweeps on ill-conditioned
  // Hessians.
  kNewton,
  // Davidson's fixed-point iteration only (Zermelo/MM when there are no
  // ties). Slower; kept as an independent route.
  kFixedPoint,
};

struct FitOptions {
  FitMethod method = FitMethod::kNewton;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  int reference = 0;
  double ci_level = 0.95;
  bool parallel = true;
};

struct AbilityFit {
  std::vector<std::string> treatments;
  int reference = 0;

  // Abilities rescaled to sum to one; equal to `pi`.
  Eigen::VectorXd psi;
  Eigen::VectorXd pi;
  double nu = 0.0;
  // False when the tournament had no ties and the tie-free model was fitted.
  bool ties_modeled = true;

  // Free parameters: log-abilities of non-reference treatments in treatment
  // order, then log(nu) when ties are modeled.
  Eigen::VectorXd log_params;
  // Inverse observed information over `log_params`.
  Eigen::MatrixXd covariance;
  // Standard error of log(pi_X), by first-order propagation from
  // `covariance`. Used for the plotted ability intervals.
  Eigen::VectorXd se_log_ability;

  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  int fallback_iterations = 0;
  double gradient_max_norm = 0.0;
  double ci_level = 0.95;
  std::vector<std::string> warnings;

  int num_treatments() const { return static_cast<int>(treatments.size()); }
  // Throws DataError for unknown labels.
  int IndexOf(std::string_view treatment) const;
  // Log-abilities with the reference at 0 (unnormalized).
  Eigen::VectorXd LogAbilities() const;
  // Position of treatment `x` within `log_params`, or -1 for the reference.
  int ParamIndex(int x) const;
};

// Throws ModelError with code only_ties, ford_condition_violated or
// not_converged; DataError for fewer than two treatments.
AbilityFit FitDavidson(const Tournament& tournament,
                       const FitOptions& options = {});

OutcomeProbabilities PairwiseProbabilities(const AbilityFit& fit,
                                           std::string_view first,
                                           std::string_view second);

struct NormalizedAbility {
  std::string treatment;
  double pi = 0.0;
  double se = 0.0;  // standard error of pi
  // Wald interval on the logit scale.
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

std::vector<NormalizedAbility> NormalizedAbilities(const AbilityFit& fit);

// Fictional treatment whose ability is the mean ability of the network.
struct AverageTreatment {};
using RatioDenominator = std::variant<std::string, AverageTreatment>;

struct AbilityRatio {
  std::string numerator;
  std::string denominator;  // "AVERAGE" for the fictional treatment
  double estimate = 1.0;
  double se_log = 0.0;
  double ci_lower = 1.0;
  double ci_upper = 1.0;
};

std::vector<AbilityRatio> AbilityRatios(const AbilityFit& fit,
                                        const RatioDenominator& denominator);

// The log-likelihood as a function of the free parameters, for a given
// reference. Exposed for derivative checks and the partition scores.
class DavidsonObjective {
 public:
  DavidsonObjective(const Tournament& tournament, int reference,
                    bool with_ties, bool parallel = false);

  int dimension() const { return dimension_; }
  bool with_ties() const { return with_ties_; }

  double Value(const Eigen::VectorXd& x) const;
  // Value, gradient and Hessian of the log-likelihood.
  double Evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* gradient,
                  Eigen::MatrixXd* hessian) const;

  // Full log-ability vector (reference at 0) from free parameters.
  Eigen::VectorXd ExpandLogAbility(const Eigen::VectorXd& x) const;

 private:
  std::vector<PairTally> pairs_;
  int num_treatments_;
  int reference_;
  bool with_ties_;
  bool parallel_;
  int dimension_;
};

// Per-record score contributions (rows) at the fitted parameters, over the
// fit's `log_params`. Row r scores the outcome of treatments first[r] versus
// second[r] (fit indices).
struct IndexedRecord {
  int first = 0;
  int second = 0;
  Verdict verdict = Verdict::kTie;
};

Eigen::MatrixXd RecordScores(const AbilityFit& fit,
                             std::span<const IndexedRecord> records);

}  // namespace tccrank

#endif  // TCCRANK_DAVIDSON_H_
