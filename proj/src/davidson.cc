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

#include "tccrank/davidson.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tccrank/errors.h"
#include "tccrank/kernels.h"
#include "tccrank/stats.h"

namespace tccrank {
namespace {

constexpr char kAverageLabel[] = "AVERAGE";

// Reachability over the directed win graph (edge a -> b when a beat b).
std::vector<std::vector<char>> Reachability(const Tournament& t) {
  const int n = t.num_treatments();
  std::vector<std::vector<int>> beats(n);
  for (const auto& [key, c] : t.counts()) {
    if (c.first_wins > 0) beats[key.first].push_back(key.second);
    if (c.second_wins > 0) beats[key.second].push_back(key.first);
  }
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) {
    std::queue<int> frontier;
    frontier.push(s);
    reach[s][s] = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : beats[v]) {
        if (!reach[s][w]) {
          reach[s][w] = 1;
          frontier.push(w);
        }
      }
    }
  }
  return reach;
}

// One sweep of Davidson's fixed-point update, in log coordinates.
void FixedPointSweep(std::span<const PairTally> pairs, int num_treatments,
                     int reference, bool with_ties, Eigen::VectorXd& theta,
                     double& log_nu) {
  Eigen::VectorXd psi = theta.array().exp();
  const double nu = with_ties ? std::exp(log_nu) : 0.0;
  Eigen::VectorXd score = Eigen::VectorXd::Zero(num_treatments);
  Eigen::VectorXd denom = Eigen::VectorXd::Zero(num_treatments);
  double tie_total = 0.0;
  double tie_denom = 0.0;
  for (const PairTally& p : pairs) {
    const int i = p.first;
    const int j = p.second;
    const double m = p.first_wins + p.second_wins + p.ties;
    const double root = std::sqrt(psi[i] * psi[j]);
    const double d = psi[i] + psi[j] + nu * root;
    score[i] += p.first_wins + 0.5 * p.ties;
    score[j] += p.second_wins + 0.5 * p.ties;
    denom[i] += m * (1.0 + 0.5 * nu * std::sqrt(psi[j] / psi[i])) / d;
    denom[j] += m * (1.0 + 0.5 * nu * std::sqrt(psi[i] / psi[j])) / d;
    tie_total += p.ties;
    tie_denom += m * root / d;
  }
  for (int x = 0; x < num_treatments; ++x) {
    if (denom[x] > 0.0 && score[x] > 0.0) {
      theta[x] = std::log(score[x] / denom[x]);
    }
  }
  theta.array() -= theta[reference];
  if (with_ties && tie_total > 0.0 && tie_denom > 0.0) {
    log_nu = std::log(tie_total / tie_denom);
  }
}

Eigen::VectorXd PackParams(const Eigen::VectorXd& theta, double log_nu,
                           int reference, bool with_ties) {
  const int t = static_cast<int>(theta.size());
  Eigen::VectorXd x(t - 1 + (with_ties ? 1 : 0));
  int k = 0;
  for (int i = 0; i < t; ++i) {
    if (i != reference) x[k++] = theta[i];
  }
  if (with_ties) x[k] = log_nu;
  return x;
}

// Gradient of log(pi_x) over the free params.
Eigen::VectorXd LogPiGradient(const AbilityFit& fit, int x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(fit.log_params.size());
  for (int k = 0; k < fit.num_treatments(); ++k) {
    const int idx = fit.ParamIndex(k);
    if (idx < 0) continue;
    g[idx] = (k == x ? 1.0 : 0.0) - fit.pi[k];
  }
  return g;
}

double QuadraticForm(const Eigen::MatrixXd& cov, const Eigen::VectorXd& g) {
  return std::max(0.0, g.dot(cov * g));
}

}  // namespace

double LogLikelihood(const Tournament& tournament, std::span<const double> psi,
                     double nu) {
  if (static_cast<int>(psi.size()) != tournament.num_treatments()) {
    throw DataError(error_code::kInvalidConfig,
                    "ability vector length does not match the tournament");
  }
  if (!(nu >= 0.0)) {
    throw DataError(error_code::kInvalidConfig, "nu must be non-negative");
  }
  std::vector<double> theta(psi.size());
  for (size_t i = 0; i < psi.size(); ++i) {
    if (!(psi[i] > 0.0)) {
      throw DataError(error_code::kInvalidConfig, "abilities must be positive");
    }
    theta[i] = std::log(psi[i]);
  }
  const bool with_ties = nu > 0.0;
  if (!with_ties && tournament.TotalTies() > 0) {
    return -std::numeric_limits<double>::infinity();
  }
  const std::vector<PairTally> pairs = tournament.Pairs();
  kernels::DavidsonPoint point{theta, with_ties ? std::log(nu) : 0.0,
                               with_ties};
  return kernels::DavidsonLogLikSerial(pairs, point);
}

OutcomeProbabilities PairwiseProbabilities(double psi_first, double psi_second,
                                           double nu) {
  if (!(psi_first > 0.0 && psi_second > 0.0 && std::isfinite(psi_first) &&
        std::isfinite(psi_second))) {
    throw DataError(error_code::kInvalidConfig, "abilities must be positive");
  }
  if (!(nu >= 0.0 && std::isfinite(nu))) {
    throw DataError(error_code::kInvalidConfig, "nu must be non-negative");
  }
  // Degree-0 homogeneous: rescale so the larger ability is 1.
  const double scale = std::max(psi_first, psi_second);
  const double a = psi_first / scale;
  const double b = psi_second / scale;
  const double tie = nu * std::sqrt(a * b);
  const double d = a + b + tie;
  return {a / d, b / d, tie / d};
}

FordCheck CheckFord(const Tournament& tournament) {
  const int n = tournament.num_treatments();
  FordCheck out;
  if (n < 2) {
    out.passed = true;
    return out;
  }
  const auto reach = Reachability(tournament);
  // Strongly connected components via mutual reachability.
  std::vector<int> component(n, -1);
  int num_components = 0;
  for (int v = 0; v < n; ++v) {
    if (component[v] >= 0) continue;
    for (int w = v; w < n; ++w) {
      if (reach[v][w] && reach[w][v]) component[w] = num_components;
    }
    ++num_components;
  }
  if (num_components == 1) {
    out.passed = true;
    return out;
  }
  // A component nobody outside it ever beats. Components are numbered by
  // their smallest member, so the first source found is deterministic.
  std::vector<char> has_incoming(num_components, 0);
  for (const auto& [key, c] : tournament.counts()) {
    const int a = component[key.first];
    const int b = component[key.second];
    if (a == b) continue;
    if (c.first_wins > 0) has_incoming[b] = 1;
    if (c.second_wins > 0) has_incoming[a] = 1;
  }
  for (int comp = 0; comp < num_components; ++comp) {
    if (has_incoming[comp]) continue;
    for (int v = 0; v < n; ++v) {
      if (component[v] == comp) out.violating_set.push_back(v);
    }
    break;
  }
  return out;
}

DavidsonObjective::DavidsonObjective(const Tournament& tournament,
                                     int reference, bool with_ties,
                                     bool parallel)
    : pairs_(tournament.Pairs()),
      num_treatments_(tournament.num_treatments()),
      reference_(reference),
      with_ties_(with_ties),
      parallel_(parallel),
      dimension_(num_treatments_ - 1 + (with_ties ? 1 : 0)) {}

Eigen::VectorXd DavidsonObjective::ExpandLogAbility(
    const Eigen::VectorXd& x) const {
  Eigen::VectorXd theta(num_treatments_);
  int k = 0;
  for (int i = 0; i < num_treatments_; ++i) {
    theta[i] = (i == reference_) ? 0.0 : x[k++];
  }
  return theta;
}

double DavidsonObjective::Value(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd theta = ExpandLogAbility(x);
  kernels::DavidsonPoint point{
      std::span<const double>(theta.data(), theta.size()),
      with_ties_ ? x[dimension_ - 1] : 0.0, with_ties_};
  return parallel_ ? kernels::DavidsonLogLikParallel(pairs_, point)
                   : kernels::DavidsonLogLikSerial(pairs_, point);
}

double DavidsonObjective::Evaluate(const Eigen::VectorXd& x,
                                   Eigen::VectorXd* gradient,
                                   Eigen::MatrixXd* hessian) const {
  const Eigen::VectorXd theta = ExpandLogAbility(x);
  kernels::DavidsonPoint point{
      std::span<const double>(theta.data(), theta.size()),
      with_ties_ ? x[dimension_ - 1] : 0.0, with_ties_};
  const kernels::DavidsonDerivatives full =
      parallel_ ? kernels::DavidsonDerivativesParallel(pairs_, point)
                : kernels::DavidsonDerivativesSerial(pairs_, point);
  // Map full coordinates (T abilities + tie) onto the free ones.
  std::vector<int> keep;
  for (int i = 0; i < num_treatments_; ++i) {
    if (i != reference_) keep.push_back(i);
  }
  if (with_ties_) keep.push_back(num_treatments_);
  if (gradient) {
    gradient->resize(dimension_);
    for (int a = 0; a < dimension_; ++a) (*gradient)[a] = full.gradient[keep[a]];
  }
  if (hessian) {
    hessian->resize(dimension_, dimension_);
    for (int a = 0; a < dimension_; ++a) {
      for (int b = 0; b < dimension_; ++b) {
        (*hessian)(a, b) = full.hessian(keep[a], keep[b]);
      }
    }
  }
  return full.value;
}

int AbilityFit::IndexOf(std::string_view treatment) const {
  for (int i = 0; i < num_treatments(); ++i) {
    if (treatments[i] == treatment) return i;
  }
  throw DataError(error_code::kUnknownTreatment,
                  "unknown treatment '" + std::string(treatment) + "'");
}

Eigen::VectorXd AbilityFit::LogAbilities() const {
  Eigen::VectorXd theta(num_treatments());
  for (int i = 0; i < num_treatments(); ++i) {
    const int idx = ParamIndex(i);
    theta[i] = idx < 0 ? 0.0 : log_params[idx];
  }
  return theta;
}

int AbilityFit::ParamIndex(int x) const {
  if (x == reference) return -1;
  return x < reference ? x : x - 1;
}

AbilityFit FitDavidson(const Tournament& tournament, const FitOptions& options) {
  const int t = tournament.num_treatments();
  if (t < 2) {
    throw DataError(error_code::kInvalidConfig,
                    "a ranking needs at least two treatments");
  }
  if (options.reference < 0 || options.reference >= t) {
    throw DataError(error_code::kInvalidConfig, "reference index out of range");
  }
  if (tournament.TotalRecords() == 0) {
    throw ModelError(error_code::kFordViolation,
                     "the tournament has no preference records");
  }
  if (tournament.TotalWins() == 0) {
    throw ModelError(error_code::kOnlyTies,
                     "every preference record is a tie; Ford's condition "
                     "fails and no hierarchy can be estimated");
  }
  const FordCheck ford = CheckFord(tournament);
  if (!ford.passed) {
    std::string members;
    for (int v : ford.violating_set) {
      if (!members.empty()) members += ", ";
      members += tournament.treatments()[v];
    }
    throw ModelError(error_code::kFordViolation,
                     "Ford's condition fails: no treatment outside {" +
                         members + "} is ever preferred to one inside it");
  }

  const bool with_ties = tournament.TotalTies() > 0;
  const int reference = options.reference;
  const std::vector<PairTally> pairs = tournament.Pairs();
  const DavidsonObjective objective(tournament, reference, with_ties,
                                    options.parallel);

  AbilityFit fit;
  fit.treatments = tournament.treatments();
  fit.reference = reference;
  fit.ties_modeled = with_ties;
  fit.ci_level = options.ci_level;
  if (!with_ties) {
    fit.warnings.push_back(
        "no ties observed: fitted the tie-free Bradley-Terry model, nu = 0");
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(t);
  double log_nu =
      with_ties ? std::log(2.0 * tournament.TotalTies() / tournament.TotalWins())
                : 0.0;
  Eigen::VectorXd x = PackParams(theta, log_nu, reference, with_ties);
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  double value = objective.Evaluate(x, &gradient, &hessian);

  auto fixed_point_step = [&]() {
    theta = objective.ExpandLogAbility(x);
    if (with_ties) log_nu = x[x.size() - 1];
    FixedPointSweep(pairs, t, reference, with_ties, theta, log_nu);
    Eigen::VectorXd next = PackParams(theta, log_nu, reference, with_ties);
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    ++fit.fallback_iterations;
    return change;
  };

  bool converged = false;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    if (gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      converged = true;
      break;
    }
    double change = 0.0;
    bool newton_ok = false;
    if (options.method == FitMethod::kNewton) {
      const Eigen::MatrixXd information = -hessian;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
      const Eigen::VectorXd diag = ldlt.vectorD();
      const bool well_conditioned =
          ldlt.info() == Eigen::Success && diag.minCoeff() > 0.0 &&
          diag.minCoeff() > 1e-13 * diag.maxCoeff();
      if (well_conditioned) {
        const Eigen::VectorXd direction = ldlt.solve(gradient);
        const double slope = gradient.dot(direction);
        double step = 1.0;
        while (step > 1e-12) {
          const Eigen::VectorXd trial = x + step * direction;
          const double trial_value = objective.Value(trial);
          if (std::isfinite(trial_value) &&
              trial_value >= value + 1e-4 * step * slope) {
            break;
          }
          step *= 0.5;
        }
        if (step > 1e-12) {
          const Eigen::VectorXd delta = step * direction;
          x += delta;
          change = delta.lpNorm<Eigen::Infinity>();
          newton_ok = true;
        }
      }
    }
    if (!newton_ok) change = fixed_point_step();
    value = objective.Evaluate(x, &gradient, &hessian);
    if (change < options.step_tolerance) {
      converged = true;
      ++iteration;
      break;
    }
  }
  if (!converged) {
    throw ModelError(error_code::kNotConverged,
                     "no convergence after " +
                         std::to_string(options.max_iterations) +
                         " iterations");
  }

  fit.converged = true;
  fit.iterations = iteration;
  fit.loglik = value;
  fit.gradient_max_norm = gradient.lpNorm<Eigen::Infinity>();
  fit.log_params = x;

  const Eigen::MatrixXd information = -hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(
      0.5 * (information + information.transpose()));
  const Eigen::VectorXd values = eigen.eigenvalues();
  if (!(values.minCoeff() > 1e-12 * std::max(1.0, values.maxCoeff()))) {
    throw ModelError(error_code::kNotConverged,
                     "observed information is singular at the maximum");
  }
  const Eigen::MatrixXd inverse = eigen.eigenvectors() *
                                  values.cwiseInverse().asDiagonal() *
                                  eigen.eigenvectors().transpose();
  fit.covariance = 0.5 * (inverse + inverse.transpose());

  const Eigen::VectorXd full_theta = fit.LogAbilities();
  const double top = full_theta.maxCoeff();
  Eigen::VectorXd scaled = (full_theta.array() - top).exp();
  fit.pi = scaled / scaled.sum();
  fit.psi = fit.pi;
  fit.nu = with_ties ? std::exp(x[x.size() - 1]) : 0.0;

  fit.se_log_ability.resize(t);
  for (int k = 0; k < t; ++k) {
    fit.se_log_ability[k] =
        std::sqrt(QuadraticForm(fit.covariance, LogPiGradient(fit, k)));
  }
  return fit;
}

OutcomeProbabilities PairwiseProbabilities(const AbilityFit& fit,
                                           std::string_view first,
                                           std::string_view second) {
  const int a = fit.IndexOf(first);
  const int b = fit.IndexOf(second);
  if (a == b) {
    throw DataError(error_code::kInvalidConfig,
                    "pairwise probabilities need two distinct treatments");
  }
  return PairwiseProbabilities(fit.psi[a], fit.psi[b], fit.nu);
}

std::vector<NormalizedAbility> NormalizedAbilities(const AbilityFit& fit) {
  const double z = WaldMultiplier(fit.ci_level);
  std::vector<NormalizedAbility> out;
  for (int k = 0; k < fit.num_treatments(); ++k) {
    NormalizedAbility a;
    a.treatment = fit.treatments[k];
    a.pi = fit.pi[k];
    const double se_log = fit.se_log_ability[k];
    a.se = a.pi * se_log;
    // Wald interval on logit(pi) keeps both bounds inside (0, 1).
    const double logit = std::log(a.pi) - std::log1p(-a.pi);
    const double half = z * se_log / (1.0 - a.pi);
    a.ci_lower = 1.0 / (1.0 + std::exp(-(logit - half)));
    a.ci_upper = 1.0 / (1.0 + std::exp(-(logit + half)));
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AbilityRatio> AbilityRatios(const AbilityFit& fit,
                                        const RatioDenominator& denominator) {
  const double z = WaldMultiplier(fit.ci_level);
  const Eigen::VectorXd theta = fit.LogAbilities();
  const int t = fit.num_treatments();
  std::vector<AbilityRatio> out;
  const bool average = std::holds_alternative<AverageTreatment>(denominator);
  const int base = average ? -1 : fit.IndexOf(std::get<std::string>(denominator));
  const double log_mean = std::log(fit.pi.mean());
  for (int x = 0; x < t; ++x) {
    AbilityRatio r;
    r.numerator = fit.treatments[x];
    r.denominator = average ? kAverageLabel : fit.treatments[base];
    if (average) {
      // psi_x / mean(psi) = T * pi_x.
      const double log_ratio = std::log(fit.pi[x]) - log_mean;
      r.se_log = std::sqrt(QuadraticForm(fit.covariance, LogPiGradient(fit, x)));
      r.estimate = std::exp(log_ratio);
      r.ci_lower = std::exp(log_ratio - z * r.se_log);
      r.ci_upper = std::exp(log_ratio + z * r.se_log);
    } else if (x == base) {
      r.estimate = r.ci_lower = r.ci_upper = 1.0;
      r.se_log = 0.0;
    } else {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(fit.log_params.size());
      if (fit.ParamIndex(x) >= 0) g[fit.ParamIndex(x)] += 1.0;
      if (fit.ParamIndex(base) >= 0) g[fit.ParamIndex(base)] -= 1.0;
      const double log_ratio = theta[x] - theta[base];
      r.se_log = std::sqrt(QuadraticForm(fit.covariance, g));
      r.estimate = std::exp(log_ratio);
      r.ci_lower = std::exp(log_ratio - z * r.se_log);
      r.ci_upper = std::exp(log_ratio + z * r.se_log);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Eigen::MatrixXd RecordScores(const AbilityFit& fit,
                             std::span<const IndexedRecord> records) {
  const int dim = static_cast<int>(fit.log_params.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(records.size(), dim);
  const double nu = fit.ties_modeled ? fit.nu : 0.0;
  for (size_t r = 0; r < records.size(); ++r) {
    const IndexedRecord& rec = records[r];
    const OutcomeProbabilities p =
        PairwiseProbabilities(fit.psi[rec.first], fit.psi[rec.second], nu);
    const double won_first = rec.verdict == Verdict::kFirstWins ? 1.0 : 0.0;
    const double won_second = rec.verdict == Verdict::kSecondWins ? 1.0 : 0.0;
    const double tied = rec.verdict == Verdict::kTie ? 1.0 : 0.0;
    const int a = fit.ParamIndex(rec.first);
    const int b = fit.ParamIndex(rec.second);
    if (a >= 0) {
      scores(r, a) = won_first + 0.5 * tied - (p.first_wins + 0.5 * p.tie);
    }
    if (b >= 0) {
      scores(r, b) = won_second + 0.5 * tied - (p.second_wins + 0.5 * p.tie);
    }
    if (fit.ties_modeled) scores(r, dim - 1) = tied - p.tie;
  }
  return scores;
}

}  // namespace tccrank
