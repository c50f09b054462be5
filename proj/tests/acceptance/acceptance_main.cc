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

// Acceptance run: one PASS/FAIL line per criterion with its measurement and
// wall time. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.h"
#include "reference_values.h"
#include "simulate.h"
#include "tccrank/cli.h"
#include "tccrank/compare.h"
#include "tccrank/davidson.h"
#include "tccrank/errors.h"
#include "tccrank/partition.h"
#include "tccrank/tcc.h"

namespace tccrank {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Tie probability at the published leading abilities.
Outcome TieSpotCheck() {
  OutcomeProbabilities p;
  double fastest = 1e9;
  for (int rep = 0; rep < 5; ++rep) {
    const auto start = Clock::now();
    p = PairwiseProbabilities(kBupropionPi, kEscitalopramPi, kAntidepressantNu);
    fastest = std::min(fastest, Seconds(start));
  }
  const bool in_band = p.tie >= 0.82 && p.tie <= 0.88;
  return {in_band && fastest < 1e-3,
          Format("p_tie = %.5f in [0.82, 0.88], call %.2e s", p.tie, fastest)};
}

// 2. Published abilities sum to one; fitted ones do exactly.
Outcome AbilitySums() {
  double published = 0.0;
  for (const auto& [name, pi] : kAntidepressantPi) published += pi;
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const AbilityFit fit = FitDavidson(oracle::RandomTournament(rng));
    double total = 0.0;
    for (const NormalizedAbility& a : NormalizedAbilities(fit)) total += a.pi;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {kAntidepressantPi.size() == 18 && std::abs(published - 1.0) <= 0.005 &&
              worst <= 1e-10,
          Format("published sum %.4f, max |sum - 1| over 500 fits %.1e",
                 published, worst)};
}

// 3. Newton fit against the grid-search oracle.
Outcome OracleEquivalence() {
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  int failures = 0;
  int widened = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Tournament t = oracle::RandomTournament(rng);
    const AbilityFit fit = FitDavidson(t);
    const auto counts = oracle::CountsOf(t);
    const int n = t.num_treatments();
    auto f = [&](const std::vector<double>& x) {
      return oracle::LogLikAt(counts, n, x, true);
    };
    oracle::GridResult grid;
    for (double bound = 8.0;; bound *= 2.0) {
      grid = oracle::GridSearchMaximize(f, n, bound);
      if (grid.interior || bound >= 64.0) break;
      ++widened;
    }
    double err = 0.0;
    for (int d = 0; d < n; ++d) {
      err = std::max(err, std::abs(grid.x[d] - fit.log_params[d]));
    }
    if (!grid.interior || err > 5e-3) ++failures;
    worst = std::max(worst, err);
  }
  return {failures == 0,
          Format("1000 tournaments, max |delta log-param| %.2e, %d outside "
                 "5e-3, %d widened grids",
                 worst, failures, widened)};
}

// 4. Analytic gradient against central differences.
Outcome GradientCheck() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Tournament t = oracle::RandomTournament(rng);
    const DavidsonObjective f(t, 0, true);
    Eigen::VectorXd x(f.dimension());
    for (int d = 0; d < x.size(); ++d) x[d] = normal(rng);
    Eigen::VectorXd g;
    f.Evaluate(x, &g, nullptr);
    Eigen::VectorXd fd(x.size());
    const double h = 1e-6;
    for (int d = 0; d < x.size(); ++d) {
      Eigen::VectorXd up = x;
      Eigen::VectorXd down = x;
      up[d] += h;
      down[d] -= h;
      fd[d] = (f.Value(up) - f.Value(down)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-300));
  }
  return {worst < 1e-5, Format("max relative error %.2e at 50 points", worst)};
}

// 5. Outcome probabilities sum to one and ignore the scale of psi.
Outcome Normalization() {
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> log_psi(-6.0, 6.0);
  std::uniform_real_distribution<double> log_nu(-6.0, 4.0);
  std::uniform_real_distribution<double> log_scale(-7.0, 7.0);
  double sum_err = 0.0;
  double scale_err = 0.0;
  for (int rep = 0; rep < 10000; ++rep) {
    const double a = std::exp(log_psi(rng));
    const double b = std::exp(log_psi(rng));
    const double nu = rep % 10 == 0 ? 0.0 : std::exp(log_nu(rng));
    const double c = std::exp(log_scale(rng));
    const OutcomeProbabilities p = PairwiseProbabilities(a, b, nu);
    const OutcomeProbabilities q = PairwiseProbabilities(c * a, c * b, nu);
    sum_err = std::max(sum_err,
                       std::abs(p.first_wins + p.second_wins + p.tie - 1.0));
    scale_err = std::max({scale_err, std::abs(p.first_wins - q.first_wins),
                          std::abs(p.second_wins - q.second_wins),
                          std::abs(p.tie - q.tie)});
  }
  return {sum_err <= 1e-12 && scale_err <= 1e-12,
          Format("max |sum - 1| %.1e, max rescaling change %.1e", sum_err,
                 scale_err)};
}

// True when no treatment outside `s` ever beats one inside it.
bool IsDominantSet(const Tournament& t, const std::vector<int>& s) {
  std::vector<bool> in(t.num_treatments(), false);
  for (int k : s) in[k] = true;
  if (s.empty() || static_cast<int>(s.size()) == t.num_treatments()) {
    return false;
  }
  for (int a = 0; a < t.num_treatments(); ++a) {
    for (int b = 0; b < t.num_treatments(); ++b) {
      if (!in[a] && in[b] && t.Wins(a, b) > 0) return false;
    }
  }
  return true;
}

// 6. Ford-condition failures are all rejected.
Outcome FordGate() {
  std::mt19937_64 rng(6006);
  std::uniform_int_distribution<int> size(3, 6);
  std::uniform_int_distribution<int> count(1, 5);
  std::bernoulli_distribution coin(0.5);
  int detected = 0;
  int cases = 0;
  for (int rep = 0; rep < 200; ++rep, ++cases) {
    const int n = size(rng);
    Tournament t(oracle::Labels(n));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int kind = rep % 3;
    // Kind 0: ties only. Kind 1: a strict order with optional ties.
    // Kind 2: a top block that is never beaten from below, with mixed
    // results inside each block.
    const int top = 1 + static_cast<int>(rng() % (n - 1));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int a = order[i];
        const int b = order[j];
        if (kind == 0) {
          t.Add(a, b, Verdict::kTie, count(rng));
        } else if (kind == 1) {
          t.Add(a, b, Verdict::kFirstWins, count(rng));
          if (coin(rng)) t.Add(a, b, Verdict::kTie, count(rng));
        } else {
          t.Add(a, b, Verdict::kFirstWins, count(rng));
          if ((i < top) == (j < top)) t.Add(b, a, Verdict::kFirstWins, 1);
          if (coin(rng)) t.Add(a, b, Verdict::kTie, 1);
        }
      }
    }
    const std::string expected =
        kind == 0 ? error_code::kOnlyTies : error_code::kFordViolation;
    const FordCheck check = CheckFord(t);
    bool rejected = false;
    try {
      FitDavidson(t);
    } catch (const ModelError& e) {
      rejected = e.code() == expected;
    }
    if (rejected && !check.passed && IsDominantSet(t, check.violating_set)) {
      ++detected;
    }
  }
  return {detected == cases,
          Format("%d of %d rejected with the documented code and a valid "
                 "dominant set",
                 detected, cases)};
}

// 7. Criterion truth table, both directions.
Outcome TruthTable() {
  const double upper = std::log(1.2);
  struct Case {
    const char* name;
    double y, l, u;
    Verdict beneficial;
  };
  // ROE (-0.182, 0.182), null effect 0.
  const std::vector<Case> cases = {
      {"lower bound above ROE", 0.50, 0.30, 0.70, Verdict::kFirstWins},
      {"estimate above ROE, bound above null", 0.25, 0.05, 0.45,
       Verdict::kFirstWins},
      {"upper bound below ROE", -0.50, -0.70, -0.30, Verdict::kSecondWins},
      {"estimate below ROE, bound below null", -0.25, -0.45, -0.05,
       Verdict::kSecondWins},
      {"both silent", 0.25, -0.05, 0.55, Verdict::kTie},
  };
  auto swap = [](Verdict v) {
    return v == Verdict::kFirstWins    ? Verdict::kSecondWins
           : v == Verdict::kSecondWins ? Verdict::kFirstWins
                                       : v;
  };
  int right = 0;
  int total = 0;
  for (const Case& c : cases) {
    for (Direction d : {Direction::kBeneficial, Direction::kHarmful}) {
      const TccDecision got = EvaluateTcc(c.y, c.l, c.u, BuildRoe(1.2, {}, d));
      const Verdict want =
          d == Direction::kBeneficial ? c.beneficial : swap(c.beneficial);
      right += got.verdict == want;
      ++total;
    }
  }
  // Strictness at the boundaries: equality never fires a clause.
  const RoeConfig roe = BuildRoe(1.2);
  const bool strict =
      EvaluateTcc(0.4, upper, 0.6, roe).verdict == Verdict::kFirstWins &&
      EvaluateTcc(upper, 0.01, 0.4, roe).verdict == Verdict::kTie &&
      EvaluateTcc(-upper, -0.4, -0.01, roe).verdict == Verdict::kTie &&
      EvaluateTcc(0.3, 0.0, 0.6, roe).verdict == Verdict::kTie;
  return {right == total && strict,
          Format("%d of %d clause cases (4 clauses plus both silent, two "
                 "directions), boundary strictness %s",
                 right, total, strict ? "ok" : "violated")};
}

bool SplitsOnGroupAtDepthOne(const PartitionTree& tree) {
  return tree.Depth() == 1 && tree.root->split &&
         tree.root->split->rule.covariate == "group";
}

// 8. Planted regime recovery and null false-split rate.
Outcome PartitionRecovery() {
  PartitionConfig config;
  config.alpha = 0.05;
  std::mt19937_64 rng(8008);
  int recovered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    config.seed = rep + 1;
    const PartitionTree tree =
        GrowTree(simulate::BinaryRegime(rng, 200, true),
                 simulate::BinarySchema(), {"group"}, config);
    recovered += SplitsOnGroupAtDepthOne(tree);
  }
  int false_splits = 0;
  for (int rep = 0; rep < 400; ++rep) {
    config.seed = rep + 1;
    const PartitionTree tree =
        GrowTree(simulate::BinaryRegime(rng, 200, false),
                 simulate::BinarySchema(), {"group"}, config);
    false_splits += tree.root->split.has_value();
  }
  const double power = recovered / 200.0;
  const double size = false_splits / 400.0;
  return {power >= 0.90 && size >= 0.03 && size <= 0.07,
          Format("recovered %.3f of 200 planted (>= 0.90), false splits "
                 "%.4f of 400 null (in [0.03, 0.07])",
                 power, size)};
}

// 9. Comparison metric checks.
Outcome CompareMetrics() {
  std::mt19937_64 rng(9009);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::uniform_real_distribution<double> se(0.05, 0.4);
  double mean_err = 0.0;
  double civ_err = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int t = 2 + rep % 15;
    Eigen::VectorXd est(t);
    Eigen::VectorXd sd(t);
    for (int k = 0; k < t; ++k) {
      est[k] = k == 0 ? 0.0 : normal(rng);
      sd[k] = k == 0 ? 0.0 : se(rng);
    }
    const LeagueTable table = LeagueTable::FromBasic(
        oracle::Labels(t), 0, est, sd, std::nullopt, Direction::kBeneficial);
    const ScoreTable p = PScores(table);
    double total = 0.0;
    for (const auto& [name, v] : p) total += v;
    mean_err = std::max(mean_err, std::abs(total / t - 0.5));
    const ScoreTable civ = PScoresCiv(table, 1.0 + 1e-9);
    for (int k = 0; k < t; ++k) {
      civ_err = std::max(civ_err, std::abs(civ[k].second - p[k].second));
    }
  }
  const LeagueTable two = LeagueTable::FromPairwise(
      {"A", "B"}, {{{"A", "B"}, {1.96 * 0.2, 0.2}}}, Direction::kBeneficial);
  const double phi = PScores(two)[0].second;
  // Phi(1.96) is 0.9750021..., 2.1e-6 above 0.975; the ratio that gives
  // exactly 0.975 is the 0.975 normal quantile.
  const double z975 = 1.959963984540054;
  const LeagueTable at_quantile = LeagueTable::FromPairwise(
      {"A", "B"}, {{{"A", "B"}, {z975 * 0.2, 0.2}}}, Direction::kBeneficial);
  const double phi_quantile = PScores(at_quantile)[0].second;

  const LeagueTable symmetric = LeagueTable::FromBasic(
      {"A", "B"}, 0, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 0.25),
      std::nullopt, Direction::kBeneficial);
  ProbBestOptions options;
  options.nsim = 100000;
  options.seed = 9;
  const double best = ProbBest(symmetric, options).probabilities[0].second;
  const double band = 2.0 * std::sqrt(0.25 / options.nsim);

  const bool pass = mean_err <= 1e-15 &&
                    std::abs(phi - 0.9750021048517795) <= 1e-6 &&
                    std::abs(phi_quantile - 0.975) <= 1e-6 &&
                    std::abs(best - 0.5) <= band && civ_err <= 1e-6;
  return {pass, Format("max |mean p - 0.5| %.1e, Phi(1.96) %.7f, Phi(z_0.975) "
                       "%.7f, symmetric p_best %.4f (band %.4f), CIV limit "
                       "gap %.1e",
                       mean_err, phi, phi_quantile, best, band, civ_err)};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 10. Two CLI runs of the bundled fixture are byte-identical.
Outcome Determinism() {
  const fs::path data = fs::path(TCCRANK_SOURCE_DIR) / "tests" / "data";
  const fs::path root = fs::temp_directory_path() / "tccrank_acceptance";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs = {
      {"rank", "--input", (data / "network6.csv").string(), "--mcid", "1.2",
       "--dump-records", "--seed", "17"},
      {"partition", "--input", (data / "network6.csv").string(), "--mcid",
       "1.2", "--partition", "risk,year", "--seed", "17"},
      {"compare", "--input", (data / "league_basic.csv").string(), "--league",
       "basic", "--mcid", "1.1", "--seed", "17"},
  };
  int files = 0;
  int identical = 0;
  bool ok = true;
  for (size_t r = 0; r < runs.size(); ++r) {
    std::vector<fs::path> dirs;
    for (int copy = 0; copy < 2; ++copy) {
      const fs::path dir =
          root / (std::to_string(r) + "_" + std::to_string(copy));
      std::vector<std::string> args = runs[r];
      args.insert(args.end(), {"--out-dir", dir.string()});
      std::ostringstream sink;
      ok = ok && cli::Main(args, sink, sink) == cli::kExitOk;
      dirs.push_back(dir);
    }
    if (!ok) break;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      identical +=
          Slurp(entry.path()) == Slurp(dirs[1] / entry.path().filename());
    }
  }
  fs::remove_all(root);
  return {ok && files >= 9 && identical == files,
          Format("%d of %d CSV/JSON/SVG/text artifacts byte-identical", identical,
                 files)};
}

}  // namespace
}  // namespace tccrank

int main() {
  using tccrank::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>>
      criteria = {
          {"tie probability spot check", tccrank::TieSpotCheck},
          {"ability sums", tccrank::AbilitySums},
          {"grid oracle equivalence", tccrank::OracleEquivalence},
          {"gradient check", tccrank::GradientCheck},
          {"outcome probability normalization", tccrank::Normalization},
          {"Ford condition gate", tccrank::FordGate},
          {"criterion truth table", tccrank::TruthTable},
          {"partition recovery", tccrank::PartitionRecovery},
          {"comparison metrics", tccrank::CompareMetrics},
          {"end-to-end determinism", tccrank::Determinism},
      };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = tccrank::Clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = tccrank::Seconds(start);
    failed += !outcome.pass;
    std::printf("%s %2zu %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL",
                i + 1, criteria[i].first, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
