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

// Reference computations for tests. Everything here is written from the
// model definitions directly and shares no code with the library beyond the
// Tournament container.

#ifndef TCCRANK_TESTS_ORACLE_H_
#define TCCRANK_TESTS_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tccrank/tcc.h"

namespace tccrank::oracle {

struct Counts {
  int i = 0;
  int j = 0;
  double wins_i = 0;
  double wins_j = 0;
  double ties = 0;
};

inline std::vector<Counts> CountsOf(const Tournament& t) {
  std::vector<Counts> out;
  for (const auto& [key, c] : t.counts()) {
    out.push_back({key.first, key.second, double(c.first_wins),
                   double(c.second_wins), double(c.ties)});
  }
  return out;
}

// Davidson log-likelihood at abilities psi and tie parameter nu, written
// straight from the outcome probabilities.
inline double LogLik(const std::vector<Counts>& counts,
                     const std::vector<double>& psi, double nu) {
  double total = 0.0;
  for (const Counts& c : counts) {
    const double a = psi[c.i];
    const double b = psi[c.j];
    const double tie = nu * std::sqrt(a * b);
    const double d = a + b + tie;
    if (c.wins_i > 0) total += c.wins_i * std::log(a / d);
    if (c.wins_j > 0) total += c.wins_j * std::log(b / d);
    if (c.ties > 0) total += c.ties * std::log(tie / d);
  }
  return total;
}

// Parameters x = (log psi_k for k != 0, log nu). psi_0 = 1.
inline double LogLikAt(const std::vector<Counts>& counts, int t,
                       const std::vector<double>& x, bool with_ties) {
  std::vector<double> psi(t, 1.0);
  for (int k = 1; k < t; ++k) psi[k] = std::exp(x[k - 1]);
  const double nu = with_ties ? std::exp(x[t - 1]) : 0.0;
  return LogLik(counts, psi, nu);
}

struct GridResult {
  std::vector<double> x;
  double value = 0.0;
  bool interior = true;
  int sweeps = 0;
};

// Cyclic coordinate ascent where each coordinate is maximized by a nested
// grid search: step 0.1 over [-bound, bound], then steps 1e-2 .. 1e-5 around
// the incumbent. For a concave objective this converges to the maximizer up
// to the final grid resolution.
inline GridResult GridSearchMaximize(
    const std::function<double(const std::vector<double>&)>& f, int dim,
    double bound = 8.0, int max_sweeps = 4000) {
  GridResult result;
  result.x.assign(dim, 0.0);
  double best = f(result.x);
  std::vector<double> x = result.x;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double start = x[d];
      double center = x[d];
      double step = sweep == 0 ? 0.1 : 0.01;
      double radius = sweep == 0 ? bound : 0.1;
      for (; step >= 0.99e-5; step /= 10.0, radius = step * 10.0) {
        const int n = static_cast<int>(std::lround(radius / step));
        double arg = center;
        double val = best;
        for (int s = -n; s <= n; ++s) {
          const double v = std::clamp(center + s * step, -bound, bound);
          x[d] = v;
          const double fv = f(x);
          if (fv > val) {
            val = fv;
            arg = v;
          }
        }
        center = arg;
        best = val;
        x[d] = center;
      }
      moved = std::max(moved, std::abs(x[d] - start));
    }
    result.sweeps = sweep + 1;
    if (moved < 1e-7) break;
  }
  result.x = x;
  result.value = best;
  for (double v : x) {
    if (std::abs(v) > bound - 0.1) result.interior = false;
  }
  return result;
}

// Hunter's MM iteration for the tie-free Bradley-Terry model. Returns
// abilities normalized to sum to one.
inline std::vector<double> BradleyTerryMm(const Tournament& t,
                                          int iterations = 200000,
                                          double tolerance = 1e-13) {
  const int n = t.num_treatments();
  std::vector<double> wins(n, 0.0);
  for (const auto& [key, c] : t.counts()) {
    wins[key.first] += c.first_wins;
    wins[key.second] += c.second_wins;
  }
  std::vector<double> p(n, 1.0 / n);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double denom = 0.0;
      for (const auto& [key, c] : t.counts()) {
        const double m = c.first_wins + c.second_wins;
        if (key.first == i) denom += m / (p[i] + p[key.second]);
        if (key.second == i) denom += m / (p[i] + p[key.first]);
      }
      next[i] = wins[i] / denom;
    }
    double sum = 0.0;
    for (double v : next) sum += v;
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      next[i] /= sum;
      change = std::max(change, std::abs(next[i] - p[i]));
    }
    p = next;
    if (change < tolerance) break;
  }
  return p;
}

// Strong connectivity of the "beats" digraph: an edge i -> j when i beat j
// at least once. Floyd-Warshall closure.
inline bool StronglyConnected(const Tournament& t) {
  const int n = t.num_treatments();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) reach[i][i] = 1;
  for (const auto& [key, c] : t.counts()) {
    if (c.first_wins > 0) reach[key.first][key.second] = 1;
    if (c.second_wins > 0) reach[key.second][key.first] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

inline std::vector<std::string> Labels(int n) {
  std::vector<std::string> labels;
  for (int k = 0; k < n; ++k) labels.push_back(std::string(1, char('A' + k)));
  return labels;
}

// Random tournament with 3-6 treatments and at most `max_per_pair` outcomes
// per pair, drawn from a Davidson model with random abilities. Redrawn until
// it is strongly connected and contains at least one tie.
inline Tournament RandomTournament(std::mt19937_64& rng, int max_per_pair = 10,
                                   int min_t = 3, int max_t = 6) {
  std::uniform_int_distribution<int> num_t(min_t, max_t);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const int n = num_t(rng);
    std::vector<double> psi(n);
    for (double& v : psi) v = std::exp(2.0 * unit(rng) - 1.0);
    const double nu = std::exp(2.0 * unit(rng) - 1.5);
    Tournament t(Labels(n));
    std::uniform_int_distribution<int> size(0, max_per_pair);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (unit(rng) < 0.25) continue;
        const int m = size(rng);
        const double tie = nu * std::sqrt(psi[i] * psi[j]);
        const double d = psi[i] + psi[j] + tie;
        for (int r = 0; r < m; ++r) {
          const double u = unit(rng) * d;
          const Verdict v = u < psi[i]            ? Verdict::kFirstWins
                            : u < psi[i] + psi[j] ? Verdict::kSecondWins
                                                  : Verdict::kTie;
          t.Add(i, j, v);
        }
      }
    }
    if (t.TotalTies() > 0 && StronglyConnected(t)) return t;
  }
}

// Probability that coordinate `x` of independent normals N(mean_k, sd_k^2) is
// the largest, by quadrature of f_x(z) prod_{k != x} F_k(z). A zero sd is a
// point mass.
inline std::vector<double> ProbBestIndependent(const std::vector<double>& mean,
                                               const std::vector<double>& sd) {
  const int n = static_cast<int>(mean.size());
  auto cdf = [&](int k, double z) {
    if (sd[k] == 0.0) return z >= mean[k] ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(z - mean[k]) / (sd[k] * std::sqrt(2.0)));
  };
  std::vector<double> out(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (sd[x] == 0.0) {
      double p = 1.0;
      for (int k = 0; k < n; ++k) {
        if (k != x) p *= cdf(k, mean[x]);
      }
      out[x] = p;
      continue;
    }
    // Composite Simpson over +-10 sd; the point masses of others are
    // handled by splitting at their locations.
    std::vector<double> knots = {mean[x] - 10 * sd[x], mean[x] + 10 * sd[x]};
    for (int k = 0; k < n; ++k) {
      if (sd[k] == 0.0 && mean[k] > knots[0] && mean[k] < knots[1]) {
        knots.push_back(mean[k]);
      }
    }
    std::sort(knots.begin(), knots.end());
    double total = 0.0;
    for (size_t s = 0; s + 1 < knots.size(); ++s) {
      const int steps = 20000;
      const double a = knots[s];
      const double h = (knots[s + 1] - a) / steps;
      auto g = [&](double z) {
        const double u = (z - mean[x]) / sd[x];
        double v = std::exp(-0.5 * u * u) / (sd[x] * std::sqrt(2 * M_PI));
        for (int k = 0; k < n; ++k) {
          if (k != x) v *= cdf(k, z);
        }
        return v;
      };
      double acc = g(a + 1e-12 * h) + g(knots[s + 1] - 1e-12 * h);
      for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
      total += acc * h / 3.0;
    }
    out[x] = total;
  }
  return out;
}

}  // namespace tccrank::oracle

#endif  // TCCRANK_TESTS_ORACLE_H_
