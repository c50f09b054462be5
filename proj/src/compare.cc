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

#include "tccrank/compare.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tccrank/csv.h"
#include "tccrank/errors.h"
#include "tccrank/kernels.h"
#include "tccrank/stats.h"

namespace tccrank {
namespace {

int IndexIn(const std::vector<std::string>& treatments,
            const std::string& label) {
  auto it = std::find(treatments.begin(), treatments.end(), label);
  if (it == treatments.end()) {
    throw DataError(error_code::kUnknownTreatment,
                    "unknown treatment '" + label + "'");
  }
  return static_cast<int>(it - treatments.begin());
}

double Sign(Direction direction) {
  return direction == Direction::kBeneficial ? 1.0 : -1.0;
}

void RequirePositiveSe(const LeagueTable& table) {
  for (int a = 0; a < table.num_treatments(); ++a) {
    for (int b = a + 1; b < table.num_treatments(); ++b) {
      if (!(table.Get(a, b).se > 0.0)) {
        throw DataError(error_code::kNegativeSe,
                        "P-scores need se > 0 for " + table.treatments()[a] +
                            " vs " + table.treatments()[b]);
      }
    }
  }
}

CsvTable ReadTable(std::istream& in, std::initializer_list<const char*> cols,
                   std::vector<int>& indices) {
  CsvTable table = ReadCsv(in);
  indices.clear();
  for (const char* name : cols) {
    std::optional<int> idx = table.ColumnIndex(name);
    if (!idx) {
      throw DataError(error_code::kMissingColumn,
                      std::string("missing mandatory column '") + name + "'");
    }
    indices.push_back(*idx);
  }
  return table;
}

double Number(const CsvTable& table, size_t row, int col, const char* name) {
  std::optional<double> v = ParseDouble(table.rows[row][col]);
  if (!v) {
    throw DataError(error_code::kBadNumber,
                    "line " + std::to_string(table.line_numbers[row]) +
                        ": column '" + name + "' is not a number");
  }
  return *v;
}

}  // namespace

LeagueTable LeagueTable::FromPairwise(
    std::vector<std::string> treatments,
    const std::vector<std::pair<std::pair<std::string, std::string>, Contrast>>&
        entries,
    Direction direction) {
  LeagueTable table;
  table.treatments_ = std::move(treatments);
  table.direction_ = direction;
  const int t = table.num_treatments();
  if (t < 2) {
    throw DataError(error_code::kIncompleteTable,
                    "a league table needs at least two treatments");
  }
  for (const auto& [labels, contrast] : entries) {
    int a = IndexIn(table.treatments_, labels.first);
    int b = IndexIn(table.treatments_, labels.second);
    if (a == b) {
      throw DataError(error_code::kInvalidRow,
                      "league table entry compares a treatment with itself");
    }
    if (contrast.se < 0.0) {
      throw DataError(error_code::kNegativeSe, "league table se must be >= 0");
    }
    Contrast oriented = contrast;
    if (a > b) {
      std::swap(a, b);
      oriented.estimate = -oriented.estimate;
    }
    auto [it, inserted] = table.pairwise_.try_emplace({a, b}, oriented);
    if (!inserted) {
      const Contrast& prior = it->second;
      const double tol =
          1e-9 * std::max({1.0, std::abs(prior.estimate), prior.se});
      if (std::abs(prior.estimate - oriented.estimate) > tol ||
          std::abs(prior.se - oriented.se) > tol) {
        throw DataError(error_code::kInvalidRow,
                        "league table is not antisymmetric for " +
                            labels.first + " vs " + labels.second);
      }
    }
  }
  for (int a = 0; a < t; ++a) {
    for (int b = a + 1; b < t; ++b) {
      if (!table.pairwise_.count({a, b})) {
        throw DataError(error_code::kIncompleteTable,
                        "league table lacks " + table.treatments_[a] + " vs " +
                            table.treatments_[b]);
      }
    }
  }
  // Basic parameters against the first treatment, assuming independence.
  table.reference_ = 0;
  table.basic_estimates_ = Eigen::VectorXd::Zero(t);
  table.basic_covariance_ = Eigen::MatrixXd::Zero(t, t);
  for (int x = 1; x < t; ++x) {
    const Contrast c = table.Get(x, 0);
    table.basic_estimates_[x] = c.estimate;
    table.basic_covariance_(x, x) = c.se * c.se;
  }
  table.independence_assumed_ = true;
  return table;
}

LeagueTable LeagueTable::FromBasic(std::vector<std::string> treatments,
                                   int reference, Eigen::VectorXd estimates,
                                   Eigen::VectorXd se,
                                   std::optional<Eigen::MatrixXd> covariance,
                                   Direction direction) {
  LeagueTable table;
  table.treatments_ = std::move(treatments);
  table.direction_ = direction;
  const int t = table.num_treatments();
  if (t < 2 || estimates.size() != t || se.size() != t || reference < 0 ||
      reference >= t) {
    throw DataError(error_code::kIncompleteTable,
                    "basic-form league table has inconsistent dimensions");
  }
  if ((se.array() < 0.0).any()) {
    throw DataError(error_code::kNegativeSe, "league table se must be >= 0");
  }
  table.reference_ = reference;
  table.basic_estimates_ = estimates;
  table.basic_estimates_[reference] = 0.0;
  if (covariance) {
    if (covariance->rows() != t || covariance->cols() != t) {
      throw DataError(error_code::kIncompleteTable,
                      "covariance matrix has the wrong dimensions");
    }
    table.basic_covariance_ = 0.5 * (*covariance + covariance->transpose());
    table.independence_assumed_ = false;
  } else {
    table.basic_covariance_ = se.array().square().matrix().asDiagonal();
    table.independence_assumed_ = true;
  }
  table.basic_covariance_.row(reference).setZero();
  table.basic_covariance_.col(reference).setZero();
  const Eigen::MatrixXd& c = table.basic_covariance_;
  for (int a = 0; a < t; ++a) {
    for (int b = a + 1; b < t; ++b) {
      const double var = c(a, a) + c(b, b) - 2.0 * c(a, b);
      table.pairwise_[{a, b}] = {
          table.basic_estimates_[a] - table.basic_estimates_[b],
          std::sqrt(std::max(0.0, var))};
    }
  }
  return table;
}

Contrast LeagueTable::Get(int a, int b) const {
  if (a == b) return {0.0, 0.0};
  if (a < b) return pairwise_.at({a, b});
  Contrast c = pairwise_.at({b, a});
  c.estimate = -c.estimate;
  return c;
}

LeagueTable ParsePairwiseLeagueTable(std::istream& in, Direction direction) {
  std::vector<int> col;
  const CsvTable table = ReadTable(in, {"treat1", "treat2", "estimate", "se"}, col);
  std::vector<std::string> treatments;
  std::set<std::string> seen;
  std::vector<std::pair<std::pair<std::string, std::string>, Contrast>> entries;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (int c : {col[0], col[1]}) {
      if (seen.insert(row[c]).second) treatments.push_back(row[c]);
    }
    entries.push_back({{row[col[0]], row[col[1]]},
                       {Number(table, r, col[2], "estimate"),
                        Number(table, r, col[3], "se")}});
  }
  return LeagueTable::FromPairwise(std::move(treatments), entries, direction);
}

LeagueTable ParseBasicLeagueTable(std::istream& in,
                                  std::optional<std::string> reference,
                                  std::istream* covariance,
                                  Direction direction) {
  std::vector<int> col;
  const CsvTable table =
      ReadTable(in, {"treat", "estimate_vs_ref", "se"}, col);
  std::vector<std::string> treatments;
  std::vector<double> estimates;
  std::vector<double> ses;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& label = table.rows[r][col[0]];
    if (std::find(treatments.begin(), treatments.end(), label) !=
        treatments.end()) {
      throw DataError(error_code::kDuplicatePair,
                      "treatment '" + label + "' listed twice");
    }
    treatments.push_back(label);
    estimates.push_back(Number(table, r, col[1], "estimate_vs_ref"));
    ses.push_back(Number(table, r, col[2], "se"));
  }
  int ref = -1;
  if (reference) {
    auto it = std::find(treatments.begin(), treatments.end(), *reference);
    if (it == treatments.end()) {
      treatments.push_back(*reference);
      estimates.push_back(0.0);
      ses.push_back(0.0);
      ref = static_cast<int>(treatments.size()) - 1;
    } else {
      ref = static_cast<int>(it - treatments.begin());
    }
  } else {
    for (size_t i = 0; i < treatments.size(); ++i) {
      if (estimates[i] == 0.0 && ses[i] == 0.0) {
        ref = static_cast<int>(i);
        break;
      }
    }
    if (ref < 0) {
      throw DataError(error_code::kIncompleteTable,
                      "basic-form table needs a reference (a row with "
                      "estimate 0 and se 0, or --reference)");
    }
  }
  const int t = static_cast<int>(treatments.size());
  std::optional<Eigen::MatrixXd> cov;
  if (covariance != nullptr) {
    const CsvTable m = ReadCsv(*covariance);
    if (m.header.size() < 2) {
      throw DataError(error_code::kMissingColumn,
                      "covariance CSV needs a header of treatment labels");
    }
    std::vector<int> map;
    for (size_t c = 1; c < m.header.size(); ++c) {
      map.push_back(IndexIn(treatments, m.header[c]));
    }
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(t, t);
    std::vector<char> seen_row(t, 0);
    for (size_t r = 0; r < m.rows.size(); ++r) {
      const int a = IndexIn(treatments, m.rows[r][0]);
      seen_row[a] = 1;
      for (size_t c = 1; c < m.header.size(); ++c) {
        full(a, map[c - 1]) = Number(m, r, static_cast<int>(c), "covariance");
      }
    }
    for (int x = 0; x < t; ++x) {
      if (x != ref && !seen_row[x]) {
        throw DataError(error_code::kIncompleteTable,
                        "covariance lacks a row for '" + treatments[x] + "'");
      }
    }
    cov = std::move(full);
  }
  return LeagueTable::FromBasic(
      std::move(treatments), ref,
      Eigen::Map<const Eigen::VectorXd>(estimates.data(), t),
      Eigen::Map<const Eigen::VectorXd>(ses.data(), t), std::move(cov),
      direction);
}

ScoreTable PScores(const LeagueTable& table) {
  RequirePositiveSe(table);
  const double d = Sign(table.direction());
  const int t = table.num_treatments();
  // One evaluation per unordered pair so that the two sides sum to one.
  std::vector<double> totals(t, 0.0);
  for (int x = 0; x < t; ++x) {
    for (int y = x + 1; y < t; ++y) {
      const Contrast c = table.Get(x, y);
      const double p = NormalCdf(d * c.estimate / c.se);
      totals[x] += p;
      totals[y] += 1.0 - p;
    }
  }
  ScoreTable out;
  for (int x = 0; x < t; ++x) {
    out.emplace_back(table.treatments()[x], totals[x] / (t - 1));
  }
  return out;
}

ScoreTable PScoresCiv(const LeagueTable& table, double mcid) {
  if (!(mcid > 1.0)) {
    throw DataError(error_code::kInvalidConfig, "mcid must exceed 1");
  }
  RequirePositiveSe(table);
  const double d = Sign(table.direction());
  const double threshold = std::log(mcid);
  const int t = table.num_treatments();
  ScoreTable out;
  for (int x = 0; x < t; ++x) {
    double total = 0.0;
    for (int y = 0; y < t; ++y) {
      if (y == x) continue;
      const Contrast c = table.Get(x, y);
      total += NormalCdf((d * c.estimate - threshold) / c.se);
    }
    out.emplace_back(table.treatments()[x], total / (t - 1));
  }
  return out;
}

ProbBestResult ProbBest(const LeagueTable& table,
                        const ProbBestOptions& options) {
  if (options.nsim < 1) {
    throw DataError(error_code::kInvalidConfig, "nsim must be >= 1");
  }
  const Eigen::MatrixXd& cov = table.basic_covariance();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(cov);
  const Eigen::VectorXd values = eigen.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -1e-10 * scale) {
    throw DataError(error_code::kNotPsd,
                    "covariance matrix is not positive semi-definite");
  }
  const Eigen::MatrixXd factor =
      eigen.eigenvectors() *
      values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const double sign = Sign(table.direction());
  ProbBestResult result;
  result.independence_assumed = table.independence_assumed();
  result.tally = options.parallel
                     ? kernels::ProbBestTallyParallel(table.basic_estimates(),
                                                      factor, sign,
                                                      options.nsim,
                                                      options.seed)
                     : kernels::ProbBestTallySerial(table.basic_estimates(),
                                                    factor, sign, options.nsim,
                                                    options.seed);
  for (int x = 0; x < table.num_treatments(); ++x) {
    result.probabilities.emplace_back(
        table.treatments()[x],
        static_cast<double>(result.tally[x]) / static_cast<double>(options.nsim));
  }
  return result;
}

}  // namespace tccrank
