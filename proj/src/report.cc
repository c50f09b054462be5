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

#include "tccrank/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tccrank/csv.h"
#include "tccrank/errors.h"

namespace tccrank {
namespace {

using Json = nlohmann::ordered_json;

// Treatment indices by descending pi, stable in treatment order.
std::vector<int> RankOrder(const AbilityFit& fit) {
  std::vector<int> order(fit.num_treatments());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fit.pi[a] > fit.pi[b]; });
  return order;
}

std::string Fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

Json AbilityTable(const AbilityFit& fit) {
  const std::vector<NormalizedAbility> normalized = NormalizedAbilities(fit);
  const std::vector<int> ranks = AbilityRanks(fit);
  const Eigen::VectorXd theta = fit.LogAbilities();
  Json rows = Json::array();
  for (int k : RankOrder(fit)) {
    rows.push_back({{"treatment", fit.treatments[k]},
                    {"psi", fit.psi[k]},
                    {"pi", fit.pi[k]},
                    {"pi_se", normalized[k].se},
                    {"se_log_ability", fit.se_log_ability[k]},
                    {"ci_lower", normalized[k].ci_lower},
                    {"ci_upper", normalized[k].ci_upper},
                    {"log_ability_vs_reference", theta[k]},
                    {"rank", ranks[k]}});
  }
  return rows;
}

Json RuleToJson(const SplitRule& rule) {
  Json j = {{"covariate", rule.covariate}};
  if (rule.kind == CovariateKind::kContinuous) {
    j["kind"] = "continuous";
    j["cutpoint"] = rule.cutpoint;
  } else {
    j["kind"] = "categorical";
    j["left_levels"] = rule.left_levels;
  }
  return j;
}

std::string RuleText(const SplitRule& rule, bool left) {
  if (rule.kind == CovariateKind::kContinuous) {
    return rule.covariate + (left ? " <= " : " > ") +
           FormatSignificant(rule.cutpoint);
  }
  std::string levels;
  for (const std::string& l : rule.left_levels) {
    if (!levels.empty()) levels += ", ";
    levels += l;
  }
  return rule.covariate + (left ? " in {" : " not in {") + levels + "}";
}

Json NodeToJson(const PartitionNode& node) {
  Json j;
  j["id"] = node.id;
  j["depth"] = node.depth;
  j["n_records"] = node.record_indices.size();
  j["nu"] = node.fit.nu;
  j["loglik"] = node.fit.loglik;
  j["abilities"] = AbilityTable(node.fit);
  Json tests = Json::array();
  for (const StabilityResult& t : node.tests) {
    tests.push_back(
        {{"covariate", t.covariate},
         {"kind", t.kind == CovariateKind::kContinuous ? "continuous"
                                                       : "categorical"},
         {"statistic", t.statistic},
         {"df", t.df},
         {"p_value", t.p_value}});
  }
  j["tests"] = std::move(tests);
  if (node.split) {
    Json split = RuleToJson(node.split->rule);
    split["statistic"] = node.split->statistic;
    split["p_value"] = node.split->p_value;
    split["raw_p_value"] = node.split->raw_p_value;
    split["partitioned_loglik"] = node.split->partitioned_loglik;
    j["split"] = std::move(split);
    j["left"] = NodeToJson(*node.left);
    j["right"] = NodeToJson(*node.right);
  } else {
    j["split"] = nullptr;
    j["stop_reason"] = node.stop_reason;
  }
  return j;
}

void NodeText(const PartitionNode& node, const std::string& indent,
              const std::string& label, std::ostringstream& out) {
  out << indent << label << "[" << node.id << "] n=" << node.record_indices.size()
      << " nu=" << FormatSignificant(node.fit.nu, 4)
      << " loglik=" << FormatSignificant(node.fit.loglik, 6);
  if (node.is_leaf()) {
    out << "  leaf: ";
    bool first = true;
    for (int k : RankOrder(node.fit)) {
      if (!first) out << " > ";
      out << node.fit.treatments[k] << " (" << Fixed(node.fit.pi[k], 3) << ")";
      first = false;
    }
    out << "\n";
    return;
  }
  out << "  split on " << node.split->rule.covariate
      << " (adjusted p=" << FormatSignificant(node.split->p_value, 4) << ")\n";
  const std::string child = indent + "    ";
  NodeText(*node.left, child, RuleText(node.split->rule, true) + ": ", out);
  NodeText(*node.right, child, RuleText(node.split->rule, false) + ": ", out);
}

}  // namespace

std::vector<int> AbilityRanks(const AbilityFit& fit) {
  std::vector<int> ranks(fit.num_treatments());
  const std::vector<int> order = RankOrder(fit);
  for (size_t pos = 0; pos < order.size(); ++pos) {
    const int k = order[pos];
    if (pos > 0 && fit.pi[k] == fit.pi[order[pos - 1]]) {
      ranks[k] = ranks[order[pos - 1]];
    } else {
      ranks[k] = static_cast<int>(pos) + 1;
    }
  }
  return ranks;
}

Json FitToJson(const AbilityFit& fit, const Tournament* tournament) {
  Json j;
  j["model"] = fit.ties_modeled ? "davidson" : "bradley_terry";
  j["treatments"] = fit.treatments;
  j["reference"] = fit.treatments[fit.reference];
  j["ci_level"] = fit.ci_level;
  j["nu"] = fit.nu;
  j["ties_modeled"] = fit.ties_modeled;
  j["abilities"] = AbilityTable(fit);
  Json ratios = Json::array();
  for (const AbilityRatio& r : AbilityRatios(fit, AverageTreatment{})) {
    ratios.push_back({{"treatment", r.numerator},
                      {"ratio", r.estimate},
                      {"se_log", r.se_log},
                      {"ci_lower", r.ci_lower},
                      {"ci_upper", r.ci_upper}});
  }
  j["ratios_vs_average"] = std::move(ratios);
  std::vector<std::string> names;
  for (int k = 0; k < fit.num_treatments(); ++k) {
    if (k != fit.reference) names.push_back("log_ability:" + fit.treatments[k]);
  }
  if (fit.ties_modeled) names.push_back("log_nu");
  j["param_names"] = names;
  j["log_params"] =
      std::vector<double>(fit.log_params.data(),
                          fit.log_params.data() + fit.log_params.size());
  Json cov = Json::array();
  for (int r = 0; r < fit.covariance.rows(); ++r) {
    std::vector<double> row(fit.covariance.cols());
    for (int c = 0; c < fit.covariance.cols(); ++c) row[c] = fit.covariance(r, c);
    cov.push_back(row);
  }
  j["covariance"] = std::move(cov);
  j["loglik"] = fit.loglik;
  j["convergence"] = {{"converged", fit.converged},
                      {"iterations", fit.iterations},
                      {"fallback_iterations", fit.fallback_iterations},
                      {"gradient_max_norm", fit.gradient_max_norm}};
  j["warnings"] = fit.warnings;
  if (tournament != nullptr) {
    Json pairs = Json::array();
    for (const auto& [key, c] : tournament->counts()) {
      pairs.push_back({{"first", tournament->treatments()[key.first]},
                       {"second", tournament->treatments()[key.second]},
                       {"first_wins", c.first_wins},
                       {"second_wins", c.second_wins},
                       {"ties", c.ties}});
    }
    j["tournament"] = {{"records", tournament->TotalRecords()},
                       {"ties", tournament->TotalTies()},
                       {"pairs", std::move(pairs)}};
  }
  return j;
}

void WriteRankingCsv(const AbilityFit& fit, std::ostream& out) {
  const std::vector<NormalizedAbility> normalized = NormalizedAbilities(fit);
  const std::vector<int> ranks = AbilityRanks(fit);
  out << "treatment,psi,se,pi,rank\n";
  for (int k : RankOrder(fit)) {
    out << CsvEscape(fit.treatments[k]) << ',' << FormatSignificant(fit.psi[k])
        << ',' << FormatSignificant(normalized[k].se) << ','
        << FormatSignificant(fit.pi[k]) << ',' << ranks[k] << '\n';
  }
}

std::string RenderAbilityPlot(const AbilityFit& fit, const std::string& title) {
  constexpr int kWidth = 720;
  constexpr int kLabelWidth = 170;
  constexpr int kRightMargin = 30;
  constexpr int kTop = 50;
  constexpr int kRowPitch = 24;
  constexpr int kAxisHeight = 50;
  constexpr int kFontSize = 12;

  const std::vector<NormalizedAbility> normalized = NormalizedAbilities(fit);
  const std::vector<int> order = RankOrder(fit);
  const int rows = static_cast<int>(order.size());
  const int height = kTop + rows * kRowPitch + kAxisHeight;

  double lo = 1.0;
  double hi = 0.0;
  for (const NormalizedAbility& a : normalized) {
    lo = std::min(lo, std::max(a.ci_lower, 1e-12));
    hi = std::max(hi, a.ci_upper);
  }
  hi = std::min(std::max(hi, lo * 10.0), 1e12);
  const double log_lo = std::floor(std::log10(lo));
  const double log_hi = std::ceil(std::log10(hi));
  const double span = std::max(log_hi - log_lo, 1.0);
  const double plot_left = kLabelWidth;
  const double plot_width = kWidth - kLabelWidth - kRightMargin;
  auto x_of = [&](double v) {
    const double clamped = std::clamp(std::log10(std::max(v, 1e-300)), log_lo,
                                      log_lo + span);
    return plot_left + (clamped - log_lo) / span * plot_width;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << kWidth << ' '
      << height << "\" font-family=\"sans-serif\" font-size=\"" << kFontSize
      << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"14\">" << XmlEscape(title) << "</text>\n";

  const int axis_y = kTop + rows * kRowPitch + 6;
  svg << "<g class=\"axis\" stroke=\"#444\">\n"
      << "<line x1=\"" << Fixed(plot_left, 2) << "\" y1=\"" << axis_y
      << "\" x2=\"" << Fixed(plot_left + plot_width, 2) << "\" y2=\"" << axis_y
      << "\"/>\n";
  for (int e = static_cast<int>(log_lo); e <= static_cast<int>(log_lo + span);
       ++e) {
    const double x = x_of(std::pow(10.0, e));
    svg << "<line x1=\"" << Fixed(x, 2) << "\" y1=\"" << kTop - 6 << "\" x2=\""
        << Fixed(x, 2) << "\" y2=\"" << axis_y + 4
        << "\" stroke=\"#ddd\"/>\n";
  }
  svg << "</g>\n<g class=\"ticks\" text-anchor=\"middle\">\n";
  for (int e = static_cast<int>(log_lo); e <= static_cast<int>(log_lo + span);
       ++e) {
    const double x = x_of(std::pow(10.0, e));
    svg << "<text x=\"" << Fixed(x, 2) << "\" y=\"" << axis_y + 18 << "\">"
        << FormatSignificant(std::pow(10.0, e), 3) << "</text>\n";
  }
  svg << "</g>\n<text x=\"" << Fixed(plot_left + plot_width / 2, 2)
      << "\" y=\"" << axis_y + 38
      << "\" text-anchor=\"middle\">normalized ability (log scale)</text>\n";

  svg << "<g class=\"rows\">\n";
  for (int row = 0; row < rows; ++row) {
    const int k = order[row];
    const NormalizedAbility& a = normalized[k];
    const int y = kTop + row * kRowPitch + kRowPitch / 2;
    svg << "<g class=\"row\">"
        << "<text class=\"label\" x=\"" << kLabelWidth - 10 << "\" y=\""
        << y + kFontSize / 3 << "\" text-anchor=\"end\">"
        << XmlEscape(a.treatment) << "</text>"
        << "<line x1=\"" << Fixed(x_of(a.ci_lower), 2) << "\" y1=\"" << y
        << "\" x2=\"" << Fixed(x_of(a.ci_upper), 2) << "\" y2=\"" << y
        << "\" stroke=\"#1f4e79\" stroke-width=\"2\"/>"
        << "<circle cx=\"" << Fixed(x_of(a.pi), 2) << "\" cy=\"" << y
        << "\" r=\"4\" fill=\"#1f4e79\"/>"
        << "</g>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void EmitPlot(const AbilityFit& fit, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError(error_code::kIo, "cannot write " + path.string());
  }
  out << RenderAbilityPlot(fit);
  if (!out) throw DataError(error_code::kIo, "cannot write " + path.string());
}

Json TreeToJson(const PartitionTree& tree) {
  Json j;
  j["covariates"] = tree.covariates;
  j["config"] = {{"alpha", tree.config.alpha},
                 {"min_node_size", tree.config.min_node_size},
                 {"max_depth", tree.config.max_depth},
                 {"permutations", tree.config.permutations},
                 {"seed", tree.config.seed},
                 {"trim", tree.config.trim},
                 {"multiplicity", "bonferroni"}};
  j["n_records"] = tree.records.size();
  j["depth"] = tree.Depth();
  j["n_leaves"] = tree.Leaves().size();
  j["root"] = NodeToJson(*tree.root);
  return j;
}

std::string RenderTreeText(const PartitionTree& tree) {
  std::ostringstream out;
  NodeText(*tree.root, "", "", out);
  return out.str();
}

Json CompareToJson(const CompareReport& report) {
  const bool with_civ = !report.p_scores_civ.empty();
  Json j;
  Json rows = Json::array();
  for (size_t k = 0; k < report.p_scores.size(); ++k) {
    Json row = {{"treatment", report.p_scores[k].first},
                {"p_score", report.p_scores[k].second}};
    if (with_civ) row["p_score_civ"] = report.p_scores_civ[k].second;
    row["p_best"] = report.prob_best.probabilities[k].second;
    rows.push_back(std::move(row));
  }
  j["metrics"] = std::move(rows);
  j["mcid"] = with_civ ? Json(report.mcid) : Json(nullptr);
  j["nsim"] = report.nsim;
  j["seed"] = report.seed;
  j["independence_assumed"] = report.prob_best.independence_assumed;
  return j;
}

void WriteCompareCsv(const CompareReport& report, std::ostream& out) {
  const bool with_civ = !report.p_scores_civ.empty();
  out << (with_civ ? "treatment,p_score,p_score_civ,p_best\n"
                   : "treatment,p_score,p_best\n");
  for (size_t k = 0; k < report.p_scores.size(); ++k) {
    out << CsvEscape(report.p_scores[k].first) << ','
        << FormatSignificant(report.p_scores[k].second) << ',';
    if (with_civ) out << FormatSignificant(report.p_scores_civ[k].second) << ',';
    out << FormatSignificant(report.prob_best.probabilities[k].second) << '\n';
  }
}

}  // namespace tccrank
