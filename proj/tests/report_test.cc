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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracle.h"
#include "reference_values.h"
#include "simulate.h"
#include "tccrank/errors.h"
#include "tccrank/report.h"

namespace tccrank {
namespace {

// Round robin where the lower index beats the higher twice as often, with
// one upset and one tie per pair so the win graph is strongly connected.
Tournament RoundRobin(const std::vector<std::string>& names) {
  Tournament t(names);
  const int n = t.num_treatments();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      t.Add(a, b, Verdict::kFirstWins, 2);
      t.Add(a, b, Verdict::kSecondWins, 1);
      t.Add(a, b, Verdict::kTie, 1);
    }
  }
  return t;
}

std::vector<std::string> AntidepressantNames() {
  std::vector<std::string> names;
  for (const auto& [name, pi] : kAntidepressantPi) names.emplace_back(name);
  return names;
}

struct Row {
  std::string label;
  int label_y = 0;
  int y = 0;
  double cx = 0.0;
};

std::vector<Row> PlotRows(const std::string& svg) {
  static const std::regex row(
      "<g class=\"row\"><text class=\"label\" x=\"[0-9]+\" y=\"([0-9]+)\""
      "[^>]*>([^<]*)</text><line [^>]*y1=\"([0-9]+)\"[^>]*/><circle "
      "cx=\"([0-9.]+)\"");
  std::vector<Row> rows;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), row);
       it != std::sregex_iterator(); ++it) {
    rows.push_back({(*it)[2], std::stoi((*it)[1]), std::stoi((*it)[3]),
                    std::stod((*it)[4])});
  }
  return rows;
}

TEST_CASE("plot of a two-treatment fit") {
  Tournament t({"A", "B"});
  t.Add(0, 1, Verdict::kFirstWins, 3);
  t.Add(0, 1, Verdict::kSecondWins, 1);
  t.Add(0, 1, Verdict::kTie, 2);
  const std::string svg = RenderAbilityPlot(FitDavidson(t));
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  const std::vector<Row> rows = PlotRows(svg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "A");
  CHECK(rows[1].label == "B");
  CHECK(rows[0].cx > rows[1].cx);
}

TEST_CASE("plot of an 18-treatment fit has no label collisions") {
  const std::vector<std::string> names = AntidepressantNames();
  const AbilityFit fit = FitDavidson(RoundRobin(names));
  const std::vector<Row> rows = PlotRows(RenderAbilityPlot(fit));
  REQUIRE(rows.size() == 18);
  for (size_t r = 0; r < rows.size(); ++r) {
    // Ordered by ability: the round robin favours earlier names.
    CHECK(rows[r].label == names[r]);
    // Labels are 12px text right-aligned at x = 160; a generous 0.65 em
    // per glyph still fits in the margin.
    CHECK(rows[r].label.size() * 12 * 0.65 < 160);
    if (r > 0) {
      CHECK(rows[r].label_y - rows[r - 1].label_y >= 24);
      CHECK(rows[r].cx <= rows[r - 1].cx);
    }
  }
}

TEST_CASE("plot escapes markup in labels") {
  Tournament t({"a<b", "c&d"});
  t.Add(0, 1, Verdict::kFirstWins, 2);
  t.Add(0, 1, Verdict::kSecondWins, 1);
  const std::string svg = RenderAbilityPlot(FitDavidson(t));
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("c&amp;d") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("plot output is byte-identical across calls and files") {
  const AbilityFit fit = FitDavidson(RoundRobin(oracle::Labels(5)));
  CHECK(RenderAbilityPlot(fit) == RenderAbilityPlot(fit));
  const auto dir = std::filesystem::temp_directory_path() / "tccrank_report";
  std::filesystem::create_directories(dir);
  EmitPlot(fit, dir / "a.svg");
  EmitPlot(fit, dir / "b.svg");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK(slurp(dir / "a.svg") == RenderAbilityPlot(fit));
  CHECK_THROWS_AS(EmitPlot(fit, dir / "missing" / "c.svg"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fit JSON") {
  const Tournament t = RoundRobin(oracle::Labels(4));
  const AbilityFit fit = FitDavidson(t);
  const nlohmann::ordered_json j = FitToJson(fit, &t);
  for (const char* key :
       {"model", "treatments", "reference", "ci_level", "nu", "ties_modeled",
        "abilities", "ratios_vs_average", "param_names", "log_params",
        "covariance", "loglik", "convergence", "warnings", "tournament"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["model"] == "davidson");
  CHECK(j["param_names"].size() == 4);
  CHECK(j["param_names"][3] == "log_nu");
  CHECK(j["covariance"].size() == 4);
  CHECK(j["tournament"]["records"] == 24);
  CHECK(j["tournament"]["ties"] == 6);
  CHECK(j["abilities"][0]["rank"] == 1);
  // Full precision survives a text round trip.
  const auto back = nlohmann::ordered_json::parse(j.dump());
  CHECK(back["nu"].get<double>() == fit.nu);
  CHECK(back["loglik"].get<double>() == fit.loglik);
  CHECK_FALSE(FitToJson(fit).contains("tournament"));
}

TEST_CASE("tie-free fits are labelled as such") {
  Tournament t({"A", "B", "C"});
  t.Add(0, 1, Verdict::kFirstWins, 2);
  t.Add(1, 0, Verdict::kFirstWins, 1);
  t.Add(1, 2, Verdict::kFirstWins, 2);
  t.Add(2, 1, Verdict::kFirstWins, 1);
  t.Add(2, 0, Verdict::kFirstWins, 1);
  const nlohmann::ordered_json j = FitToJson(FitDavidson(t));
  CHECK(j["model"] == "bradley_terry");
  CHECK(j["ties_modeled"] == false);
  CHECK(j["param_names"].size() == 2);
}

TEST_CASE("ranking CSV") {
  Tournament t({"A", "B", "C"});
  t.Add(0, 1, Verdict::kFirstWins, 1);
  t.Add(0, 1, Verdict::kSecondWins, 1);
  t.Add(1, 2, Verdict::kFirstWins, 3);
  t.Add(1, 2, Verdict::kSecondWins, 1);
  t.Add(0, 2, Verdict::kFirstWins, 3);
  t.Add(0, 2, Verdict::kSecondWins, 1);
  t.Add(0, 2, Verdict::kTie, 1);
  const AbilityFit fit = FitDavidson(t);
  std::ostringstream out;
  WriteRankingCsv(fit, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "treatment,psi,se,pi,rank");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[2].rfind("C,", 0) == 0);
  CHECK(lines[2].substr(lines[2].size() - 2) == ",3");
  // Six significant digits.
  static const std::regex row(
      "[A-C],([0-9.e-]+),([0-9.e-]+),([0-9.e-]+),[1-3]");
  std::smatch m;
  REQUIRE(std::regex_match(lines[0], m, row));
  const std::string psi = m[1];
  const size_t digits = std::count_if(psi.begin(), psi.end(),
                                      [](char c) { return std::isdigit(c); });
  CHECK(digits <= 7);  // includes the leading zero
  CHECK(std::stod(psi) == doctest::Approx(fit.pi.maxCoeff()).epsilon(1e-5));
}

TEST_CASE("equal abilities share a rank") {
  Tournament t({"A", "B", "C"});
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      t.Add(a, b, Verdict::kFirstWins, 1);
      t.Add(a, b, Verdict::kSecondWins, 1);
      t.Add(a, b, Verdict::kTie, 1);
    }
  }
  const std::vector<int> ranks = AbilityRanks(FitDavidson(t));
  CHECK(ranks == std::vector<int>{1, 1, 1});
}

TEST_CASE("tree JSON and text") {
  std::mt19937_64 rng(5);
  PartitionConfig config;
  config.parallel = false;
  const PartitionTree tree =
      GrowTree(simulate::BinaryRegime(rng, 400, true), simulate::BinarySchema(),
               {"group"}, config);
  const nlohmann::ordered_json j = TreeToJson(tree);
  CHECK(j["n_records"] == 400);
  CHECK(j["depth"] == 1);
  CHECK(j["n_leaves"] == 2);
  CHECK(j["config"]["multiplicity"] == "bonferroni");
  const auto& root = j["root"];
  CHECK(root["id"] == 1);
  CHECK(root["split"]["covariate"] == "group");
  CHECK(root["split"]["kind"] == "categorical");
  CHECK(root["left"]["id"] == 2);
  CHECK(root["right"]["id"] == 3);
  CHECK(root["left"]["split"].is_null());
  CHECK(root["left"]["stop_reason"].is_string());
  CHECK(root["tests"][0]["df"] == 4);  // three abilities and nu, two levels
  const std::string text = RenderTreeText(tree);
  CHECK(text.find("group in {g0}") != std::string::npos);
  CHECK(text.find("group not in {g0}") != std::string::npos);
  CHECK(text == RenderTreeText(tree));
}

TEST_CASE("comparison report with and without a threshold") {
  CompareReport report;
  report.p_scores = {{"A", 0.75}, {"B", 0.25}};
  report.prob_best.probabilities = {{"A", 0.8}, {"B", 0.2}};
  report.prob_best.independence_assumed = true;
  report.nsim = 1000;
  report.seed = 7;
  std::ostringstream plain;
  WriteCompareCsv(report, plain);
  CHECK(plain.str() == "treatment,p_score,p_best\nA,0.75,0.8\nB,0.25,0.2\n");
  nlohmann::ordered_json j = CompareToJson(report);
  CHECK(j["mcid"].is_null());
  CHECK_FALSE(j["metrics"][0].contains("p_score_civ"));

  report.p_scores_civ = {{"A", 0.6}, {"B", 0.1}};
  report.mcid = 1.2;
  std::ostringstream civ;
  WriteCompareCsv(report, civ);
  CHECK(civ.str() ==
        "treatment,p_score,p_score_civ,p_best\nA,0.75,0.6,0.8\nB,0.25,0.1,0.2\n");
  j = CompareToJson(report);
  CHECK(j["mcid"] == 1.2);
  CHECK(j["metrics"][1]["p_score_civ"] == 0.1);
  CHECK(j["independence_assumed"] == true);
}

}  // namespace
}  // namespace tccrank
