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

#include "tccrank/cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tccrank/compare.h"
#include "tccrank/davidson.h"
#include "tccrank/report.h"

namespace tccrank::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const char* const kFormats[] = {"csv", "json", "svg"};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// Best-effort extraction of --out-dir for reporting argument errors.
fs::path ScanOutDir(const std::vector<std::string>& args) {
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out-dir" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--out-dir=", 0) == 0) return args[i].substr(10);
  }
  return {};
}

std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(error_code::kIo, "cannot read " + path.string());
  return in;
}

class ArtifactWriter {
 public:
  ArtifactWriter(const RunConfig& config, std::ostream& log)
      : config_(config), log_(log) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
      throw DataError(error_code::kIo, "cannot create output directory " +
                                           config.out_dir.string());
    }
  }

  bool Wants(const std::string& format) const {
    return config_.formats.count(format) > 0;
  }

  void Write(const std::string& name, const std::string& content) {
    const fs::path path = config_.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw DataError(error_code::kIo, "cannot write " + path.string());
    log_ << "wrote " << path.string() << '\n';
  }

  void WriteJson(const std::string& name, const Json& json) {
    Write(name, json.dump(2) + "\n");
  }

 private:
  const RunConfig& config_;
  std::ostream& log_;
};

CovariateSchema CategoricalSchema(const RunConfig& config) {
  CovariateSchema schema;
  for (const std::string& name : config.categorical) {
    schema[name].kind = CovariateKind::kCategorical;
  }
  return schema;
}

struct LoadedRecords {
  std::vector<std::string> treatments;
  std::vector<PreferenceRecord> records;
  CovariateSchema schema;
  std::optional<RoeConfig> roe;
};

LoadedRecords LoadRecords(const RunConfig& config, std::ostream& log) {
  LoadedRecords loaded;
  std::ifstream in = OpenInput(config.input);
  if (config.input_is_records) {
    RecordTable table = ParseRecordTable(in, CategoricalSchema(config));
    loaded.treatments = std::move(table.treatments);
    loaded.records = std::move(table.records);
    loaded.schema = std::move(table.covariate_schema);
    return loaded;
  }
  if (!config.mcid) {
    throw DataError(error_code::kInvalidConfig,
                    "--mcid is required for contrast input");
  }
  ParseOptions options;
  options.scale = config.scale;
  options.schema = CategoricalSchema(config);
  const Network network = ParseContrastTable(in, options);
  const ValidationReport report = ValidateNetwork(network);
  for (const std::string& t : report.isolated_treatments) {
    log << "warning: treatment " << t << " is not connected to the network\n";
  }
  for (const IncompleteStudy& s : report.incomplete_studies) {
    log << "warning: study " << s.study_id << " has " << s.arms << " arms but "
        << s.contrasts << " of " << s.expected << " contrasts\n";
  }
  for (const std::string& c : report.covariates_with_missing) {
    log << "warning: covariate " << c << " has missing values\n";
  }
  loaded.roe = BuildRoe(*config.mcid, config.roe, config.direction);
  loaded.treatments = network.treatments;
  loaded.records = ApplyTcc(network, *loaded.roe);
  loaded.schema = network.covariate_schema;
  return loaded;
}

std::string RecordCsv(const LoadedRecords& loaded) {
  std::ostringstream out;
  WriteRecordTable(loaded.records, loaded.schema, out);
  return out.str();
}

Json CriterionJson(const RunConfig& config, const LoadedRecords& loaded) {
  if (!loaded.roe) return nullptr;
  return {{"mcid", loaded.roe->mcid},
          {"roe_lower", loaded.roe->roe_lower},
          {"roe_upper", loaded.roe->roe_upper},
          {"direction", std::string(DirectionName(config.direction))}};
}

void RunRank(const RunConfig& config, std::ostream& log) {
  ArtifactWriter writer(config, log);
  const LoadedRecords loaded = LoadRecords(config, log);
  if (config.dump_records) writer.Write("records.csv", RecordCsv(loaded));

  const Tournament tournament =
      AggregateTournament(loaded.records, loaded.treatments);
  FitOptions options;
  options.ci_level = config.ci_level;
  options.parallel = config.parallel;
  const AbilityFit fit = FitDavidson(tournament, options);
  for (const std::string& w : fit.warnings) log << "warning: " << w << '\n';

  if (writer.Wants("csv")) {
    std::ostringstream csv;
    WriteRankingCsv(fit, csv);
    writer.Write("rank.csv", csv.str());
  }
  if (writer.Wants("json")) {
    Json json = FitToJson(fit, &tournament);
    json["criterion"] = CriterionJson(config, loaded);
    writer.WriteJson("fit.json", json);
  }
  if (writer.Wants("svg")) writer.Write("abilities.svg", RenderAbilityPlot(fit));
}

void RunPartition(const RunConfig& config, std::ostream& log) {
  if (config.partition_covariates.empty()) {
    throw DataError(error_code::kInvalidConfig,
                    "--partition requires at least one covariate");
  }
  ArtifactWriter writer(config, log);
  LoadedRecords loaded = LoadRecords(config, log);
  if (config.dump_records) writer.Write("records.csv", RecordCsv(loaded));

  PartitionConfig partition = config.partition;
  partition.seed = config.seed;
  partition.parallel = config.parallel;
  partition.fit.ci_level = config.ci_level;
  partition.fit.parallel = config.parallel;
  const PartitionTree tree =
      GrowTree(std::move(loaded.records), loaded.schema,
               config.partition_covariates, partition);

  if (writer.Wants("json")) {
    Json json = TreeToJson(tree);
    json["criterion"] = CriterionJson(config, loaded);
    writer.WriteJson("tree.json", json);
  }
  writer.Write("tree.txt", RenderTreeText(tree));
  if (writer.Wants("csv")) {
    std::ostringstream csv;
    WriteRankingCsv(tree.root->fit, csv);
    writer.Write("rank.csv", csv.str());
  }
  if (writer.Wants("svg")) {
    writer.Write("abilities.svg", RenderAbilityPlot(tree.root->fit));
  }
}

void RunCompare(const RunConfig& config, std::ostream& log) {
  ArtifactWriter writer(config, log);
  std::ifstream in = OpenInput(config.input);
  LeagueTable table = [&] {
    if (config.league == LeagueForm::kPairwise) {
      if (!config.covariance.empty()) {
        throw DataError(error_code::kInvalidConfig,
                        "--covariance requires --league basic");
      }
      return ParsePairwiseLeagueTable(in, config.direction);
    }
    if (config.covariance.empty()) {
      return ParseBasicLeagueTable(in, config.reference, nullptr,
                                   config.direction);
    }
    std::ifstream cov = OpenInput(config.covariance);
    return ParseBasicLeagueTable(in, config.reference, &cov, config.direction);
  }();

  CompareReport report;
  report.p_scores = PScores(table);
  if (config.mcid) {
    report.mcid = *config.mcid;
    report.p_scores_civ = PScoresCiv(table, *config.mcid);
  }
  ProbBestOptions options;
  options.nsim = config.nsim;
  options.seed = config.seed;
  options.parallel = config.parallel;
  report.prob_best = ProbBest(table, options);
  report.nsim = config.nsim;
  report.seed = config.seed;
  if (report.prob_best.independence_assumed) {
    log << "warning: no covariance supplied; probability of being best "
           "assumes independent estimates\n";
  }

  if (writer.Wants("csv")) {
    std::ostringstream csv;
    WriteCompareCsv(report, csv);
    writer.Write("compare.csv", csv.str());
  }
  if (writer.Wants("json")) {
    Json json = CompareToJson(report);
    json["direction"] = std::string(DirectionName(config.direction));
    writer.WriteJson("compare.json", json);
  }
}

void RunTccDump(const RunConfig& config, std::ostream& log) {
  if (config.input_is_records) {
    throw DataError(error_code::kInvalidConfig,
                    "tcc-dump needs a contrast table, not --records");
  }
  ArtifactWriter writer(config, log);
  writer.Write("records.csv", RecordCsv(LoadRecords(config, log)));
}

void AddCriterionOptions(CLI::App* sub, RunConfig& config,
                         std::optional<double>& mcid, bool records_allowed) {
  sub->add_option("--mcid", mcid,
                  "Minimal clinically important difference (ratio scale, > 1)");
  sub->add_option("--roe-lower", config.roe.lower_ratio,
                  "Lower ROE bound (ratio scale), default 1/mcid");
  sub->add_option("--roe-upper", config.roe.upper_ratio,
                  "Upper ROE bound (ratio scale), default mcid");
  sub->add_option("--scale", config.scale,
                  "Scale of effects and bounds in the contrast table")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, EffectScale>{{"log", EffectScale::kLog},
                                             {"ratio", EffectScale::kRatio}}))
      ->option_text("log|ratio");
  sub->add_option("--categorical", config.categorical,
                  "Covariate columns to treat as categorical")
      ->delimiter(',');
  if (records_allowed) {
    sub->add_flag("--records", config.input_is_records,
                  "Input is a preference-record table");
    sub->add_flag("--dump-records", config.dump_records,
                  "Also write records.csv");
  }
}

void Validate(const RunConfig& config) {
  auto fail = [](const std::string& message) {
    throw DataError(error_code::kInvalidConfig, message);
  };
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
    fail("--ci-level must lie in (0, 1)");
  }
  if (config.mcid) {
    if (!(*config.mcid > 1.0)) fail("--mcid must exceed 1");
    if (config.subcommand != Subcommand::kCompare) {
      BuildRoe(*config.mcid, config.roe, config.direction);
    }
  } else if ((config.roe.lower_ratio || config.roe.upper_ratio)) {
    fail("--roe-lower and --roe-upper require --mcid");
  }
  if (config.subcommand == Subcommand::kPartition) {
    const PartitionConfig& p = config.partition;
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail("--alpha must lie in (0, 1)");
    if (p.min_node_size < 1) fail("--min-node-size must be >= 1");
    if (p.permutations < 1) fail("--permutations must be >= 1");
    if (p.max_depth < 0) fail("--max-depth must be >= 0");
  }
  if (config.nsim < 1) fail("--nsim must be >= 1");
}

}  // namespace

std::optional<RunConfig> ParseArguments(const std::vector<std::string>& args,
                                        std::ostream& out) {
  RunConfig config;
  std::optional<double> mcid;
  std::vector<std::string> formats;
  std::string direction = "beneficial";
  std::string partition_list;

  CLI::App app{"Treatment ranking from study-level relative effects", "tccrank"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--input", config.input, "Input table")->required();
  app.add_option("--out-dir", config.out_dir, "Output directory");
  app.add_option("--format", formats, "Output formats: csv,json,svg")
      ->delimiter(',')
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kFormats),
                                                     std::end(kFormats))));
  app.add_option("--ci-level", config.ci_level, "Confidence level");
  app.add_option("--seed", config.seed, "Random seed");
  app.add_option("--direction", direction, "beneficial or harmful")
      ->check(CLI::IsMember({"beneficial", "harmful"}));
  app.add_flag("!--parallel,--serial", config.parallel,
               "Run kernels on one thread");

  CLI::App* rank = app.add_subcommand("rank", "Fit abilities and rank");
  AddCriterionOptions(rank, config, mcid, true);

  CLI::App* partition =
      app.add_subcommand("partition", "Grow a covariate partition tree");
  AddCriterionOptions(partition, config, mcid, true);
  partition->add_option("--partition", partition_list,
                        "Comma-separated covariates to split on")
      ->required();
  partition->add_option("--alpha", config.partition.alpha,
                        "Significance level for splitting");
  partition->add_option("--min-node-size", config.partition.min_node_size,
                        "Minimum records per child");
  partition->add_option("--permutations", config.partition.permutations,
                        "Permutations for continuous covariates");
  partition->add_option("--max-depth", config.partition.max_depth,
                        "Maximum tree depth");

  CLI::App* compare =
      app.add_subcommand("compare", "Ranking metrics from a league table");
  compare->add_option("--league", config.league, "League table layout")
      ->transform(CLI::CheckedTransformer(std::map<std::string, LeagueForm>{
          {"pairwise", LeagueForm::kPairwise}, {"basic", LeagueForm::kBasic}}))
      ->option_text("pairwise|basic");
  compare->add_option("--covariance", config.covariance,
                      "Covariance of basic estimates (basic form)");
  compare->add_option("--reference", config.reference,
                      "Reference treatment of a basic-form table");
  compare->add_option("--nsim", config.nsim, "Monte Carlo draws");
  compare->add_option("--mcid", mcid,
                      "MCID for threshold-adjusted P-scores (ratio scale)");

  CLI::App* dump =
      app.add_subcommand("tcc-dump", "Apply the criterion and write records");
  AddCriterionOptions(dump, config, mcid, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, out);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw DataError(error_code::kInvalidConfig, e.what());
  }

  if (rank->parsed()) config.subcommand = Subcommand::kRank;
  if (partition->parsed()) config.subcommand = Subcommand::kPartition;
  if (compare->parsed()) config.subcommand = Subcommand::kCompare;
  if (dump->parsed()) config.subcommand = Subcommand::kTccDump;
  config.mcid = mcid;
  config.direction = ParseDirection(direction);
  if (!formats.empty()) config.formats = {formats.begin(), formats.end()};
  config.partition_covariates = SplitList(partition_list);
  Validate(config);
  return config;
}

void Run(const RunConfig& config, std::ostream& log) {
  switch (config.subcommand) {
    case Subcommand::kRank:
      RunRank(config, log);
      break;
    case Subcommand::kPartition:
      RunPartition(config, log);
      break;
    case Subcommand::kCompare:
      RunCompare(config, log);
      break;
    case Subcommand::kTccDump:
      RunTccDump(config, log);
      break;
  }
}

int ExitCodeFor(const Error& error) {
  return dynamic_cast<const ModelError*>(&error) != nullptr ? kExitModelError
                                                            : kExitDataError;
}

Json ErrorReport(const Error& error, int exit_code) {
  Json j;
  j["status"] = "error";
  j["exit_code"] = exit_code;
  if (exit_code == kExitModelError) {
    j["category"] = "model";
  } else if (error.code() == error_code::kInvalidConfig) {
    j["category"] = "config";
  } else {
    j["category"] = "data";
  }
  j["code"] = error.code();
  j["message"] = error.what();
  if (error.code() == error_code::kFordViolation ||
      error.code() == error_code::kOnlyTies) {
    j["ford_condition"] = "violated";
  }
  return j;
}

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  fs::path out_dir = ScanOutDir(args);
  auto report = [&](const Error& error) {
    const int code = ExitCodeFor(error);
    const std::string text = ErrorReport(error, code).dump(2) + "\n";
    err << text;
    if (!out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      std::ofstream file(out_dir / "error.json", std::ios::binary);
      file << text;
    }
    return code;
  };
  try {
    std::optional<RunConfig> config = ParseArguments(args, out);
    if (!config) return kExitOk;
    out_dir = config->out_dir;
    Run(*config, err);
    return kExitOk;
  } catch (const Error& error) {
    return report(error);
  } catch (const std::exception& error) {
    return report(Error("internal_error", error.what()));
  }
}

}  // namespace tccrank::cli
