#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "magpl/magpl.hpp"

using namespace magpl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string certify_json(const std::string& problem, const std::string& tau = "3.0") {
  return R"({"schema_version": 1, "experiment": "certify", "problem": )" + problem +
         R"(, "potentials": {"kernel": "flat_core", "tau": )" + tau + R"(}, "certify": {"epsilons": [0.1, 0.05, 0.02]}})";
}

std::string rejection(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("magpl_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(ParseConfig, AcceptsValidExponents) {
  const RunConfig c = parse_config_text(certify_json(R"({"p": 2, "N_math": 4, "q": 3, "k": 3.5, "theta": 3})"));
  EXPECT_EQ(c.experiment, Experiment::certify);
  EXPECT_DOUBLE_EQ(c.problem.p_star(), 4.0);
  EXPECT_DOUBLE_EQ(c.problem.q, 3.0);
}

TEST(ParseConfig, QAtPViolatesF3) {
  const std::string msg = rejection(certify_json(R"({"p": 2, "N_math": 4, "q": 2, "k": 3.5, "theta": 3})"));
  EXPECT_NE(msg.find("q must lie in (p,k): hypothesis (f_3)"), std::string::npos) << msg;
}

TEST(ParseConfig, TauBelowWindowViolatesK) {
  // N = 5 > p^2 = 4, tau = p/2
  const std::string msg = rejection(certify_json(R"({"p": 2, "N_math": 5, "q": 3, "k": 3.2, "theta": 3})", "1.0"));
  EXPECT_NE(msg.find("hypothesis (K)"), std::string::npos) << msg;
}

TEST(ParseConfig, EveryExponentViolationIsNamed) {
  const std::string msg = rejection(certify_json(R"({"p": 2, "N_math": 4, "q": 3.8, "k": 4.5, "theta": 5, "lambda": -1})"));
  EXPECT_NE(msg.find("(f_1)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("(f_2)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("(f_3)"), std::string::npos) << msg;
  const std::string v = rejection(
      R"({"experiment": "geometry", "potentials": {"V0": -1}, "grid": {"points": 40}})");
  EXPECT_NE(v.find("hypothesis (V)"), std::string::npos) << v;
}

TEST(ParseConfig, RejectsUnknownKeysAndBadEnums) {
  const std::string msg = rejection(R"({"experiment": "solve", "sovle": {}})");
  EXPECT_NE(msg.find("sovle"), std::string::npos) << msg;
  EXPECT_NE(rejection(R"({"experiment": "solve", "problem": {"P": 2}})").find("P"), std::string::npos);
  EXPECT_FALSE(rejection(R"({"experiment": "plot"})").empty());
  EXPECT_FALSE(rejection(R"({"experiment": "solve", "potentials": {"magnetic": "weird"}})").empty());
  EXPECT_THROW(experiment_from_name("plot"), std::invalid_argument);
}

TEST(ParseConfig, MalformedFileReportsLocation) {
  try {
    parse_config(MAGPL_TEST_DATA "/malformed.json");
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("malformed.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_config(MAGPL_TEST_DATA "/missing.json"), std::runtime_error);
}

TEST(ParseConfig, RoundTripsReferenceConfigs) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(MAGPL_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const RunConfig c = parse_config(entry.path().string());
    const std::string text = write_config(c);
    const RunConfig back = parse_config_text(text);
    EXPECT_EQ(back, c) << entry.path();
    EXPECT_EQ(write_config(back), text) << entry.path();
  }
  EXPECT_EQ(seen, 5);
}

TEST(ParseConfig, RoundTripsDefaultsOfEveryExperiment) {
  for (Experiment e : {Experiment::ineq_sweep, Experiment::instanton_rates, Experiment::certify, Experiment::solve,
                       Experiment::geometry}) {
    RunConfig c;
    c.experiment = e;
    c.seed = 0xfeedbeefULL;
    c.potentials.A0 = {0.1, 1.0 / 3.0, -2e-7};
    EXPECT_EQ(parse_config_text(write_config(c)), c) << experiment_name(e);
  }
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  const Table t{{"epsilon", "ray_max"}, {}};
  EXPECT_EQ(to_csv(t), "# schema_version: 1\nepsilon,ray_max\n");
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  Table t{{"x"}, {}};
  t.add({0.1});
  t.add({1.0 / 3.0});
  const std::string s = to_csv(t);
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(t.add({1.0, 2.0}), std::logic_error);
}

TEST(PlotData, EmptySweepGivesHeaderOnlyCsv) {
  RunRecord rec;
  rec.config.experiment = Experiment::certify;
  rec.tables["certify"] = Table{{"epsilon", "ray_max", "c_P", "margin", "t_star"}, {}};
  const auto plots = plot_tables(rec);
  ASSERT_EQ(plots.count("plot_certify"), 1u);
  EXPECT_EQ(to_csv(plots.at("plot_certify")), "# schema_version: 1\nepsilon,ray_max,c_P,margin\n");

  const fs::path dir = scratch_dir("plot");
  rec.run_dir = dir.string();
  const auto paths = emit_plot_data(rec);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(slurp(paths[0]), "# schema_version: 1\nepsilon,ray_max,c_P,margin\n");
  fs::remove_all(dir);
}

TEST(PlotData, MissingTableIsReported) {
  RunRecord rec;
  rec.config.experiment = Experiment::solve;
  EXPECT_THROW(plot_tables(rec), std::runtime_error);
  rec.checks.push_back({"geometry", false, ""});
  EXPECT_TRUE(plot_tables(rec).empty());
}

TEST(OutputRoot, Precedence) {
  RunConfig c;
  c.output_dir = "from_config";
  ::unsetenv("MAGPL_OUT");
  EXPECT_EQ(resolve_output_root(std::nullopt, c), fs::path("from_config"));
  ::setenv("MAGPL_OUT", "from_env", 1);
  EXPECT_EQ(resolve_output_root(std::nullopt, c), fs::path("from_env"));
  EXPECT_EQ(resolve_output_root(std::string("from_flag"), c), fs::path("from_flag"));
  ::unsetenv("MAGPL_OUT");
}

TEST(Run, DeterministicAndSelfDescribing) {
  RunConfig c;
  c.experiment = Experiment::ineq_sweep;
  c.seed = 99;
  c.ineq_sweep.trials = 2000;
  const fs::path a = scratch_dir("run_a"), b = scratch_dir("run_b");
  const RunRecord ra = run(c, a);
  const RunRecord rb = run(c, b);
  EXPECT_TRUE(ra.passed());
  const fs::path da = a / "ineq-sweep", db = b / "ineq-sweep";
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(da)) {
    const std::string name = entry.path().filename().string();
    EXPECT_EQ(entry.path().extension() == ".tmp", false) << name;
    const std::string text = slurp(entry.path());
    EXPECT_NE(text.find("schema_version"), std::string::npos) << name;
    if (name == "record.json") continue;  // timestamps
    EXPECT_EQ(text, slurp(db / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 4);
  EXPECT_EQ(parse_config(da / "config.json"), c);
  const auto summary = nlohmann::json::parse(slurp(da / "summary.json"));
  EXPECT_EQ(summary["schema_version"], kSchemaVersion);
  EXPECT_EQ(summary["metrics"]["simon_failures"], 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, CertifySummaryHasThresholdFields) {
  RunConfig c = parse_config(MAGPL_CONFIG_DIR "/certify.json");
  c.certify.epsilons = {0.1, 0.05};
  c.certify.points_per_epsilon = 64;
  c.certify.pure_critical_check = false;
  const fs::path dir = scratch_dir("certify");
  run(c, dir);
  const auto summary = nlohmann::json::parse(slurp(dir / "certify" / "summary.json"));
  for (const char* key : {"c_P", "c_A_est", "margin"}) EXPECT_TRUE(summary["metrics"].contains(key)) << key;
  fs::remove_all(dir);
}

TEST(Run, RatesRowCarriesPredictedExponent) {
  RunConfig c;
  c.experiment = Experiment::instanton_rates;
  c.instanton_rates.pairs = {{2.0, 5.0}};
  const fs::path dir = scratch_dir("rates");
  run(c, dir);
  std::istringstream csv(slurp(dir / "instanton-rates" / "rate_fits.csv"));
  std::string line;
  bool found = false;
  while (std::getline(csv, line))
    if (line.rfind("2,5,2,", 0) == 0) {
      found = true;
      std::stringstream ss(line);
      std::string cell;
      for (int i = 0; i < 5; ++i) std::getline(ss, cell, ',');
      EXPECT_DOUBLE_EQ(std::stod(cell), 2.0);  // q = p, N > p^2 predicts eps^p
    }
  EXPECT_TRUE(found);
  fs::remove_all(dir);
}
