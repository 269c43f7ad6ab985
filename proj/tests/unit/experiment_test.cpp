#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "levelstat/experiment.hpp"

using namespace levelstat;

namespace {

const char* kMinimalWegner = R"({
  "experiment": "wegner",
  "graph": {"type": "chain", "n": 1},
  "distribution": {"type": "uniform", "lo": 0, "hi": 1},
  "intervals": [[0.2, 0.5]],
  "n_samples": 100000,
  "seed": 42
})";

std::vector<std::string> errors_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("levelstat_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(ParseConfig, MinimalWegner) {
  const RunConfig c = parse_config(kMinimalWegner);
  EXPECT_EQ(c.experiment, ExperimentKind::kWegner);
  EXPECT_EQ(c.spec.graph.n_sites, 1u);
  EXPECT_EQ(c.spec.n_samples, 100000u);
  EXPECT_EQ(c.spec.seed, 42u);
  EXPECT_DOUBLE_EQ(c.spec.intervals[0].lo, 0.2);
  EXPECT_DOUBLE_EQ(c.spec.confidence_level, 0.99);
}

TEST(ParseConfig, AlphaWithoutSetsNamesTheField) {
  const auto errors = errors_of(R"({"experiment": "wegner", "graph": {"type": "chain", "n": 4},
    "distribution": {"type": "uniform", "lo": 0, "hi": 1}, "intervals": [[0, 1]], "alpha": 0.3, "n_samples": 10})");
  ASSERT_FALSE(errors.empty());
  EXPECT_TRUE(mentions(errors, "sets: missing required field"));
}

TEST(ParseConfig, DuplicatedSite) {
  const auto errors = errors_of(R"({"experiment": "spectral-averaging", "graph": {"type": "chain", "n": 4},
    "distribution": {"type": "uniform", "lo": 0, "hi": 1}, "intervals": [[0, 1], [1, 2]], "sites": [2, 2],
    "n_samples": 10})");
  EXPECT_TRUE(mentions(errors, "sites[1]: duplicate site 2"));
}

TEST(ParseConfig, FieldLevelErrors) {
  EXPECT_TRUE(mentions(errors_of(R"({"experiment": "wigner"})"), "experiment: unknown experiment 'wigner'"));
  EXPECT_TRUE(mentions(errors_of(R"({"experiment": "minami", "graph": {"type": "chain", "n": 4},
    "intervals": [[0, 1]], "n_samples": 10})"), "distribution: missing required field"));
  const auto many = errors_of(R"({"experiment": "profile-event", "graph": {"type": "ring", "n": 4},
    "distribution": {"type": "uniform", "lo": 0, "hi": 1}, "intervals": [[1, 0]], "sets": [[0], [7]],
    "alpha": 2, "n_samples": 0, "colour": 1})");
  EXPECT_TRUE(mentions(many, "graph.type: unknown graph type 'ring'"));
  EXPECT_TRUE(mentions(many, "intervals[0]: lo must be below hi"));
  EXPECT_TRUE(mentions(many, "alpha: must lie in (0, 1]"));
  EXPECT_TRUE(mentions(many, "n_samples: must be >= 1"));
  EXPECT_TRUE(mentions(many, "colour: unknown field"));
  EXPECT_TRUE(mentions(errors_of("{not json"), "(document)"));
  EXPECT_TRUE(mentions(errors_of(R"({"experiment": "spectral-averaging", "graph": {"type": "chain", "n": 4},
    "distribution": {"type": "uniform", "lo": 0, "hi": 1}, "intervals": [[0, 1]], "sites": [5], "n_samples": 10})"),
                       "sites[0]: site 5 outside 0..3"));
}

TEST(ParseConfig, ShippedConfigsAreValid) {
  for (const auto& entry : std::filesystem::directory_iterator(LEVELSTAT_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW((void)load_config(entry.path())) << entry.path();
  }
}

TEST(ConfigHash, StableAndSeedSensitive) {
  RunConfig a = parse_config(kMinimalWegner);
  const RunConfig b = parse_config(kMinimalWegner);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  a.spec.seed = 43;
  EXPECT_NE(config_hash(a), config_hash(b));
  // formatting and key order do not matter
  const RunConfig c = parse_config(R"({"seed": 42, "n_samples": 100000, "intervals": [[0.2, 0.5]],
    "distribution": {"hi": 1, "lo": 0, "type": "uniform"}, "graph": {"n": 1, "type": "chain"}, "experiment": "wegner"})");
  EXPECT_EQ(config_hash(c), config_hash(b));
}

TEST(ResolveSeed, Precedence) {
  EXPECT_EQ(resolve_seed(7, "9", 11), 7u);
  EXPECT_EQ(resolve_seed(std::nullopt, "9", 11), 9u);
  EXPECT_EQ(resolve_seed(std::nullopt, nullptr, 11), 11u);
  EXPECT_EQ(resolve_seed(std::nullopt, "", 11), 11u);
  EXPECT_THROW((void)resolve_seed(std::nullopt, "abc", 11), InvalidInput);
  EXPECT_THROW((void)resolve_seed(std::nullopt, "-3", 11), InvalidInput);
}

TEST(Run, WegnerSaturation) {
  const ResultRecord r = run(parse_config(kMinimalWegner));
  ASSERT_EQ(r.reports.size(), 2u);
  EXPECT_DOUBLE_EQ(r.reports[0].bound, 0.3);
  EXPECT_NEAR(r.reports[0].estimate, 0.3, 3 * r.reports[0].std_error);
  EXPECT_LE(r.reports[0].ci_low, 0.3);
  EXPECT_EQ(exit_code(r), 0);
  EXPECT_EQ(r.seed, 42u);
}

TEST(Run, SimplicityNeverSeesZeroDeterminant) {
  const ResultRecord r = run(load_config(std::filesystem::path(LEVELSTAT_CONFIG_DIR) / "simplicity_chain.json"));
  EXPECT_EQ(r.reports.at(0).estimate, 0.0);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Run, JointIntervalsExitsZeroWhenConjectureFails) {
  const ResultRecord r =
      run(load_config(std::filesystem::path(LEVELSTAT_CONFIG_DIR) / "joint_intervals_two_site.json"));
  ASSERT_TRUE(r.reports.at(0).conjecture_violated.has_value());
  EXPECT_TRUE(*r.reports.at(0).conjecture_violated);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Run, MultiplicityDiagonal) {
  const ResultRecord r = run(load_config(std::filesystem::path(LEVELSTAT_CONFIG_DIR) / "multiplicity_diagonal.json"));
  EXPECT_EQ(r.solutions.size(), 6u);
  for (const auto& s : r.solutions) EXPECT_TRUE(s.agrees);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Run, BoundViolationMapsToExitTwo) {
  ResultRecord r;
  EXPECT_EQ(exit_code(r), 0);
  r.bound_violation = true;
  EXPECT_EQ(exit_code(r), kExitBoundViolation);
  EXPECT_EQ(kExitBoundViolation, 2);
}

TEST(Emit, EstimatorCsvAndByteIdenticalReemit) {
  const auto dir = scratch("emit");
  const ResultRecord r = run(parse_config(kMinimalWegner));
  emit_csv(r, dir / "a.csv");
  emit_csv(r, dir / "b.csv");
  emit_json(r, dir / "a.json");
  emit_json(r, dir / "b.json");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  std::istringstream lines(slurp(dir / "a.csv"));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "experiment,quantity,n_samples,seed,estimate,std_error,ci_low,ci_high,bound,bound_satisfied,n_degenerate");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Emit, DensityGridRowsAndThreadIndependence) {
  auto cfg = parse_config(R"({"experiment": "two-by-two", "distribution": {"type": "uniform", "lo": -1, "hi": 1},
    "two_by_two": {"c": 0.5, "bins": [12, 10], "widths": [0.1], "eps": [0.1, 0.01]}, "n_samples": 20000, "seed": 3})");
  const auto dir = scratch("grid");
  const ResultRecord one = run(cfg, {1});
  const ResultRecord many = run(cfg, {8});
  const auto a = emit_all(one, dir / "one", "g");
  const auto b = emit_all(many, dir / "many", "g");
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(slurp(a[0]), slurp(b[0]));
  EXPECT_EQ(slurp(a[2]), slurp(b[2]));
  EXPECT_EQ(slurp(a[3]), slurp(b[3]));
  std::istringstream lines(slurp(a[0]));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "e1_low,e1_high,e2_low,e2_high,analytic_mass,mc_count");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 120);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.3), "0.29999999999999999");
}
