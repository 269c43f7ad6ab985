#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levelstat/algebraic.hpp"
#include "levelstat/error.hpp"
#include "levelstat/statistics.hpp"
#include "levelstat/two_by_two.hpp"

namespace levelstat {

enum class ExperimentKind {
  kWegner,
  kMinami,
  kNLevel,
  kJointIntervals,
  kSpectralAveraging,
  kProfileEvent,
  kTwoByTwo,
  kMultiplicity,
  kSimplicity,
};

[[nodiscard]] std::string_view experiment_name(ExperimentKind kind);
[[nodiscard]] std::optional<ExperimentKind> experiment_from_name(std::string_view name);
[[nodiscard]] const std::vector<ExperimentKind>& all_experiments();

struct TwoByTwoParams {
  TwoByTwoModel model;
  std::size_t bins_upper = 100;
  std::size_t bins_lower = 100;
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> widths{1e-1, 1e-2, 1e-3};
  IntervalPairPlacement placement;
};

struct MultiplicityParams {
  std::vector<std::size_t> free_sites;
  std::vector<double> frozen_potential;
  std::vector<double> targets;
  std::vector<double> onsite;
  SearchOptions search;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::kWegner;
  ExperimentSpec spec;
  std::size_t level = 2;  ///< n for the n-level experiment
  TwoByTwoParams two_by_two;
  MultiplicityParams multiplicity;
  std::filesystem::path output_dir = ".";
  std::string output_stem;  ///< empty = experiment name
};

/// All field-level problems found while parsing, each prefixed by its path.
class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses a JSON run configuration (schema in docs/config.md).
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the parsed configuration: keys sorted, defaults filled.
[[nodiscard]] std::string canonical_config(const RunConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& config);

/// Seed precedence: flag, then the LEVELSTAT_SEED value, then the config.
[[nodiscard]] std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value,
                                         std::uint64_t config_seed);

struct SolutionRow {
  Eigen::VectorXd potential;
  double jacobian_det = 0.0;
  double factored = 0.0;
  double relative_error = 0.0;
  bool agrees = false;
};

struct ResultRecord {
  std::string experiment;
  std::string config_hash;
  std::string canonical_config;
  std::string timestamp;
  std::string version;
  std::uint64_t seed = 0;

  std::vector<EstimatorReport> reports;
  std::vector<std::pair<std::string, double>> metrics;
  std::optional<DensityGrid> grid;
  std::optional<ScalingProbe> scaling;
  std::vector<BoundRow> bound_rows;
  std::vector<std::size_t> free_sites;
  std::vector<SolutionRow> solutions;

  /// A checked inequality or invariant failed.
  bool bound_violation = false;
};

struct RunOptions {
  unsigned threads = 0;
};

[[nodiscard]] ResultRecord run(const RunConfig& config, const RunOptions& opts = {});

/// 0 ok, 2 when the record carries a bound violation.
[[nodiscard]] int exit_code(const ResultRecord& record);
inline constexpr int kExitError = 1;
inline constexpr int kExitBoundViolation = 2;

/// Writes the experiment's primary table.
void emit_csv(const ResultRecord& record, const std::filesystem::path& path);
void emit_json(const ResultRecord& record, const std::filesystem::path& path);
/// Primary CSV, JSON and any secondary tables (scaling, bounds) under `dir`,
/// named after `stem`. Returns the written paths.
std::vector<std::filesystem::path> emit_all(const ResultRecord& record, const std::filesystem::path& dir,
                                            const std::string& stem);

/// printf("%.17g"), with "inf"/"-inf"/"nan" spelled out.
[[nodiscard]] std::string format_double(double value);

}  // namespace levelstat
