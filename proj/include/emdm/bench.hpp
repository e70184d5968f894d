#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emdm/catalog.hpp"
#include "emdm/dialog.hpp"
#include "emdm/kvconfig.hpp"
#include "emdm/strategy.hpp"
#include "emdm/usersim.hpp"

namespace emdm {

struct CatalogSource {
  std::optional<std::filesystem::path> path;  // file catalog; otherwise synthetic
  SyntheticSpec synthetic = song_catalog_spec(10000);
  std::uint64_t synthetic_seed = 7;
  /// Attribute reordering applied after loading: "" (none), "ascending-distinct",
  /// "descending-distinct", or a comma list of attribute names.
  std::string order;
};

struct EvaluationPlan {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::size_t samples = 0;
};

struct ExperimentConfig {
  CatalogSource catalog;
  PriorSpec prior = UniformPrior{};
  std::vector<StrategyKind> strategies = {StrategyKind::sequential(), StrategyKind::random(1), StrategyKind::dsdm(),
                                          StrategyKind::emdm()};
  Mode mode = Mode::Ideal;
  NoiseModel noise;
  EvaluationPlan plan;
  std::uint64_t seed = 1;
  int random_repeats = 3;
  double theta = 0.8;
  MissingPolicy policy = MissingPolicy::Wildcard;
  int max_turns = 0;
  unsigned threads = 0;  // 0 = hardware concurrency; never affects results

  void validate() const;
};

/// Reads a synthetic spec from `<prefix>goals`, `<prefix>cardinalities`,
/// `<prefix>missing_rates`, `<prefix>skew`, `<prefix>names`; `<prefix>preset = song`
/// starts from the twelve-attribute song layout.
SyntheticSpec parse_synthetic_spec(const KeyValueConfig& cfg, std::string_view prefix);

/// Throws ConfigError on unknown keys or bad values.
ExperimentConfig parse_experiment_config(const KeyValueConfig& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Loads or generates the catalog, applies the prior and attribute order.
Catalog build_catalog(const ExperimentConfig& cfg);
std::string describe(const CatalogSource& source);

struct StrategyReport {
  std::string name;
  std::size_t dialogs = 0;
  double mean_turns = 0.0;
  double success_rate = 0.0;
  std::vector<std::size_t> turn_histogram;   // index = number of turns
  std::vector<std::size_t> question_counts;  // per attribute id
  std::map<std::string, std::size_t> status_counts;
  /// Per plan entry, averaged over repetitions.
  std::vector<double> plan_turns;
  std::vector<double> plan_success;
  /// Dialogs whose state-entropy sequence rose by more than kNormTolerance at some turn.
  std::size_t entropy_increases = 0;
  double max_entropy_increase = 0.0;
  /// Dialogs whose candidate subset grew at some turn.
  std::size_t support_increases = 0;
  std::size_t aborted = 0;
};

struct PairwiseComparison {
  double less = 0.0;     // fraction of plan entries where a used fewer turns than b
  double equal = 0.0;
  double greater = 0.0;
  std::size_t count = 0;
};

struct BenchReport {
  std::string catalog;
  std::string mode;
  std::string prior;
  std::string plan;
  std::uint64_t seed = 0;
  std::vector<std::string> attributes;
  std::vector<GoalId> plan_goals;
  std::vector<StrategyReport> strategies;

  /// Throws std::out_of_range for an unknown strategy name.
  const StrategyReport& strategy(std::string_view name) const;
};

BenchReport run_experiment(const ExperimentConfig& cfg);
/// Runs against an already built catalog (prior and order applied).
BenchReport run_experiment(const ExperimentConfig& cfg, const Catalog& catalog);

/// Per plan entry turn comparison of strategies `a` and `b`.
PairwiseComparison compare_pairwise(const BenchReport& report, std::string_view a, std::string_view b);
/// Same, across two reports; their plan goal lists must match.
PairwiseComparison compare_pairwise(const BenchReport& ra, std::string_view a, const BenchReport& rb,
                                    std::string_view b);

std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(std::string_view text);
void save_report(const BenchReport& report, const std::filesystem::path& path);
BenchReport load_report(const std::filesystem::path& path);

enum class ReportFormat { Table, Delimited, PlotData };
ReportFormat parse_report_format(std::string_view text);

/// Human-readable summary: one row per strategy.
std::string format_table(const BenchReport& report);

/// Writes the report in `format` under `out_dir` and returns the files
/// written. Throws std::runtime_error when the directory is unwritable and
/// std::invalid_argument for an empty report.
std::vector<std::filesystem::path> emit_report(const BenchReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

}  // namespace emdm
