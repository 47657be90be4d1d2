#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srlt/grid_affine.hpp"
#include "srlt/group.hpp"
#include "srlt/harness.hpp"
#include "srlt/spectral.hpp"
#include "srlt/weighted_support.hpp"

namespace srlt {

enum class Theorem { t1, t2, t3, twisted, checks, spectral };
std::string_view to_string(Theorem t);

/// How v^n(e) is produced for the log-fit: operator iteration, or the word-length chain
/// (lazy simple random walk on F_k only).
enum class ReturnSource { convolution, radial };

struct ScenarioConfig {
  std::string id;
  Theorem theorem = Theorem::t1;
  /// "yes" | "no" | "exploratory".
  std::string condition_b = "yes";
  std::optional<GroupSpace> space;
  WeightedSupport law{Role::measure};
  AffineLaw affine_law;
  /// Set when the law came from the lazy simple random walk generator.
  std::optional<double> lazy_simple;

  WeightedSupport f{Role::function};
  WeightedSupport g{Role::function};
  WeightedSupport kappa{Role::measure};
  WeightedSupport mu{Role::measure};
  /// Measure used on both sides of the shifted integrated ratio; kappa / mu when empty.
  WeightedSupport shift_measure{Role::measure};
  Element x;
  Element y;
  std::size_t n_max = 100;
  std::vector<std::size_t> m{1};
  double epsilon = 1e-2;
  EpsilonMode mode = EpsilonMode::relative;
  double tolerance = 1e-3;
  /// Per-series overrides of `tolerance`, keyed by series id.
  std::map<std::string, double> series_tolerance;
  std::size_t judge_from = 1;
  std::optional<double> max_density;

  /// Spectral-only scenarios: expected R, checked against `tolerance`.
  std::optional<double> expected_R;
  IndexRange logfit_window{10, 100};
  ReturnSource returns = ReturnSource::convolution;

  // checks
  WeightedSupport condition_f{Role::function};
  std::size_t j_max = 10;
  std::size_t m_max = 10;
  std::vector<Element> nu_window;
  std::size_t similarity_n = 20;
  /// Expected (power, coefficient) of the witnesses, checked to 1e-4 when given.
  std::optional<std::pair<std::size_t, double>> expected_condition_A;
  std::optional<std::pair<std::size_t, double>> expected_domination;

  // affine-grid modular run
  ModularRatioOptions modular;
};

/// Parses and validates a scenario. Throws ConfigError with a message naming the bad field.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct ScenarioReport {
  std::string id;
  std::vector<RatioSeries> series;
  nlohmann::ordered_json summary;
  Verdict verdict = Verdict::not_judged;
  /// Set when the run is invalid (truncation above bound); the CLI maps it to exit 2.
  std::optional<std::string> invalid;
};

/// Spectral estimate for the scenario's walk: Laplace minimization where an exponential
/// parameter space exists, log-fit of v^n(e) over the configured window.
nlohmann::ordered_json estimate_r(const ScenarioConfig& cfg);

ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// Writes one CSV per series and summary.json under dir / id. Output is byte-identical for
/// identical configs.
void write_report(const ScenarioReport& report, const std::filesystem::path& dir);

/// Renders a series as CSV: n, ratio, target, abs_err, rel_err, exceptional_flag, density_to_n.
std::string series_csv(const RatioSeries& s);

/// Output root: $SRLT_OUTPUT_DIR if set, otherwise ./srlt-out.
std::filesystem::path default_output_dir();

/// Exceptional-set density of a series CSV read back from disk, recomputed at a new epsilon
/// over n <= limit.
struct CsvDensity {
  std::size_t limit = 0;
  std::size_t exceptional = 0;
  double density = 0.0;
};
CsvDensity density_from_csv(const std::filesystem::path& csv, std::size_t limit, double eps, EpsilonMode mode);

}  // namespace srlt
