#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coaldetect/detection.hpp"

namespace coaldetect {

enum class TestKind { oracle_quantile, agnostic, mean, min, triplet };

std::string to_string(TestKind kind);
TestKind parse_test_kind(const std::string& name);

/// How m is derived for a grid cell.
enum class SizeRule {
  mu,          // m = ceil(f^(-1-mu))
  multiplier,  // m = ceil(c / (f^2 sqrt k))
};

/// One point of the experiment grid.
struct SweepCell {
  TestKind test = TestKind::oracle_quantile;
  double f = 0.0;
  double kappa = 0.0;
  std::size_t k = 0;
  double mu_or_c = 0.0;
  std::size_t m = 0;  // genes per dataset
  double quantile_constant = 1.0;

  void validate() const;
};

/// m = ceil(c / (f^2 sqrt k)), at least 1.
std::size_t genes_for_multiplier(double f, std::size_t k, double c);

/// kappa with ceil(f^(-2+2 kappa)) == k, for grids given in k directly.
double kappa_for_sites(double f, std::size_t k);

struct SweepConfig {
  std::vector<TestKind> tests;
  std::vector<double> f_grid;
  std::vector<double> kappa_grid;  // either kappa_grid or k_grid
  std::vector<std::size_t> k_grid;
  SizeRule size_rule = SizeRule::multiplier;
  std::vector<double> size_grid;  // mu values or c multipliers
  std::size_t replicates = 0;
  std::uint64_t master_seed = 0;
  double quantile_constant = 1.0;
  std::filesystem::path output;
  bool record_time = false;
  std::size_t threads = 0;

  /// Parses a JSON config document and validates it.
  static SweepConfig from_json(std::string_view text);

  /// Throws DomainError naming the first violated constraint.
  void validate() const;

  /// Cells in test-major, then f, kappa/k, size order.
  std::vector<SweepCell> cells() const;
};

struct SweepRecord {
  SweepCell cell;
  std::size_t replicates = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> seconds;
  std::string error;  // empty when every replicate ran
};

struct WilsonInterval {
  double lo;
  double hi;
};
/// 95% Wilson score interval.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials);

/// Per-cell values shared by all replicates (exact oracle levels).
struct TrialContext {
  SweepCell cell;
  std::optional<OracleLevels> levels;
};
TrialContext prepare_trial(const SweepCell& cell);

/// One simulate-then-test evaluation; undecided counts as failure.
bool run_trial(const TrialContext& context, std::uint64_t seed);
bool run_trial(const SweepCell& cell, std::uint64_t seed);

/// Empirical success count of `replicates` trials with seeds
/// derive_seed(seed, {r}).
std::size_t count_successes(const TrialContext& context, std::size_t replicates, std::uint64_t seed,
                            std::size_t threads);

struct SweepResult {
  std::vector<SweepRecord> records;
  bool partial = false;
};

/// Runs every cell; records are independent of thread count. Writes the CSV
/// when config.output is set.
SweepResult run_sweep(const SweepConfig& config);

extern const char* const kSweepCsvHeader;
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
/// Writes to a sibling temporary and renames over the target.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

struct CalibrationOptions {
  TestKind test = TestKind::oracle_quantile;
  double quantile_constant = 1.0;
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  double c_start = 1.0;          // first multiplier tried when bracketing c'
  std::size_t max_doublings = 16;
  std::size_t bisection_steps = 12;  // upper limit
  double relative_tolerance = 0.02;   // stop once hi / lo <= 1 + tolerance
};

struct PowerPoint {
  double c;
  std::size_t m;
  std::size_t successes;
  std::size_t replicates;
};

struct Calibration {
  double f;
  double kappa;
  std::size_t k;
  double target;
  // Indistinguishable side, from exact computation.
  double c;
  std::size_t m_c;
  double h2_single;
  double tv_upper;
  // Distinguishable side, from simulation.
  double c_prime;
  std::size_t m_c_prime;
  double power_at_c_prime;
  std::vector<PowerPoint> evidence;
};

/// Largest m whose exact TV upper bound stays <= 1 - target; c = m f^2 sqrt k.
/// Throws BracketFailure when even m = 1 is too many.
void calibrate_indistinguishable(Calibration& out);

/// Smallest multiplier (up to bisection resolution) whose empirical power
/// reaches the target. Replicate seeds are shared across multipliers.
/// Throws BracketFailure when doubling never reaches the target.
PowerPoint find_power_crossing(const SweepCell& base, double target, const CalibrationOptions& options,
                               std::vector<PowerPoint>* evidence = nullptr);

/// Both constants for m = ceil(c / (f^2 sqrt k)) at k = ceil(f^(-2+2 kappa)).
/// Requires f sqrt k < 1; otherwise the scaling regime does not apply and
/// BracketFailure is thrown.
Calibration calibrate_constants(double f, double kappa, double target, const CalibrationOptions& options);

std::string to_json(const Calibration& calibration);

}  // namespace coaldetect
