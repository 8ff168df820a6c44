#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coaldetect/exact_dist.hpp"

namespace coaldetect {

/// Per-gene theta values for one leaf pair.
struct GeneSampleSet {
  std::size_t k = 0;
  std::vector<int> theta;

  /// Throws DomainError unless m >= 1 and every theta lies in [0, k].
  void validate() const;
  std::size_t size() const noexcept { return theta.size(); }
};

enum class Decision { null_model, alternative, undecided };

/// Verdict of a one-sample test against known P0 / Q.
struct TestVerdict {
  Decision decision = Decision::undecided;
  double statistic = 0.0;
  double threshold = 0.0;
};

/// Which of two datasets a two-sample test calls the alternative (the one
/// from the shorter tree). Ties are reported as undecided.
enum class Pick { first, second, undecided };

struct ComparisonVerdict {
  Pick alternative = Pick::undecided;
  double statistic_first = 0.0;
  double statistic_second = 0.0;
  double threshold = 0.0;
  std::optional<std::uint64_t> split_seed;
};

std::string to_string(Decision decision);
std::string to_string(Pick pick);
std::string to_json(const TestVerdict& verdict);
std::string to_json(const ComparisonVerdict& verdict);

/// W = #{j : theta_j / k <= p0}; alternative iff W >= m w + (m/2)(w' - w).
TestVerdict oracle_quantile_test(const GeneSampleSet& samples, double p0, double w, double w_prime);

/// Exact w = P0[theta/k <= p0] and w' = Q[theta/k <= p0] for branch length f.
struct OracleLevels {
  double p0;
  double w;
  double w_prime;
};
OracleLevels oracle_levels(double f, std::size_t k);

/// Smallest sample value v with #{theta_j <= v} >= max(1, ceil(q m)).
int empirical_quantile(const GeneSampleSet& samples, double q);

/// Two-phase comparison: both datasets are split by the same seeded shuffle;
/// the first halves give the (C / sqrt k)-quantiles whose maximum p_hat sets
/// the cut; the dataset whose second half has the larger fraction at or
/// below p_hat is called the alternative.
ComparisonVerdict agnostic_two_sample_test(const GeneSampleSet& first, const GeneSampleSet& second,
                                           double quantile_constant, std::uint64_t split_seed);

/// Smaller sample mean is called the alternative.
ComparisonVerdict mean_test(const GeneSampleSet& first, const GeneSampleSet& second);

/// Smaller sample minimum is called the alternative.
ComparisonVerdict min_test(const GeneSampleSet& first, const GeneSampleSet& second);

}  // namespace coaldetect
