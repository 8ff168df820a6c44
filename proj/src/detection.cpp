#include "coaldetect/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "coaldetect/rng.hpp"

namespace coaldetect {

namespace {

void require_same_k(const GeneSampleSet& a, const GeneSampleSet& b) {
  if (a.k != b.k) throw DomainError("two-sample test: datasets have different k");
}

Pick pick_smaller(double first, double second) {
  if (first < second) return Pick::first;
  if (second < first) return Pick::second;
  return Pick::undecided;
}

std::size_t count_at_most(const std::vector<int>& values, int cut) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [cut](int v) { return v <= cut; }));
}

}  // namespace

void GeneSampleSet::validate() const {
  if (theta.empty()) throw DomainError("gene samples: need at least one gene");
  for (const int value : theta) {
    if (value < 0 || static_cast<std::size_t>(value) > k) throw DomainError("gene samples: theta outside [0, k]");
  }
}

std::string to_string(Decision decision) {
  switch (decision) {
    case Decision::null_model: return "null";
    case Decision::alternative: return "alternative";
    case Decision::undecided: return "undecided";
  }
  return "undecided";
}

std::string to_string(Pick pick) {
  switch (pick) {
    case Pick::first: return "first";
    case Pick::second: return "second";
    case Pick::undecided: return "undecided";
  }
  return "undecided";
}

std::string to_json(const TestVerdict& verdict) {
  nlohmann::json out{{"decision", to_string(verdict.decision)},
                     {"statistic", verdict.statistic},
                     {"threshold", verdict.threshold},
                     {"split_seed", nullptr}};
  return out.dump();
}

std::string to_json(const ComparisonVerdict& verdict) {
  nlohmann::json out{{"decision", to_string(verdict.alternative)},
                     {"statistic", verdict.statistic_first - verdict.statistic_second},
                     {"statistic_first", verdict.statistic_first},
                     {"statistic_second", verdict.statistic_second},
                     {"threshold", verdict.threshold}};
  out["split_seed"] = verdict.split_seed ? nlohmann::json(*verdict.split_seed) : nlohmann::json(nullptr);
  return out.dump();
}

TestVerdict oracle_quantile_test(const GeneSampleSet& samples, double p0, double w, double w_prime) {
  samples.validate();
  if (samples.k == 0) throw DomainError("oracle_quantile_test: k must be positive");
  if (!(w < w_prime)) throw DomainError("oracle_quantile_test: need w < w'");
  const double m = static_cast<double>(samples.size());
  const double kd = static_cast<double>(samples.k);
  std::size_t count = 0;
  for (const int value : samples.theta) {
    if (static_cast<double>(value) / kd <= p0) ++count;
  }
  TestVerdict verdict;
  verdict.statistic = static_cast<double>(count);
  verdict.threshold = m * w + 0.5 * m * (w_prime - w);
  verdict.decision = verdict.statistic >= verdict.threshold ? Decision::alternative : Decision::null_model;
  return verdict;
}

OracleLevels oracle_levels(double f, std::size_t k) {
  if (k == 0) throw DomainError("oracle_levels: k must be positive");
  const auto mixture = mixture_decompose(f);
  const double p0 = mixture.null_density.support().first;
  const auto cut = static_cast<std::size_t>(std::floor(p0 * static_cast<double>(k)));
  const double w = pmf_theta(k, mixture.null_density).cdf(cut);
  const double w_prime = pmf_theta(k, mixture.alternative).cdf(cut);
  return {p0, w, w_prime};
}

int empirical_quantile(const GeneSampleSet& samples, double q) {
  if (samples.theta.empty()) throw DomainError("empirical_quantile: empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("empirical_quantile: q must lie in (0, 1]");
  const std::size_t m = samples.size();
  const std::size_t rank = std::clamp<std::size_t>(ceil_count(q * static_cast<double>(m)), 1, m);
  std::vector<int> sorted = samples.theta;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

ComparisonVerdict agnostic_two_sample_test(const GeneSampleSet& first, const GeneSampleSet& second,
                                           double quantile_constant, std::uint64_t split_seed) {
  require_same_k(first, second);
  first.validate();
  second.validate();
  if (first.size() < 2 || second.size() < 2) throw DomainError("agnostic test: each dataset needs at least 2 genes");
  if (!(quantile_constant > 0.0)) throw DomainError("agnostic test: quantile constant must be positive");
  const double level = std::min(1.0, quantile_constant / std::sqrt(static_cast<double>(std::max<std::size_t>(first.k, 1))));

  // The permutation depends only on (seed, size), so swapping the datasets
  // swaps the halves exactly.
  auto halves = [split_seed](const GeneSampleSet& data) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(split_seed, {data.size()}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    const std::size_t half = data.size() / 2;
    GeneSampleSet training{data.k, {}};
    std::vector<int> held_out;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < half ? training.theta : held_out).push_back(data.theta[order[i]]);
    }
    return std::pair{training, held_out};
  };
  const auto [train1, test1] = halves(first);
  const auto [train2, test2] = halves(second);

  const int cut = std::max(empirical_quantile(train1, level), empirical_quantile(train2, level));
  ComparisonVerdict verdict;
  verdict.threshold = cut;
  verdict.split_seed = split_seed;
  verdict.statistic_first = static_cast<double>(count_at_most(test1, cut)) / static_cast<double>(test1.size());
  verdict.statistic_second = static_cast<double>(count_at_most(test2, cut)) / static_cast<double>(test2.size());
  // The larger fraction below the cut marks the shorter tree.
  if (verdict.statistic_first > verdict.statistic_second) {
    verdict.alternative = Pick::first;
  } else if (verdict.statistic_second > verdict.statistic_first) {
    verdict.alternative = Pick::second;
  }
  return verdict;
}

ComparisonVerdict mean_test(const GeneSampleSet& first, const GeneSampleSet& second) {
  require_same_k(first, second);
  first.validate();
  second.validate();
  auto mean = [](const std::vector<int>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  ComparisonVerdict verdict;
  verdict.statistic_first = mean(first.theta);
  verdict.statistic_second = mean(second.theta);
  verdict.alternative = pick_smaller(verdict.statistic_first, verdict.statistic_second);
  return verdict;
}

ComparisonVerdict min_test(const GeneSampleSet& first, const GeneSampleSet& second) {
  require_same_k(first, second);
  first.validate();
  second.validate();
  ComparisonVerdict verdict;
  verdict.statistic_first = *std::min_element(first.theta.begin(), first.theta.end());
  verdict.statistic_second = *std::min_element(second.theta.begin(), second.theta.end());
  verdict.alternative = pick_smaller(verdict.statistic_first, verdict.statistic_second);
  return verdict;
}

}  // namespace coaldetect
