#include "coaldetect/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "coaldetect/coalescent.hpp"
#include "coaldetect/errors.hpp"
#include "coaldetect/exact_dist.hpp"
#include "coaldetect/jc_sequence.hpp"
#include "coaldetect/newick.hpp"
#include "coaldetect/parallel.hpp"
#include "coaldetect/reconstruct.hpp"
#include "coaldetect/rng.hpp"
#include "coaldetect/species_tree.hpp"

namespace coaldetect {

namespace {

constexpr double kMaxSites = 1e6;
constexpr double kMaxTotalSites = 1e9;

}  // namespace

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::oracle_quantile: return "oracle";
    case TestKind::agnostic: return "agnostic";
    case TestKind::mean: return "mean";
    case TestKind::min: return "min";
    case TestKind::triplet: return "triplet";
  }
  return "?";
}

TestKind parse_test_kind(const std::string& name) {
  for (auto kind : {TestKind::oracle_quantile, TestKind::agnostic, TestKind::mean, TestKind::min, TestKind::triplet}) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError("unknown test '" + name + "' (expected oracle, agnostic, mean, min or triplet)");
}

void SweepCell::validate() const {
  if (!(f > 0.0 && f < 1.0)) throw DomainError("cell: need 0 < f < 1");
  if (k == 0 || static_cast<double>(k) > kMaxSites) throw DomainError("cell: need 1 <= k <= 1e6");
  if (m == 0) throw DomainError("cell: need m >= 1");
  if (static_cast<double>(m) * static_cast<double>(k) > kMaxTotalSites) throw DomainError("cell: m * k exceeds 1e9 sites");
  if (!(quantile_constant > 0.0)) throw DomainError("cell: quantile constant must be positive");
  if ((test == TestKind::agnostic || test == TestKind::triplet) && m < 4) {
    throw DomainError("cell: split-sample tests need m >= 4");
  }
}

std::size_t genes_for_multiplier(double f, std::size_t k, double c) {
  if (!(f > 0.0 && f < 1.0) || k == 0 || !(c > 0.0)) throw DomainError("genes_for_multiplier: need 0 < f < 1, k >= 1, c > 0");
  const double m = c / (f * f * std::sqrt(static_cast<double>(k)));
  if (m > 1e15) throw DomainError("genes_for_multiplier: m too large");
  return std::max<std::size_t>(1, ceil_count(m));
}

double kappa_for_sites(double f, std::size_t k) {
  if (!(f > 0.0 && f < 1.0) || k == 0) throw DomainError("kappa_for_sites: need 0 < f < 1 and k >= 1");
  return 1.0 + std::log(static_cast<double>(k)) / (2.0 * std::log(f));
}

SweepConfig SweepConfig::from_json(std::string_view text) {
  SweepConfig config;
  try {
    const auto json = nlohmann::json::parse(text);
    for (const auto& name : json.at("tests")) config.tests.push_back(parse_test_kind(name.get<std::string>()));
    config.f_grid = json.at("f").get<std::vector<double>>();
    if (json.contains("kappa")) config.kappa_grid = json.at("kappa").get<std::vector<double>>();
    if (json.contains("k")) config.k_grid = json.at("k").get<std::vector<std::size_t>>();
    if (json.contains("mu") == json.contains("c")) throw DomainError("config: give exactly one of 'mu' or 'c'");
    if (json.contains("mu")) {
      config.size_rule = SizeRule::mu;
      config.size_grid = json.at("mu").get<std::vector<double>>();
    } else {
      config.size_rule = SizeRule::multiplier;
      config.size_grid = json.at("c").get<std::vector<double>>();
    }
    config.replicates = json.at("replicates").get<std::size_t>();
    config.master_seed = json.at("seed").get<std::uint64_t>();
    config.quantile_constant = json.value("quantile_constant", 1.0);
    config.output = json.value("output", std::string{});
    config.record_time = json.value("record_time", false);
    config.threads = json.value("threads", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

void SweepConfig::validate() const {
  if (tests.empty()) throw DomainError("config: no tests");
  if (f_grid.empty()) throw DomainError("config: empty f grid");
  if (kappa_grid.empty() == k_grid.empty()) throw DomainError("config: give exactly one of a kappa grid or a k grid");
  if (size_grid.empty()) throw DomainError("config: empty mu/c grid");
  if (replicates < 1) throw DomainError("config: replicates must be >= 1");
  for (double f : f_grid) {
    if (!(f > 0.0 && f < 1.0)) throw DomainError("config: f values must lie in (0, 1)");
  }
  for (double kappa : kappa_grid) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("config: kappa values must lie in (0, 1)");
  }
  for (double s : size_grid) {
    if (size_rule == SizeRule::mu && !(s > 0.0 && s < 1.0)) throw DomainError("config: mu values must lie in (0, 1)");
    if (size_rule == SizeRule::multiplier && !(s > 0.0)) throw DomainError("config: c values must be positive");
  }
  for (const auto& cell : cells()) cell.validate();
}

std::vector<SweepCell> SweepConfig::cells() const {
  std::vector<SweepCell> out;
  for (TestKind test : tests) {
    for (double f : f_grid) {
      std::vector<std::pair<double, std::size_t>> sites;
      for (double kappa : kappa_grid) sites.emplace_back(kappa, scan_sites(f, kappa));
      for (std::size_t k : k_grid) sites.emplace_back(kappa_for_sites(f, k), k);
      for (const auto& [kappa, k] : sites) {
        for (double s : size_grid) {
          SweepCell cell{test, f, kappa, k, s, 0, quantile_constant};
          if (size_rule == SizeRule::mu) {
            const double m = std::pow(f, -1.0 - s);
            if (m > 1e15) throw DomainError("config: m too large");
            cell.m = std::max<std::size_t>(1, ceil_count(m));
          } else {
            cell.m = genes_for_multiplier(f, k, s);
          }
          out.push_back(cell);
        }
      }
    }
  }
  return out;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0 || successes > trials) throw DomainError("wilson_interval: need 0 <= successes <= trials, trials >= 1");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // The bounds are exact at the ends; rounding must not leave the rate outside.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

namespace {

// Theta between the two leaves of a two-leaf species tree, per gene.
GeneSampleSet simulate_pair_dataset(const SpeciesTree& species, std::size_t k, std::size_t m, std::uint64_t seed) {
  GeneSampleSet out{k, {}};
  out.theta.reserve(m);
  for (std::size_t g = 0; g < m; ++g) {
    const GeneTree gene = sample_gene_tree(species, derive_seed(seed, {g, 0}));
    const SequenceSet seqs = simulate_sequences(gene, k, derive_seed(seed, {g, 1}), g);
    out.theta.push_back(static_cast<int>(theta(seqs.sequences[0], seqs.sequences[1])));
  }
  return out;
}

std::vector<ThetaMatrix> simulate_theta_matrices(const SpeciesTree& species, std::size_t k, std::size_t m,
                                                 std::uint64_t seed) {
  std::vector<ThetaMatrix> out;
  out.reserve(m);
  for (std::size_t g = 0; g < m; ++g) {
    const GeneTree gene = sample_gene_tree(species, derive_seed(seed, {g, 0}));
    out.push_back(theta_matrix(simulate_sequences(gene, k, derive_seed(seed, {g, 1}), g)));
  }
  return out;
}

}  // namespace

TrialContext prepare_trial(const SweepCell& cell) {
  cell.validate();
  TrialContext context{cell, std::nullopt};
  if (cell.test == TestKind::oracle_quantile) context.levels = oracle_levels(cell.f, cell.k);
  return context;
}

bool run_trial(const TrialContext& context, std::uint64_t seed) {
  const SweepCell& cell = context.cell;
  if (cell.test == TestKind::triplet) {
    const SpeciesTree species = SpeciesTree::three_leaf(cell.f);
    const auto genes = simulate_theta_matrices(species, cell.k, cell.m, derive_seed(seed, {0}));
    const TripletCall call = triplet_topology(genes, cell.quantile_constant, derive_seed(seed, {3}));
    return call.closest && (*call.closest)[0] == 0 && (*call.closest)[1] == 1;
  }

  const GeneSampleSet null_data = simulate_pair_dataset(SpeciesTree::two_leaf(1.0), cell.k, cell.m, derive_seed(seed, {0}));
  const GeneSampleSet alt_data =
      simulate_pair_dataset(SpeciesTree::two_leaf(1.0 - cell.f), cell.k, cell.m, derive_seed(seed, {1}));

  if (cell.test == TestKind::oracle_quantile) {
    const OracleLevels levels = context.levels ? *context.levels : oracle_levels(cell.f, cell.k);
    const auto on_null = oracle_quantile_test(null_data, levels.p0, levels.w, levels.w_prime);
    const auto on_alt = oracle_quantile_test(alt_data, levels.p0, levels.w, levels.w_prime);
    return on_null.decision == Decision::null_model && on_alt.decision == Decision::alternative;
  }

  // Presentation order is randomized so position carries no information.
  const bool alt_first = (derive_seed(seed, {2}) & 1U) != 0;
  const GeneSampleSet& first = alt_first ? alt_data : null_data;
  const GeneSampleSet& second = alt_first ? null_data : alt_data;
  ComparisonVerdict verdict;
  switch (cell.test) {
    case TestKind::agnostic:
      verdict = agnostic_two_sample_test(first, second, cell.quantile_constant, derive_seed(seed, {3}));
      break;
    case TestKind::mean: verdict = mean_test(first, second); break;
    case TestKind::min: verdict = min_test(first, second); break;
    default: throw DomainError("run_trial: unhandled test");
  }
  return verdict.alternative == (alt_first ? Pick::first : Pick::second);
}

bool run_trial(const SweepCell& cell, std::uint64_t seed) { return run_trial(prepare_trial(cell), seed); }

std::size_t count_successes(const TrialContext& context, std::size_t replicates, std::uint64_t seed,
                            std::size_t threads) {
  std::vector<char> hits(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) { hits[r] = run_trial(context, derive_seed(seed, {r})) ? 1 : 0; });
  return static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));
}

const char* const kSweepCsvHeader = "test,f,kappa,k,mu_or_c,m,replicates,successes,rate,ci_lo,ci_hi,seconds,error";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << to_string(r.cell.test) << ',' << format_number(r.cell.f) << ',' << format_number(r.cell.kappa) << ','
        << r.cell.k << ',' << format_number(r.cell.mu_or_c) << ',' << r.cell.m << ',' << r.replicates << ','
        << r.successes << ',' << format_number(r.rate) << ',' << format_number(r.ci_lo) << ','
        << format_number(r.ci_hi) << ',' << (r.seconds ? format_number(*r.seconds) : std::string("NA")) << ','
        << error << '\n';
  }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw DomainError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DomainError("cannot rename onto " + path.string());
  }
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  if (!config.output.empty()) {
    const auto parent = config.output.parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
      throw DomainError("output directory does not exist: " + parent.string());
    }
  }
  const auto cells = config.cells();
  const std::size_t reps = config.replicates;

  std::vector<std::optional<TrialContext>> contexts(cells.size());
  std::vector<std::string> errors(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      contexts[c] = prepare_trial(cells[c]);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  }

  // One slot per (cell, replicate): -1 error, 0 failure, 1 success.
  std::vector<signed char> outcome(cells.size() * reps, -1);
  std::vector<std::string> trial_error(cells.size() * reps);
  std::vector<double> elapsed(cells.size() * reps, 0.0);
  parallel_for(cells.size() * reps, config.threads, [&](std::size_t i) {
    const std::size_t c = i / reps;
    const std::size_t r = i % reps;
    if (!contexts[c]) return;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome[i] = run_trial(*contexts[c], derive_seed(config.master_seed, {c, r})) ? 1 : 0;
    } catch (const std::exception& e) {
      trial_error[i] = e.what();
    }
    elapsed[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  SweepResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRecord record;
    record.cell = cells[c];
    std::size_t failed = 0;
    double seconds = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t i = c * reps + r;
      seconds += elapsed[i];
      if (outcome[i] < 0) {
        ++failed;
        if (errors[c].empty()) errors[c] = trial_error[i];
      } else {
        ++record.replicates;
        record.successes += static_cast<std::size_t>(outcome[i]);
      }
    }
    if (failed > 0) {
      record.error = errors[c];
      result.partial = true;
    }
    if (record.replicates > 0) {
      record.rate = static_cast<double>(record.successes) / static_cast<double>(record.replicates);
      const auto ci = wilson_interval(record.successes, record.replicates);
      record.ci_lo = ci.lo;
      record.ci_hi = ci.hi;
    }
    if (config.record_time) record.seconds = seconds;
    result.records.push_back(std::move(record));
  }

  if (!config.output.empty()) {
    std::ostringstream csv;
    csv << "# seed=" << config.master_seed << " replicates=" << reps
        << " size_rule=" << (config.size_rule == SizeRule::mu ? "mu" : "c")
        << " quantile_constant=" << format_number(config.quantile_constant) << '\n';
    write_sweep_csv(csv, result.records);
    write_file_atomically(config.output, csv.str());
  }
  return result;
}

void calibrate_indistinguishable(Calibration& out) {
  const auto decomposition = mixture_decompose(out.f);
  const ThetaPmf p0 = pmf_theta(out.k, decomposition.null_density);
  const ThetaPmf q = pmf_theta(out.k, decomposition.alternative);
  out.h2_single = hellinger2(p0, q);
  const double budget = 1.0 - out.target;
  auto upper = [&](std::size_t m) { return tv_bracket_m(out.h2_single, m).upper; };
  if (upper(1) > budget) throw BracketFailure("calibrate: a single gene already exceeds the TV budget");
  // H^2_m grows with m, so the bound is monotone; double then bisect.
  std::size_t lo = 1;
  std::size_t hi = 2;
  while (upper(hi) <= budget) {
    lo = hi;
    if (hi > (std::size_t{1} << 50)) throw BracketFailure("calibrate: TV bound never reaches the budget");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (upper(mid) <= budget ? lo : hi) = mid;
  }
  out.m_c = lo;
  out.c = static_cast<double>(lo) * out.f * out.f * std::sqrt(static_cast<double>(out.k));
  out.tv_upper = upper(lo);
}

PowerPoint find_power_crossing(const SweepCell& base, double target, const CalibrationOptions& options,
                               std::vector<PowerPoint>* evidence) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("find_power_crossing: target must lie in (0, 1)");
  if (!(options.c_start > 0.0)) throw DomainError("find_power_crossing: c_start must be positive");
  SweepCell cell = base;
  cell.test = options.test;
  cell.quantile_constant = options.quantile_constant;
  std::optional<OracleLevels> levels;
  if (cell.test == TestKind::oracle_quantile) levels = oracle_levels(cell.f, cell.k);

  auto evaluate = [&](double c) {
    cell.mu_or_c = c;
    cell.m = genes_for_multiplier(cell.f, cell.k, c);
    // Split-sample tests need a few genes per half.
    if ((cell.test == TestKind::agnostic || cell.test == TestKind::triplet) && cell.m < 4) cell.m = 4;
    TrialContext context{cell, levels};
    cell.validate();
    // Same seeds at every c: common random numbers keep the power curve smooth.
    const std::size_t hits = count_successes(context, options.replicates, options.seed, options.threads);
    PowerPoint point{c, cell.m, hits, options.replicates};
    if (evidence) evidence->push_back(point);
    return point;
  };
  auto reached = [&](const PowerPoint& p) {
    return static_cast<double>(p.successes) >= target * static_cast<double>(p.replicates);
  };

  double lo = 0.0;
  PowerPoint hi_point = evaluate(options.c_start);
  if (reached(hi_point)) {
    // Walk down to find a failing lower end.
    double c = options.c_start;
    for (std::size_t i = 0;; ++i) {
      if (i == options.max_doublings) throw BracketFailure("power crossing: target reached even at the smallest multiplier");
      c /= 2.0;
      const PowerPoint p = evaluate(c);
      if (!reached(p)) {
        lo = c;
        break;
      }
      hi_point = p;
      if (p.m <= 4) throw BracketFailure("power crossing: target reached at the minimum sample size");
    }
  } else {
    lo = options.c_start;
    for (std::size_t i = 0;; ++i) {
      if (i == options.max_doublings) throw BracketFailure("power crossing: target never reached while doubling c");
      const PowerPoint p = evaluate(hi_point.c * 2.0);
      if (reached(p)) {
        hi_point = p;
        break;
      }
      lo = p.c;
      hi_point = p;
    }
  }
  for (std::size_t step = 0; step < options.bisection_steps && hi_point.c > lo * (1.0 + options.relative_tolerance);
       ++step) {
    const double mid = std::sqrt(lo * hi_point.c);
    const PowerPoint p = evaluate(mid);
    if (p.m == hi_point.m) {
      hi_point = p;
      continue;
    }
    if (reached(p)) {
      hi_point = p;
    } else {
      lo = mid;
    }
  }
  return hi_point;
}

Calibration calibrate_constants(double f, double kappa, double target, const CalibrationOptions& options) {
  if (!(target > 0.5 && target < 1.0)) throw DomainError("calibrate: target must lie in (0.5, 1)");
  if (!(f > 0.0 && f < 1.0) || !(kappa > 0.0 && kappa < 1.0)) throw DomainError("calibrate: need 0 < f < 1, 0 < kappa < 1");
  Calibration out{};
  out.f = f;
  out.kappa = kappa;
  out.k = scan_sites(f, kappa);
  out.target = target;
  if (f * std::sqrt(static_cast<double>(out.k)) >= 1.0) {
    throw BracketFailure("calibrate: f sqrt(k) >= 1, outside the regime where m scales as 1/(f^2 sqrt k)");
  }
  calibrate_indistinguishable(out);

  SweepCell base{options.test, f, kappa, out.k, options.c_start, 1, options.quantile_constant};
  const PowerPoint crossing = find_power_crossing(base, target, options, &out.evidence);
  out.c_prime = crossing.c;
  out.m_c_prime = crossing.m;
  out.power_at_c_prime = static_cast<double>(crossing.successes) / static_cast<double>(crossing.replicates);
  return out;
}

std::string to_json(const Calibration& calibration) {
  nlohmann::json out;
  out["f"] = calibration.f;
  out["kappa"] = calibration.kappa;
  out["k"] = calibration.k;
  out["target"] = calibration.target;
  out["c"] = {{"value", calibration.c},
              {"m", calibration.m_c},
              {"h2_single", calibration.h2_single},
              {"tv_upper", calibration.tv_upper},
              {"source", "exact tensorized Hellinger bound"}};
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& p : calibration.evidence) {
    evidence.push_back({{"c", p.c}, {"m", p.m}, {"successes", p.successes}, {"replicates", p.replicates}});
  }
  out["c_prime"] = {{"value", calibration.c_prime},
                    {"m", calibration.m_c_prime},
                    {"power", calibration.power_at_c_prime},
                    {"source", "empirical, Monte-Carlo calibrated"},
                    {"evidence", evidence}};
  return out.dump(2);
}

}  // namespace coaldetect
