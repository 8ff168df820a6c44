#include "coaldetect/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coaldetect/alignment_io.hpp"
#include "coaldetect/coalescent.hpp"
#include "coaldetect/detection.hpp"
#include "coaldetect/errors.hpp"
#include "coaldetect/exact_dist.hpp"
#include "coaldetect/jc_sequence.hpp"
#include "coaldetect/newick.hpp"
#include "coaldetect/parallel.hpp"
#include "coaldetect/reconstruct.hpp"
#include "coaldetect/rng.hpp"
#include "coaldetect/species_tree.hpp"
#include "coaldetect/sweep.hpp"

namespace coaldetect {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<ThetaMatrix> load_theta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  return read_theta_csv(in);
}

void write_output(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomically(path, contents);
  }
}

int label_index(const ThetaMatrix& gene, const std::string& label) {
  for (std::size_t i = 0; i < gene.labels.size(); ++i) {
    if (gene.labels[i] == label) return static_cast<int>(i);
  }
  throw DomainError("no leaf labelled '" + label + "'");
}

GeneSampleSet samples_for_pair(const std::vector<ThetaMatrix>& genes, const std::vector<std::string>& pair) {
  if (genes.empty()) throw DomainError("theta file has no genes");
  if (pair.empty()) {
    if (genes.front().labels.size() < 2) throw DomainError("need at least two leaves");
    return pair_samples(genes, 0, 1);
  }
  if (pair.size() != 2 || pair[0] == pair[1]) throw DomainError("--pair needs two distinct labels");
  return pair_samples(genes, label_index(genes.front(), pair[0]), label_index(genes.front(), pair[1]));
}

struct Options {
  std::size_t threads = 0;

  // simulate
  std::string tree;
  std::string tree_file;
  std::size_t genes = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string fasta_path;
  std::string theta_path;
  std::string gene_tree_path;

  // pmf / hellinger / scan
  double tau = 1.0;
  double z_lo = 0.0;
  double z_hi = std::numeric_limits<double>::infinity();
  double f = 0.0;
  std::string law;
  std::size_t m = 1;
  std::vector<double> kappas;
  std::vector<double> f_grid;
  double interval_constant = 1.0;
  std::string out_path;

  // test / reconstruct
  std::string kind;
  std::vector<std::string> theta_files;
  std::vector<std::string> pair;
  double quantile_constant = 1.0;
  bool triplet = false;

  // sweep / calibrate
  std::string config_path;
  bool record_time = false;
  double kappa = 0.5;
  double target = 0.9;
  std::size_t replicates = 200;
  double c_start = 1.0;
};

int run_simulate(const Options& o, CLI::App& sub, std::ostream& out) {
  if (sub.count("--tree") + sub.count("--tree-file") != 1) throw CLI::ValidationError("give exactly one of --tree or --tree-file");
  const std::string text = o.tree.empty() ? read_file(o.tree_file) : o.tree;
  const SpeciesTree species = parse_species_newick(text);

  std::vector<GeneTree> gene_trees(o.genes);
  std::vector<SequenceSet> sets(o.genes);
  parallel_for(o.genes, o.threads, [&](std::size_t g) {
    gene_trees[g] = sample_gene_tree(species, derive_seed(o.seed, {g, 0}));
    sets[g] = simulate_sequences(gene_trees[g], o.k, derive_seed(o.seed, {g, 1}), g);
  });

  const std::map<std::string, std::string> metadata{{"tree", to_newick(species)},
                                                    {"genes", std::to_string(o.genes)},
                                                    {"seed", std::to_string(o.seed)}};
  if (!o.fasta_path.empty()) {
    std::ostringstream fasta;
    for (const auto& [key, value] : metadata) fasta << "; " << key << '=' << value << '\n';
    write_fasta(fasta, sets);
    write_output(o.fasta_path, fasta.str(), out);
  }
  if (!o.gene_tree_path.empty()) {
    std::ostringstream trees;
    for (const auto& gene : gene_trees) trees << to_newick(gene) << '\n';
    write_output(o.gene_tree_path, trees.str(), out);
  }
  if (!o.theta_path.empty() || o.fasta_path.empty()) {
    std::vector<ThetaMatrix> thetas;
    thetas.reserve(sets.size());
    for (const auto& set : sets) thetas.push_back(theta_matrix(set));
    std::ostringstream csv;
    write_theta_csv(csv, thetas, metadata);
    write_output(o.theta_path, csv.str(), out);
  }
  return 0;
}

int run_pmf(const Options& o, CLI::App& sub, std::ostream& out) {
  const bool by_f = sub.count("--f") > 0;
  if (by_f == (sub.count("--tau") > 0)) throw CLI::ValidationError("give exactly one of --tau or --f");
  std::optional<MixingDensity> mix;
  std::ostringstream header;
  header << "# k=" << o.k;
  if (by_f) {
    if (sub.count("--z-lo") + sub.count("--z-hi") > 0) throw CLI::ValidationError("--z-lo/--z-hi go with --tau");
    const auto d = mixture_decompose(o.f);
    if (o.law == "P0") mix = d.null_density;
    else if (o.law == "P1") mix = d.signal;
    else mix = d.alternative;
    header << " f=" << format_number(o.f) << " law=" << o.law;
  } else {
    mix = MixingDensity::coalescent(o.tau, o.z_lo, o.z_hi, MixingTag::null_model);
    header << " tau=" << format_number(o.tau) << " z_lo=" << format_number(o.z_lo)
           << " z_hi=" << (std::isinf(o.z_hi) ? std::string("inf") : format_number(o.z_hi));
  }
  const ThetaPmf pmf = pmf_theta(o.k, *mix);
  std::ostringstream csv;
  csv << header.str() << " provenance=" << to_string(pmf.provenance) << '\n';
  csv << "j,prob,log_prob\n";
  for (Eigen::Index j = 0; j < pmf.prob.size(); ++j) {
    csv << j << ',' << format_number(pmf.prob(j)) << ',' << format_number(pmf.log_prob(j)) << '\n';
  }
  write_output(o.out_path, csv.str(), out);
  return 0;
}

int run_hellinger(const Options& o, std::ostream& out) {
  const auto d = mixture_decompose(o.f);
  const ThetaPmf p0 = pmf_theta(o.k, d.null_density);
  const ThetaPmf q = pmf_theta(o.k, d.alternative);
  const double h2 = hellinger2(p0, q);
  const TvBracket bracket = tv_bracket_m(h2, o.m);
  out << "# f=" << format_number(o.f) << " k=" << o.k << " m=" << o.m << '\n';
  out << "h2,tv,m,h2_m,tv_m_lower,tv_m_upper\n";
  out << format_number(h2) << ',' << format_number(tv(p0, q)) << ',' << o.m << ','
      << format_number(tensorize_h2(h2, o.m)) << ',' << format_number(bracket.lower) << ','
      << format_number(bracket.upper) << '\n';
  return 0;
}

int run_scan(const Options& o, std::ostream& out) {
  std::ostringstream csv;
  csv << "# C=" << format_number(o.interval_constant) << '\n';
  csv << "f,kappa,k,h2,ratio,h2_j0,h2_j1,h2_jprime\n";
  for (double kappa : o.kappas) {
    for (const auto& row : hellinger_scaling_scan(kappa, o.f_grid, o.interval_constant, o.threads)) {
      csv << format_number(row.f) << ',' << format_number(row.kappa) << ',' << row.k << ',' << format_number(row.h2)
          << ',' << format_number(row.ratio) << ',' << format_number(row.h2_j0) << ',' << format_number(row.h2_j1)
          << ',' << format_number(row.h2_jprime) << '\n';
    }
  }
  write_output(o.out_path, csv.str(), out);
  return 0;
}

int run_test(const Options& o, CLI::App& sub, std::ostream& out) {
  if (o.kind == "oracle") {
    if (o.theta_files.size() != 1) throw CLI::ValidationError("the oracle test takes exactly one --theta file");
    if (sub.count("--f") == 0) throw CLI::ValidationError("the oracle test needs --f");
    const GeneSampleSet samples = samples_for_pair(load_theta(o.theta_files[0]), o.pair);
    const OracleLevels levels = oracle_levels(o.f, samples.k);
    auto verdict = nlohmann::json::parse(to_json(oracle_quantile_test(samples, levels.p0, levels.w, levels.w_prime)));
    verdict["test"] = "oracle";
    verdict["f"] = o.f;
    verdict["k"] = samples.k;
    verdict["m"] = samples.size();
    verdict["p0"] = levels.p0;
    verdict["w"] = levels.w;
    verdict["w_prime"] = levels.w_prime;
    out << verdict.dump() << '\n';
    return 0;
  }
  if (o.theta_files.size() != 2) throw CLI::ValidationError("two-sample tests take exactly two --theta files");
  const GeneSampleSet first = samples_for_pair(load_theta(o.theta_files[0]), o.pair);
  const GeneSampleSet second = samples_for_pair(load_theta(o.theta_files[1]), o.pair);
  ComparisonVerdict verdict;
  if (o.kind == "agnostic") {
    if (sub.count("--seed") == 0) throw CLI::ValidationError("the agnostic test needs --seed");
    verdict = agnostic_two_sample_test(first, second, o.quantile_constant, o.seed);
  } else if (o.kind == "mean") {
    verdict = mean_test(first, second);
  } else {
    verdict = min_test(first, second);
  }
  auto json = nlohmann::json::parse(to_json(verdict));
  json["test"] = o.kind;
  json["first"] = o.theta_files[0];
  json["second"] = o.theta_files[1];
  out << json.dump() << '\n';
  return 0;
}

int run_reconstruct(const Options& o, CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto genes = load_theta(o.theta_files.at(0));
  if (o.triplet) {
    if (sub.count("--seed") == 0) throw CLI::ValidationError("--triplet needs --seed");
    out << to_json(triplet_topology(genes, o.quantile_constant, o.seed)) << '\n';
    return 0;
  }
  const DistanceEstimate estimate = quantile_distance_estimate(genes, o.quantile_constant);
  std::string saturated;
  for (Eigen::Index a = 0; a < estimate.saturated.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < estimate.saturated.cols(); ++b) {
      if (estimate.saturated(a, b)) {
        saturated += " (" + estimate.labels[static_cast<std::size_t>(a)] + "," +
                     estimate.labels[static_cast<std::size_t>(b)] + ")";
      }
    }
  }
  if (!saturated.empty()) throw DomainError("distance saturated (quantile >= 3/4) for pairs" + saturated);
  const ClockTree tree = single_linkage_tree(estimate.distance, estimate.labels);
  err << "reconstructed from " << genes.size() << " genes\n";
  out << to_newick(tree) << '\n';
  return 0;
}

int run_sweep_command(const Options& o, std::ostream& out, std::ostream& err) {
  SweepConfig config = SweepConfig::from_json(read_file(o.config_path));
  if (!o.out_path.empty()) config.output = o.out_path;
  if (o.threads > 0) config.threads = o.threads;
  if (o.record_time) config.record_time = true;
  const SweepResult result = run_sweep(config);
  if (config.output.empty()) write_sweep_csv(out, result.records);
  for (const auto& record : result.records) {
    if (!record.error.empty()) {
      err << "cell " << to_string(record.cell.test) << " f=" << format_number(record.cell.f) << " k=" << record.cell.k
          << " m=" << record.cell.m << ": " << record.error << '\n';
    }
  }
  return result.partial ? kExitPartial : 0;
}

int run_calibrate(const Options& o, std::ostream& out) {
  CalibrationOptions options;
  options.test = parse_test_kind(o.kind);
  options.quantile_constant = o.quantile_constant;
  options.replicates = o.replicates;
  options.seed = o.seed;
  options.threads = o.threads;
  options.c_start = o.c_start;
  const Calibration calibration = calibrate_constants(o.f, o.kappa, o.target, options);
  auto json = nlohmann::json::parse(to_json(calibration));
  json["test"] = o.kind;
  json["seed"] = o.seed;
  json["note"] = "c and c_prime are empirical constants calibrated by this tool";
  out << json.dump(2) << '\n';
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coalescent detection toolkit: simulate, compute exact theta laws, run detection tests."};
  app.name("coaldetect");
  app.require_subcommand(1, 1);
  Options o;
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* simulate = app.add_subcommand("simulate", "Simulate gene trees and Jukes-Cantor sequences");
  simulate->add_option("--tree", o.tree, "Species tree in Newick");
  simulate->add_option("--tree-file", o.tree_file, "File holding the species tree")->check(CLI::ExistingFile);
  simulate->add_option("--genes", o.genes, "Number of genes")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--k", o.k, "Sites per gene")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  simulate->add_option("--seed", o.seed, "Master seed")->required();
  simulate->add_option("--fasta", o.fasta_path, "Write sequences as FASTA (- for stdout)");
  simulate->add_option("--theta", o.theta_path, "Write theta matrices as CSV (default stdout)");
  simulate->add_option("--gene-trees", o.gene_tree_path, "Write gene trees as Newick, one per line");

  auto* pmf = app.add_subcommand("pmf", "Exact law of theta");
  pmf->add_option("--k", o.k, "Sites")->required();
  pmf->add_option("--tau", o.tau, "Divergence time");
  pmf->add_option("--z-lo", o.z_lo, "Lower truncation of the excess coalescence time");
  pmf->add_option("--z-hi", o.z_hi, "Upper truncation (default inf)");
  pmf->add_option("--f", o.f, "Shortening f of the alternative");
  pmf->add_option("--law", o.law, "P0, P1 or Q (with --f)")->check(CLI::IsMember({"P0", "P1", "Q"}))->default_val("Q");
  pmf->add_option("--out", o.out_path, "Output CSV (default stdout)");

  auto* hellinger = app.add_subcommand("hellinger", "Hellinger and TV distance between P0 and Q");
  hellinger->add_option("--f", o.f, "Shortening f")->required();
  hellinger->add_option("--k", o.k, "Sites")->required();
  hellinger->add_option("--m", o.m, "Genes for the tensorized bracket")->check(CLI::PositiveNumber);

  auto* scan = app.add_subcommand("scan", "H^2 / (f^2 sqrt k) over an f grid");
  scan->add_option("--kappa", o.kappas, "Sites exponent (repeatable)")->required();
  scan->add_option("--f", o.f_grid, "f values")->required()->delimiter(',');
  scan->add_option("--C", o.interval_constant, "Constant of the sqrt(log k / k) window");
  scan->add_option("--out", o.out_path, "Output CSV (default stdout)");

  auto* test = app.add_subcommand("test", "Run a detection test on theta CSV files");
  test->add_option("--kind", o.kind, "oracle, agnostic, mean or min")->required()->check(
      CLI::IsMember({"oracle", "agnostic", "mean", "min"}));
  test->add_option("--theta", o.theta_files, "Theta CSV (once for oracle, twice otherwise)")->required()->check(
      CLI::ExistingFile);
  test->add_option("--pair", o.pair, "Leaf pair, e.g. --pair 1,2 (default first two leaves)")->delimiter(',');
  test->add_option("--f", o.f, "Shortening f (oracle test)");
  test->add_option("--C", o.quantile_constant, "Quantile constant C of the C/sqrt(k) level");
  test->add_option("--seed", o.seed, "Split seed (agnostic test)");

  auto* reconstruct = app.add_subcommand("reconstruct", "Clock tree or triplet topology from theta CSV");
  reconstruct->add_option("--theta", o.theta_files, "Theta CSV")->required()->expected(1)->check(CLI::ExistingFile);
  reconstruct->add_option("--C", o.quantile_constant, "Quantile constant C");
  reconstruct->add_flag("--triplet", o.triplet, "Resolve a 3-leaf topology by pairwise tests (JSON)");
  reconstruct->add_option("--seed", o.seed, "Split seed (with --triplet)");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo power sweep from a JSON config");
  sweep->add_option("--config", o.config_path, "JSON config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", o.out_path, "Output CSV (overrides the config)");
  sweep->add_flag("--time", o.record_time, "Fill the seconds column");

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the constants c and c' at (f, kappa)");
  calibrate->add_option("--f", o.f, "Shortening f")->required();
  calibrate->add_option("--kappa", o.kappa, "Sites exponent")->required();
  calibrate->add_option("--target", o.target, "Target power in (0.5, 1)");
  calibrate->add_option("--test", o.kind, "oracle, agnostic, mean, min or triplet")->default_val("oracle");
  calibrate->add_option("--replicates", o.replicates, "Replicates per power estimate")->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", o.seed, "Master seed")->required();
  calibrate->add_option("--C", o.quantile_constant, "Quantile constant C");
  calibrate->add_option("--c-start", o.c_start, "First multiplier tried");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (*simulate) return run_simulate(o, *simulate, out);
    if (*pmf) return run_pmf(o, *pmf, out);
    if (*hellinger) return run_hellinger(o, out);
    if (*scan) return run_scan(o, out);
    if (*test) return run_test(o, *test, out);
    if (*reconstruct) return run_reconstruct(o, *reconstruct, out, err);
    if (*sweep) return run_sweep_command(o, out, err);
    if (*calibrate) return run_calibrate(o, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  } catch (const BracketFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 70;
  }
  return kExitUsage;
}

}  // namespace coaldetect
