#include "coaldetect/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "coaldetect/newick.hpp"

namespace coaldetect {

namespace {

void require_genes(const std::vector<ThetaMatrix>& genes) {
  if (genes.empty()) throw DomainError("reconstruct: no genes");
  const auto n = genes.front().counts.rows();
  for (const auto& g : genes) {
    if (g.counts.rows() != n || g.k != genes.front().k) throw DomainError("reconstruct: genes disagree on leaves or k");
  }
}

}  // namespace

GeneSampleSet pair_samples(const std::vector<ThetaMatrix>& genes, int a, int b) {
  require_genes(genes);
  GeneSampleSet out{genes.front().k, {}};
  out.theta.reserve(genes.size());
  for (const auto& g : genes) out.theta.push_back(g.counts(a, b));
  return out;
}

std::string to_json(const TripletCall& call) {
  nlohmann::json out;
  out["labels"] = call.labels;
  if (call.closest) {
    out["closest"] = {call.labels[static_cast<std::size_t>((*call.closest)[0])],
                      call.labels[static_cast<std::size_t>((*call.closest)[1])]};
  } else {
    out["closest"] = "undecided";
  }
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& verdict : call.comparisons) comparisons.push_back(nlohmann::json::parse(to_json(verdict)));
  out["comparisons"] = comparisons;
  return out.dump();
}

TripletCall triplet_topology(const std::vector<ThetaMatrix>& genes, double quantile_constant,
                             std::uint64_t split_seed) {
  require_genes(genes);
  if (genes.front().counts.rows() != 3) throw DomainError("triplet_topology: need exactly 3 leaves");
  if (genes.size() < 4) throw DomainError("triplet_topology: need at least 4 genes");

  const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<GeneSampleSet, 3> samples;
  for (std::size_t p = 0; p < 3; ++p) samples[p] = pair_samples(genes, pairs[p][0], pairs[p][1]);

  TripletCall call;
  for (std::size_t i = 0; i < 3; ++i) call.labels[i] = genes.front().labels[i];

  const std::array<std::array<std::size_t, 2>, 3> matches{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<int, 3> wins{0, 0, 0};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto [x, y] = matches[c];
    call.comparisons[c] = agnostic_two_sample_test(samples[x], samples[y], quantile_constant, split_seed);
    // The alternative is the shorter (closer) pair.
    if (call.comparisons[c].alternative == Pick::first) ++wins[x];
    if (call.comparisons[c].alternative == Pick::second) ++wins[y];
  }
  for (std::size_t p = 0; p < 3; ++p) {
    if (wins[p] == 2) call.closest = pairs[p];
  }
  return call;
}

DistanceEstimate quantile_distance_estimate(const std::vector<ThetaMatrix>& genes, double quantile_constant) {
  require_genes(genes);
  if (!(quantile_constant > 0.0)) throw DomainError("quantile_distance_estimate: constant must be positive");
  const auto n = genes.front().counts.rows();
  const std::size_t k = genes.front().k;
  if (k == 0) throw DomainError("quantile_distance_estimate: k must be positive");
  const double level = std::min(1.0, quantile_constant / std::sqrt(static_cast<double>(k)));

  DistanceEstimate out{genes.front().labels, Eigen::MatrixXd::Zero(n, n),
                       Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false)};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const auto samples = pair_samples(genes, static_cast<int>(a), static_cast<int>(b));
      const double fraction = static_cast<double>(empirical_quantile(samples, level)) / static_cast<double>(k);
      double d = std::numeric_limits<double>::quiet_NaN();
      if (fraction < 0.75) {
        d = jc_invert(fraction);
      } else {
        out.saturated(a, b) = out.saturated(b, a) = true;
      }
      out.distance(a, b) = out.distance(b, a) = d;
    }
  }
  return out;
}

ClockTree single_linkage_tree(const Eigen::MatrixXd& distance, const std::vector<std::string>& labels) {
  const auto n = distance.rows();
  if (n < 1 || distance.cols() != n || static_cast<Eigen::Index>(labels.size()) != n) {
    throw DomainError("single_linkage_tree: need a square matrix with one label per row");
  }
  if (!distance.allFinite()) throw DomainError("single_linkage_tree: distances must be finite");
  if ((distance - distance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DomainError("single_linkage_tree: matrix is not symmetric");
  }
  if ((distance.array() < 0.0).any() || distance.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw DomainError("single_linkage_tree: need nonnegative distances and a zero diagonal");
  }

  ClockTree tree;
  for (Eigen::Index i = 0; i < n; ++i) tree.nodes.push_back({-1, {-1, -1}, 0.0, labels[static_cast<std::size_t>(i)]});

  // Active clusters: node id and single-link distances between them.
  std::vector<int> active(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = static_cast<int>(i);
  Eigen::MatrixXd link = distance;

  while (active.size() > 1) {
    std::size_t best_i = 0;
    std::size_t best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        if (link(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < best) {
          best = link(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          best_i = i;
          best_j = j;
        }
      }
    }
    const int id = static_cast<int>(tree.nodes.size());
    const int left = active[best_i];
    const int right = active[best_j];
    const double height = std::max({0.5 * best, tree.nodes[static_cast<std::size_t>(left)].height,
                                    tree.nodes[static_cast<std::size_t>(right)].height});
    tree.nodes.push_back({-1, {left, right}, height, ""});
    tree.nodes[static_cast<std::size_t>(left)].parent = id;
    tree.nodes[static_cast<std::size_t>(right)].parent = id;

    // Merge row/col best_j into best_i, then drop best_j.
    const auto bi = static_cast<Eigen::Index>(best_i);
    const auto bj = static_cast<Eigen::Index>(best_j);
    for (Eigen::Index c = 0; c < link.cols(); ++c) {
      link(bi, c) = link(c, bi) = std::min(link(bi, c), link(bj, c));
    }
    link(bi, bi) = 0.0;
    const Eigen::Index size = link.rows();
    Eigen::MatrixXd reduced(size - 1, size - 1);
    for (Eigen::Index r = 0, rr = 0; r < size; ++r) {
      if (r == bj) continue;
      for (Eigen::Index c = 0, cc = 0; c < size; ++c) {
        if (c == bj) continue;
        reduced(rr, cc++) = link(r, c);
      }
      ++rr;
    }
    link = std::move(reduced);
    active[best_i] = id;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_j));
  }
  tree.root = active.front();
  return tree;
}

Eigen::MatrixXd ClockTree::induced_distances() const {
  Eigen::Index n = 0;
  while (n < static_cast<Eigen::Index>(nodes.size()) && nodes[static_cast<std::size_t>(n)].children[0] == -1) ++n;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    std::vector<bool> above(nodes.size(), false);
    for (int cur = static_cast<int>(a); cur != -1; cur = nodes[static_cast<std::size_t>(cur)].parent) {
      above[static_cast<std::size_t>(cur)] = true;
    }
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      int cur = static_cast<int>(b);
      while (!above[static_cast<std::size_t>(cur)]) cur = nodes[static_cast<std::size_t>(cur)].parent;
      out(a, b) = 2.0 * nodes[static_cast<std::size_t>(cur)].height;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> ClockTree::clusters() const {
  std::vector<std::vector<std::string>> below(nodes.size());
  std::vector<std::vector<std::string>> out;
  // Children always precede parents in node order.
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    if (node.children[0] == -1) {
      below[id] = {node.label};
    } else {
      for (const int child : node.children) {
        const auto& part = below[static_cast<std::size_t>(child)];
        below[id].insert(below[id].end(), part.begin(), part.end());
      }
      std::sort(below[id].begin(), below[id].end());
      out.push_back(below[id]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

NewickNode clock_newick_node(const ClockTree& tree, int id) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  NewickNode out;
  out.label = node.label;
  if (node.parent != -1) out.length = tree.nodes[static_cast<std::size_t>(node.parent)].height - node.height;
  if (node.children[0] != -1) {
    for (const int child : node.children) out.children.push_back(clock_newick_node(tree, child));
  }
  return out;
}

}  // namespace

std::string to_newick(const ClockTree& tree) { return format_newick(clock_newick_node(tree, tree.root)); }

}  // namespace coaldetect
