#include "coaldetect/coalescent.hpp"

#include <cmath>
#include <limits>

#include "coaldetect/errors.hpp"
#include "coaldetect/newick.hpp"
#include "coaldetect/rng.hpp"

namespace coaldetect {

int GeneTree::mrca(int a, int b) const {
  std::vector<bool> on_path(nodes.size(), false);
  for (int cur = a; cur != kNoNode; cur = node(cur).parent) on_path[static_cast<std::size_t>(cur)] = true;
  for (int cur = b; cur != kNoNode; cur = node(cur).parent) {
    if (on_path[static_cast<std::size_t>(cur)]) return cur;
  }
  throw DomainError("gene tree: nodes are not connected");
}

GeneTree sample_gene_tree(const SpeciesTree& species, std::uint64_t seed) {
  Rng rng(seed);
  GeneTree gene;
  gene.leaf_count = species.leaf_count();
  gene.nodes.reserve(2 * gene.leaf_count);

  // Lineages currently exiting each species branch.
  std::vector<std::vector<int>> lineages(species.nodes().size());
  for (const int leaf : species.leaves()) {
    GeneNode node;
    node.population = leaf;
    node.label = species.node(leaf).label;
    lineages[static_cast<std::size_t>(leaf)].push_back(static_cast<int>(gene.nodes.size()));
    gene.nodes.push_back(std::move(node));
  }

  for (const int pop : species.postorder_by_height()) {
    const auto& snode = species.node(pop);
    auto& active = lineages[static_cast<std::size_t>(pop)];
    if (!snode.is_leaf()) {
      for (const int child : snode.children) {
        auto& from = lineages[static_cast<std::size_t>(child)];
        active.insert(active.end(), from.begin(), from.end());
        from.clear();
      }
    }
    const double end = species.upper_time(pop);
    double t = snode.height;
    while (active.size() > 1) {
      const auto l = active.size();
      t += rng.exponential(0.5 * static_cast<double>(l * (l - 1)));
      if (t >= end) break;
      const auto i = rng.uniform_index(l);
      auto j = rng.uniform_index(l - 1);
      if (j >= i) ++j;
      const int id = static_cast<int>(gene.nodes.size());
      GeneNode merged;
      merged.children = {active[i], active[j]};
      merged.height = t;
      merged.population = pop;
      gene.nodes.push_back(merged);
      gene.nodes[static_cast<std::size_t>(active[i])].parent = id;
      gene.nodes[static_cast<std::size_t>(active[j])].parent = id;
      // Remove j then overwrite i, keeping the rest in order.
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
      active[std::min(i, j)] = id;
    }
    if (pop == species.root()) gene.root = active.front();
  }
  return attach_mutation_probs(std::move(gene), species);
}

GeneTree attach_mutation_probs(GeneTree gene, const SpeciesTree& species) {
  const int n = static_cast<int>(gene.nodes.size());
  if (gene.leaf_count != species.leaf_count()) throw DomainError("gene tree: leaf count differs from species tree");
  if (gene.root < 0 || gene.root >= n) throw DomainError("gene tree: missing root");
  for (int id = 0; id < n; ++id) {
    const auto& node = gene.nodes[static_cast<std::size_t>(id)];
    if (node.population < 0 || node.population >= static_cast<int>(species.nodes().size())) {
      throw DomainError("gene tree: node without a population");
    }
    const auto& pop = species.node(node.population);
    if (id < static_cast<int>(gene.leaf_count)) {
      if (!node.is_leaf() || node.height != 0.0 || node.population != species.leaves()[static_cast<std::size_t>(id)]) {
        throw DomainError("gene tree: leaf " + std::to_string(id) + " is not at its species at time 0");
      }
    } else if (node.height < pop.height || node.height >= species.upper_time(node.population)) {
      throw DomainError("gene tree: coalescence at time " + std::to_string(node.height) +
                        " lies outside its population");
    }
    if ((node.parent == kNoNode) != (id == gene.root)) throw DomainError("gene tree: root mismatch");
  }

  for (int id = 0; id < n; ++id) {
    auto& node = gene.nodes[static_cast<std::size_t>(id)];
    if (node.parent == kNoNode) {
      node.branch_time = 0.0;
      node.mutation_prob = 0.0;
      continue;
    }
    const auto& parent = gene.nodes[static_cast<std::size_t>(node.parent)];
    if (!(parent.height >= node.height) || !species.is_ancestor_or_self(parent.population, node.population)) {
      throw DomainError("gene tree: edge violates the species-tree embedding");
    }
    double rate_time = 0.0;
    double start = node.height;
    for (int s = node.population; s != parent.population; s = species.node(s).parent) {
      const double end = species.upper_time(s);
      rate_time += species.node(s).nu * (end - start);
      start = end;
    }
    rate_time += species.node(parent.population).nu * (parent.height - start);
    node.branch_time = parent.height - node.height;
    node.mutation_prob = -std::expm1(-rate_time);
  }
  return gene;
}

GeneTree cherry_gene_tree(const SpeciesTree& species, double height) {
  if (species.leaf_count() != 2) throw DomainError("cherry_gene_tree: species tree must have two leaves");
  GeneTree gene;
  gene.leaf_count = 2;
  gene.nodes.resize(3);
  for (int i = 0; i < 2; ++i) {
    auto& leaf = gene.nodes[static_cast<std::size_t>(i)];
    leaf.parent = 2;
    leaf.population = species.leaves()[static_cast<std::size_t>(i)];
    leaf.label = species.node(leaf.population).label;
  }
  gene.nodes[2].children = {0, 1};
  gene.nodes[2].height = height;
  gene.nodes[2].population = species.root();
  gene.root = 2;
  return attach_mutation_probs(std::move(gene), species);
}

namespace {

NewickNode gene_newick_node(const GeneTree& gene, int id) {
  const auto& node = gene.node(id);
  NewickNode out;
  out.label = node.label;
  if (node.parent != kNoNode) out.length = node.branch_time;
  if (!node.is_leaf()) {
    for (const int child : node.children) out.children.push_back(gene_newick_node(gene, child));
  }
  return out;
}

}  // namespace

std::string to_newick(const GeneTree& gene) { return format_newick(gene_newick_node(gene, gene.root)); }

}  // namespace coaldetect
