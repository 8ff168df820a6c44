#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coaldetect/species_tree.hpp"

namespace coaldetect {

struct GeneNode {
  int parent = kNoNode;
  std::array<int, 2> children{kNoNode, kNoNode};
  double height = 0.0;         // coalescence time, coalescent units
  int population = kNoNode;    // species-tree branch the node lives in
  std::string label;           // leaves only
  double branch_time = 0.0;    // elapsed time on the edge above the node
  double mutation_prob = 0.0;  // p_e on the edge above the node

  bool is_leaf() const noexcept { return children[0] == kNoNode; }
};

/// Genealogy of one locus. Nodes [0, leaf_count) are the leaves in species
/// leaf order; internal nodes follow in order of creation (increasing height).
struct GeneTree {
  std::vector<GeneNode> nodes;
  int root = kNoNode;
  std::size_t leaf_count = 0;

  const GeneNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  int mrca(int a, int b) const;
  double coalescence_time(int a, int b) const { return node(mrca(a, b)).height; }
};

/// Samples a gene tree from the multispecies coalescent with one lineage per
/// species. Within each branch lineages merge at total rate C(l, 2) with a
/// uniformly chosen pair; survivors pass to the parent population; above the
/// root merging continues until one lineage remains. Mutation probabilities
/// are attached before returning.
GeneTree sample_gene_tree(const SpeciesTree& species, std::uint64_t seed);

/// Fills branch_time and mutation_prob on every edge:
/// p_e = 1 - exp(-sum of nu * dt over the species branches the edge crosses).
/// Throws DomainError when the gene tree is not embedded in `species`.
GeneTree attach_mutation_probs(GeneTree gene, const SpeciesTree& species);

/// Two-leaf gene tree whose leaves coalesce at `height`, embedded in the
/// root population of a two-leaf species tree. Used to pin Z.
GeneTree cherry_gene_tree(const SpeciesTree& species, double height);

/// Newick with branch times as lengths.
std::string to_newick(const GeneTree& gene);

}  // namespace coaldetect
