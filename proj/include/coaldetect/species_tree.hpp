#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace coaldetect {

inline constexpr int kNoNode = -1;

struct SpeciesNode {
  int parent = kNoNode;
  std::array<int, 2> children{kNoNode, kNoNode};
  double height = 0.0;  // divergence time before present, coalescent units
  double nu = 1.0;      // mutation rate on the branch above this node
  std::string label;    // leaves only

  bool is_leaf() const noexcept { return children[0] == kNoNode; }
};

/// Rooted binary species tree with divergence times. Leaves sit at time 0 and
/// the root's population extends to infinity; its `nu` is the rate used above
/// the root.
class SpeciesTree {
 public:
  /// Validates: binary, a single root, parent strictly older than child,
  /// leaves at height 0, positive rates, unique leaf labels.
  explicit SpeciesTree(std::vector<SpeciesNode> nodes);

  /// Two species "1" and "2" diverging at time tau (so d_12 = 2 tau when nu = 1).
  static SpeciesTree two_leaf(double tau, double nu = 1.0);

  /// Three species where `closest` (two of "1","2","3") diverge at 1 - f and
  /// the third joins at 1.
  static SpeciesTree three_leaf(double f, std::array<std::string, 2> closest = {"1", "2"});

  const std::vector<SpeciesNode>& nodes() const noexcept { return nodes_; }
  const SpeciesNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int root() const noexcept { return root_; }

  /// Leaf node ids in node order; gene trees use the same leaf order.
  const std::vector<int>& leaves() const noexcept { return leaves_; }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }
  std::vector<std::string> leaf_labels() const;
  int find_leaf(std::string_view label) const;

  /// Height of the parent population's start; +inf for the root.
  double upper_time(int id) const;
  bool is_ancestor_or_self(int ancestor, int id) const;

  /// Node ids sorted by increasing height (children before parents).
  const std::vector<int>& postorder_by_height() const noexcept { return order_; }

 private:
  std::vector<SpeciesNode> nodes_;
  std::vector<int> leaves_;
  std::vector<int> order_;
  int root_ = kNoNode;
};

/// Parses a rooted binary Newick tree with branch lengths in coalescent
/// units. Leaves must be equidistant from the root (to 1e-9 relative).
/// Per-edge rates are given as `[&nu=<value>]` after the node or its length.
SpeciesTree parse_species_newick(std::string_view text);

std::string to_newick(const SpeciesTree& tree);

}  // namespace coaldetect
