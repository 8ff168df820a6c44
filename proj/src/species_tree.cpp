#include "coaldetect/species_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "coaldetect/errors.hpp"
#include "coaldetect/newick.hpp"

namespace coaldetect {

SpeciesTree::SpeciesTree(std::vector<SpeciesNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DomainError("species tree: no nodes");
  const int n = static_cast<int>(nodes_.size());
  std::set<std::string> labels;
  for (int id = 0; id < n; ++id) {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!(node.nu > 0.0) || !std::isfinite(node.nu)) throw DomainError("species tree: rate nu must be positive");
    if (node.parent == kNoNode) {
      if (root_ != kNoNode) throw DomainError("species tree: more than one root");
      root_ = id;
    } else {
      if (node.parent < 0 || node.parent >= n) throw DomainError("species tree: parent id out of range");
      const auto& parent = nodes_[static_cast<std::size_t>(node.parent)];
      if (parent.children[0] != id && parent.children[1] != id) {
        throw DomainError("species tree: parent does not list node as a child");
      }
      if (!(parent.height > node.height)) {
        throw DomainError("species tree: parent must be strictly older than child");
      }
    }
    const bool has_first = node.children[0] != kNoNode;
    const bool has_second = node.children[1] != kNoNode;
    if (has_first != has_second) throw DomainError("species tree: nodes must have zero or two children");
    if (has_first) {
      for (const int child : node.children) {
        if (child < 0 || child >= n || nodes_[static_cast<std::size_t>(child)].parent != id) {
          throw DomainError("species tree: inconsistent child link");
        }
      }
    } else {
      if (node.height != 0.0) throw DomainError("species tree: leaves must be at height 0");
      if (node.label.empty()) throw DomainError("species tree: leaves need labels");
      if (!labels.insert(node.label).second) throw DomainError("species tree: duplicate leaf label " + node.label);
      leaves_.push_back(id);
    }
  }
  if (root_ == kNoNode) throw DomainError("species tree: no root");
  // Reachability from the root rules out cycles and stray components.
  std::vector<int> stack{root_};
  std::size_t seen = 0;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    ++seen;
    if (seen > nodes_.size()) throw DomainError("species tree: cycle detected");
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.push_back(node.children[0]);
      stack.push_back(node.children[1]);
    }
  }
  if (seen != nodes_.size()) throw DomainError("species tree: nodes unreachable from the root");

  order_.resize(nodes_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return node(a).height < node(b).height; });
}

SpeciesTree SpeciesTree::two_leaf(double tau, double nu) {
  if (!(tau > 0.0)) throw DomainError("two_leaf: tau must be positive");
  std::vector<SpeciesNode> nodes(3);
  nodes[0] = {2, {kNoNode, kNoNode}, 0.0, nu, "1"};
  nodes[1] = {2, {kNoNode, kNoNode}, 0.0, nu, "2"};
  nodes[2] = {kNoNode, {0, 1}, tau, nu, ""};
  return SpeciesTree(std::move(nodes));
}

SpeciesTree SpeciesTree::three_leaf(double f, std::array<std::string, 2> closest) {
  if (!(f > 0.0 && f < 1.0)) throw DomainError("three_leaf: f must lie in (0, 1)");
  const std::array<std::string, 3> all{"1", "2", "3"};
  std::string outgroup;
  for (const auto& label : all) {
    if (label != closest[0] && label != closest[1]) outgroup = label;
  }
  if (closest[0] == closest[1] || outgroup.empty() ||
      std::find(all.begin(), all.end(), closest[0]) == all.end() ||
      std::find(all.begin(), all.end(), closest[1]) == all.end()) {
    throw DomainError("three_leaf: closest pair must be two distinct labels among 1, 2, 3");
  }
  // Leaves keep label order 1, 2, 3 so node ids match labels.
  std::vector<SpeciesNode> nodes(5);
  for (int i = 0; i < 3; ++i) nodes[static_cast<std::size_t>(i)].label = all[static_cast<std::size_t>(i)];
  const int a = std::stoi(closest[0]) - 1;
  const int b = std::stoi(closest[1]) - 1;
  const int c = std::stoi(outgroup) - 1;
  nodes[static_cast<std::size_t>(a)].parent = 3;
  nodes[static_cast<std::size_t>(b)].parent = 3;
  nodes[static_cast<std::size_t>(c)].parent = 4;
  nodes[3] = {4, {a, b}, 1.0 - f, 1.0, ""};
  nodes[4] = {kNoNode, {3, c}, 1.0, 1.0, ""};
  return SpeciesTree(std::move(nodes));
}

std::vector<std::string> SpeciesTree::leaf_labels() const {
  std::vector<std::string> labels;
  labels.reserve(leaves_.size());
  for (const int id : leaves_) labels.push_back(node(id).label);
  return labels;
}

int SpeciesTree::find_leaf(std::string_view label) const {
  for (const int id : leaves_) {
    if (node(id).label == label) return id;
  }
  throw DomainError("species tree: no leaf labelled " + std::string(label));
}

double SpeciesTree::upper_time(int id) const {
  const int parent = node(id).parent;
  return parent == kNoNode ? std::numeric_limits<double>::infinity() : node(parent).height;
}

bool SpeciesTree::is_ancestor_or_self(int ancestor, int id) const {
  for (int cur = id; cur != kNoNode; cur = node(cur).parent) {
    if (cur == ancestor) return true;
  }
  return false;
}

namespace {

double read_rate(const NewickNode& node) {
  const auto it = node.attributes.find("nu");
  if (it == node.attributes.end()) return 1.0;
  try {
    std::size_t used = 0;
    const double nu = std::stod(it->second, &used);
    if (used != it->second.size()) throw DomainError("bad nu");
    return nu;
  } catch (const std::exception&) {
    throw DomainError("newick: bad nu annotation '" + it->second + "'");
  }
}

// Appends the subtree rooted at `in` and returns its id; `depth` is the
// root-to-node distance.
int flatten(const NewickNode& in, int parent, double depth, std::vector<SpeciesNode>& out,
            std::vector<double>& depths) {
  if (!in.children.empty() && in.children.size() != 2) {
    throw DomainError("newick: species tree must be binary");
  }
  const int id = static_cast<int>(out.size());
  out.push_back(SpeciesNode{parent, {kNoNode, kNoNode}, 0.0, read_rate(in), in.children.empty() ? in.label : ""});
  depths.push_back(depth);
  for (std::size_t c = 0; c < in.children.size(); ++c) {
    const auto& child = in.children[c];
    if (!child.length) throw DomainError("newick: every non-root branch needs a length");
    if (!(*child.length > 0.0)) throw DomainError("newick: branch lengths must be positive");
    const int child_id = flatten(child, id, depth + *child.length, out, depths);
    out[static_cast<std::size_t>(id)].children[c] = child_id;
  }
  return id;
}

}  // namespace

SpeciesTree parse_species_newick(std::string_view text) {
  const NewickNode root = parse_newick(text);
  std::vector<SpeciesNode> nodes;
  std::vector<double> depths;
  flatten(root, kNoNode, 0.0, nodes, depths);

  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) total = std::max(total, depths[i]);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      if (std::abs(depths[i] - total) > 1e-9 * std::max(1.0, total)) {
        throw DomainError("newick: species tree is not ultrametric (leaf " + nodes[i].label + ")");
      }
      nodes[i].height = 0.0;
    } else {
      nodes[i].height = total - depths[i];
    }
  }
  return SpeciesTree(std::move(nodes));
}

namespace {

NewickNode to_newick_node(const SpeciesTree& tree, int id) {
  const auto& node = tree.node(id);
  NewickNode out;
  out.label = node.label;
  if (node.parent != kNoNode) out.length = tree.node(node.parent).height - node.height;
  if (node.nu != 1.0) out.attributes["nu"] = format_number(node.nu);
  if (!node.is_leaf()) {
    for (const int child : node.children) out.children.push_back(to_newick_node(tree, child));
  }
  return out;
}

}  // namespace

std::string to_newick(const SpeciesTree& tree) { return format_newick(to_newick_node(tree, tree.root())); }

}  // namespace coaldetect
