#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coaldetect/detection.hpp"
#include "coaldetect/jc_sequence.hpp"

namespace coaldetect {

/// Result of resolving a three-species topology.
struct TripletCall {
  std::array<std::string, 3> labels;
  /// Indices into `labels` of the closest pair; empty when undecided.
  std::optional<std::array<int, 2>> closest;
  /// Verdicts for (01 vs 02), (01 vs 12), (02 vs 12).
  std::array<ComparisonVerdict, 3> comparisons;
};

std::string to_json(const TripletCall& call);

/// Theta samples of leaf pair (a, b) across genes.
GeneSampleSet pair_samples(const std::vector<ThetaMatrix>& genes, int a, int b);

/// Runs the agnostic two-sample test on every pair of leaf pairs and calls
/// closest the pair that wins both of its comparisons; otherwise undecided.
TripletCall triplet_topology(const std::vector<ThetaMatrix>& genes, double quantile_constant,
                             std::uint64_t split_seed = 0);

struct DistanceEstimate {
  std::vector<std::string> labels;
  Eigen::MatrixXd distance;                                   // NaN where saturated
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> saturated;
};

/// d_ab = jc_invert of the (C / sqrt k)-quantile of theta_ab / k across genes.
DistanceEstimate quantile_distance_estimate(const std::vector<ThetaMatrix>& genes, double quantile_constant);

/// Rooted ultrametric tree. Leaves are nodes [0, n); heights never decrease
/// toward the root.
struct ClockTree {
  struct Node {
    int parent = -1;
    std::array<int, 2> children{-1, -1};
    double height = 0.0;
    std::string label;
  };
  std::vector<Node> nodes;
  int root = -1;

  /// Cophenetic distances 2 * height(mrca).
  Eigen::MatrixXd induced_distances() const;
  /// Sorted leaf-label pairs of every cherry; two trees with equal sets of
  /// clusters have the same topology.
  std::vector<std::vector<std::string>> clusters() const;
};

/// Single-linkage clustering; each merge sits at half the minimum
/// cross-cluster distance. Ties go to the lowest cluster ids.
ClockTree single_linkage_tree(const Eigen::MatrixXd& distance, const std::vector<std::string>& labels);

std::string to_newick(const ClockTree& tree);

}  // namespace coaldetect
