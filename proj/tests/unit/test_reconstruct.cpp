#include <gtest/gtest.h>

#include <cmath>

#include "coaldetect/coalescent.hpp"
#include "coaldetect/reconstruct.hpp"
#include "coaldetect/rng.hpp"
#include "coaldetect/species_tree.hpp"

using namespace coaldetect;

namespace {

std::vector<ThetaMatrix> simulate_genes(const SpeciesTree& species, std::size_t k, std::size_t m, std::uint64_t seed) {
  std::vector<ThetaMatrix> genes;
  for (std::size_t g = 0; g < m; ++g) {
    const auto gene = sample_gene_tree(species, derive_seed(seed, {g, 0}));
    genes.push_back(theta_matrix(simulate_sequences(gene, k, derive_seed(seed, {g, 1}), g)));
  }
  return genes;
}

ThetaMatrix constant_matrix(int a, int b, int c) {
  ThetaMatrix m{100, {"1", "2", "3"}, Eigen::MatrixXi::Zero(3, 3)};
  m.counts(0, 1) = m.counts(1, 0) = a;
  m.counts(0, 2) = m.counts(2, 0) = b;
  m.counts(1, 2) = m.counts(2, 1) = c;
  return m;
}

}  // namespace

TEST(SingleLinkage, HandTracedThreeLeaves) {
  Eigen::Matrix3d d;
  d << 0, 1, 2, 1, 0, 2, 2, 2, 0;
  const auto tree = single_linkage_tree(d, {"1", "2", "3"});
  EXPECT_EQ(to_newick(tree), "((1:0.5,2:0.5):0.5,3:1);");
  EXPECT_DOUBLE_EQ(tree.nodes[static_cast<std::size_t>(tree.root)].height, 1.0);
}

TEST(SingleLinkage, TwoLeaves) {
  Eigen::Matrix2d d;
  d << 0, 2, 2, 0;
  const auto tree = single_linkage_tree(d, {"a", "b"});
  EXPECT_DOUBLE_EQ(tree.nodes[static_cast<std::size_t>(tree.root)].height, 1.0);
}

TEST(SingleLinkage, ExactOnUltrametricsAndIdempotent) {
  // Cophenetic distances of ((a,b):1,(c,(d,e):0.5):2) style clock tree.
  Eigen::MatrixXd d(5, 5);
  d << 0, 2, 6, 6, 6,
       2, 0, 6, 6, 6,
       6, 6, 0, 3, 3,
       6, 6, 3, 0, 1,
       6, 6, 3, 1, 0;
  const std::vector<std::string> labels{"a", "b", "c", "d", "e"};
  const auto tree = single_linkage_tree(d, labels);
  EXPECT_TRUE(tree.induced_distances().isApprox(d, 1e-15));
  const auto again = single_linkage_tree(tree.induced_distances(), labels);
  EXPECT_EQ(again.clusters(), tree.clusters());
  EXPECT_EQ(to_newick(again), to_newick(tree));
  for (const auto& node : tree.nodes) {
    if (node.parent != -1) EXPECT_GE(tree.nodes[static_cast<std::size_t>(node.parent)].height, node.height);
  }
}

TEST(SingleLinkage, RobustToPerturbationBelowHalfTheGap) {
  Eigen::MatrixXd d(4, 4);
  d << 0, 1, 3, 3,
       1, 0, 3, 3,
       3, 3, 0, 2,
       3, 3, 2, 0;
  const auto truth = single_linkage_tree(d, {"a", "b", "c", "d"}).clusters();
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd noisy = d;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) noisy(i, j) = noisy(j, i) = d(i, j) + (rng.uniform() - 0.5) * 0.99;
    }
    EXPECT_EQ(single_linkage_tree(noisy, {"a", "b", "c", "d"}).clusters(), truth);
  }
}

TEST(SingleLinkage, RejectsBadMatrices) {
  Eigen::Matrix2d asym;
  asym << 0, 1, 2, 0;
  EXPECT_THROW(single_linkage_tree(asym, {"a", "b"}), DomainError);
  Eigen::Matrix2d negative;
  negative << 0, -1, -1, 0;
  EXPECT_THROW(single_linkage_tree(negative, {"a", "b"}), DomainError);
  EXPECT_THROW(single_linkage_tree(Eigen::Matrix2d::Zero(), {"a"}), DomainError);
}

TEST(Triplet, IdenticalPairSamplesAreUndecided) {
  std::vector<ThetaMatrix> genes;
  for (int g = 0; g < 20; ++g) genes.push_back(constant_matrix(30 + g % 5, 30 + g % 5, 30 + g % 5));
  const auto call = triplet_topology(genes, 1.0, 1);
  EXPECT_FALSE(call.closest.has_value());
  EXPECT_NE(to_json(call).find("undecided"), std::string::npos);
}

TEST(Triplet, PreconditionsAreChecked) {
  std::vector<ThetaMatrix> few(3, constant_matrix(1, 2, 3));
  EXPECT_THROW(triplet_topology(few, 1.0, 0), DomainError);
  ThetaMatrix two{10, {"a", "b"}, Eigen::MatrixXi::Zero(2, 2)};
  EXPECT_THROW(triplet_topology(std::vector<ThetaMatrix>(5, two), 1.0, 0), DomainError);
}

TEST(Triplet, RecoversClosestPairFromSimulation) {
  const auto genes = simulate_genes(SpeciesTree::three_leaf(0.1), 100, 2000, 77);
  const auto call = triplet_topology(genes, 1.0, 5);
  ASSERT_TRUE(call.closest.has_value());
  EXPECT_EQ((*call.closest)[0], 0);
  EXPECT_EQ((*call.closest)[1], 1);
}

TEST(Triplet, EquivariantUnderRelabelling) {
  const auto genes = simulate_genes(SpeciesTree::three_leaf(0.1, {"1", "3"}), 100, 800, 12);
  const auto call = triplet_topology(genes, 1.0, 9);
  // Reorder leaves as (3, 1, 2): the closest pair must follow the labels.
  std::vector<ThetaMatrix> permuted;
  const int perm[3] = {2, 0, 1};
  for (const auto& g : genes) {
    ThetaMatrix p{g.k, {g.labels[2], g.labels[0], g.labels[1]}, Eigen::MatrixXi::Zero(3, 3)};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) p.counts(a, b) = g.counts(perm[a], perm[b]);
    permuted.push_back(p);
  }
  const auto moved = triplet_topology(permuted, 1.0, 9);
  ASSERT_EQ(call.closest.has_value(), moved.closest.has_value());
  if (call.closest) {
    std::vector<std::string> a{call.labels[static_cast<std::size_t>((*call.closest)[0])],
                               call.labels[static_cast<std::size_t>((*call.closest)[1])]};
    std::vector<std::string> b{moved.labels[static_cast<std::size_t>((*moved.closest)[0])],
                               moved.labels[static_cast<std::size_t>((*moved.closest)[1])]};
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, (std::vector<std::string>{"1", "3"}));
  }
}

TEST(Triplet, FarBelowThresholdLooksLikeChance) {
  // Strict two-win voting on uninformative data lands on the right pair about
  // a quarter of the time; the band is 1/3 +- 0.10.
  const std::size_t trials = 300;
  std::size_t correct = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto genes = simulate_genes(SpeciesTree::three_leaf(0.1), 100, 20, derive_seed(31, {t}));
    const auto call = triplet_topology(genes, 1.0, derive_seed(32, {t}));
    if (call.closest && (*call.closest)[0] == 0 && (*call.closest)[1] == 1) ++correct;
  }
  const double rate = static_cast<double>(correct) / trials;
  EXPECT_GT(rate, 1.0 / 3.0 - 0.10);
  EXPECT_LT(rate, 1.0 / 3.0 + 0.10);
}

TEST(DistanceEstimate, QuantileTargetsTheSupportEdge) {
  std::vector<ThetaMatrix> one{constant_matrix(0, 0, 0)};
  const auto zero = quantile_distance_estimate(one, 1.0);
  EXPECT_EQ(zero.distance(0, 1), 0.0);
  std::vector<ThetaMatrix> same(7, constant_matrix(20, 30, 40));
  const auto est = quantile_distance_estimate(same, 1.0);
  EXPECT_NEAR(est.distance(0, 2), jc_invert(0.3), 1e-15);
  EXPECT_EQ(est.distance(1, 2), est.distance(2, 1));
  std::vector<ThetaMatrix> saturated(3, constant_matrix(80, 10, 10));
  EXPECT_TRUE(quantile_distance_estimate(saturated, 1.0).saturated(0, 1));
}

TEST(DistanceEstimate, TwoLeafRecoversTwiceTau) {
  // The 1/100 quantile of theta/k sits near the support edge p0, blurred by
  // binomial noise of sd sqrt(p0 (1 - p0) / k); epsilon is three such sds
  // pushed through the JC inversion (slope (4/3) e^2 at p0).
  const std::size_t k = 10000;
  const auto genes = simulate_genes(SpeciesTree::two_leaf(1.0), k, 1000, 3);
  const double d = quantile_distance_estimate(genes, 1.0).distance(0, 1);
  const double p0 = 0.75 * (1.0 - std::exp(-2.0));
  const double eps = 3.0 * std::sqrt(p0 * (1 - p0) / static_cast<double>(k)) * (4.0 / 3.0) * std::exp(2.0);
  EXPECT_NEAR(d, 2.0, eps);
}
