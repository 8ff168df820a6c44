#include <gtest/gtest.h>

#include <cmath>

#include "coaldetect/coalescent.hpp"
#include "coaldetect/errors.hpp"
#include "coaldetect/jc_sequence.hpp"
#include "coaldetect/rng.hpp"
#include "oracles.hpp"

using namespace coaldetect;

TEST(PackedSequence, RoundTripsAcrossWordBoundaries) {
  std::string text;
  for (int i = 0; i < 77; ++i) text += "ACGT"[(i * 7 + 3) % 4];
  const auto packed = PackedSequence::from_string(text);
  EXPECT_EQ(packed.size(), 77u);
  EXPECT_EQ(packed.to_string(), text);
  EXPECT_THROW(PackedSequence::from_string("ACGN"), DomainError);
}

TEST(Theta, CountsDifferingSites) {
  EXPECT_EQ(theta("ACGTACGT", "ACGTACGT"), 0u);
  EXPECT_EQ(theta("ACGTACGT", "TCGAACGA"), 3u);
  std::string a(100, 'A');
  std::string b = a;
  b[0] = 'C';
  b[63] = 'G';
  b[99] = 'T';
  EXPECT_EQ(theta(PackedSequence::from_string(a), PackedSequence::from_string(b)), 3u);
  EXPECT_THROW(theta("AC", "ACG"), DomainError);
}

TEST(JcSequence, DeterministicAndMatrixSymmetric) {
  const auto species = SpeciesTree::three_leaf(0.2);
  const auto gene = sample_gene_tree(species, 3);
  const auto a = simulate_sequences(gene, 300, 17);
  const auto b = simulate_sequences(gene, 300, 17);
  EXPECT_EQ(a.sequences, b.sequences);
  const auto m = theta_matrix(a);
  EXPECT_EQ(m.counts, m.counts.transpose());
  EXPECT_EQ(m.counts.diagonal().sum(), 0);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(static_cast<std::size_t>(m.counts(0, 2)), theta(a.sequences[0], a.sequences[2]));
}

TEST(JcSequence, ZeroSitesGiveEmptySequences) {
  const auto gene = cherry_gene_tree(SpeciesTree::two_leaf(1.0), 1.2);
  const auto set = simulate_sequences(gene, 0, 1);
  EXPECT_EQ(set.sequences[0].size(), 0u);
  EXPECT_EQ(theta(set.sequences[0], set.sequences[1]), 0u);
}

// With the coalescence time pinned, theta is Binomial(k, (3/4)(1 - e^{-2(1+z)})).
class PinnedBinomial : public ::testing::TestWithParam<double> {};

TEST_P(PinnedBinomial, ChiSquareAgainstBinomial) {
  const double z = GetParam();
  const std::size_t k = 50;
  const std::size_t n = 20000;
  const auto gene = cherry_gene_tree(SpeciesTree::two_leaf(1.0), 1.0 + z);
  std::vector<double> observed(k + 1, 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto set = simulate_sequences(gene, k, derive_seed(21, {i}));
    observed[theta(set.sequences[0], set.sequences[1])] += 1.0;
  }
  std::vector<double> expected(k + 1);
  const double p = oracle::success_prob(1.0, z);
  for (std::size_t j = 0; j <= k; ++j) expected[j] = static_cast<double>(n) * oracle::binomial_pmf(k, p, j);
  EXPECT_GT(oracle::chi_square_pvalue(observed, expected), 0.01);
}

INSTANTIATE_TEST_SUITE_P(Z, PinnedBinomial, ::testing::Values(0.0, 0.5, 2.0));

TEST(JcDistance, InvertsExpectation) {
  for (double d : {0.0, 0.1, 1.0, 2.0, 5.0}) EXPECT_NEAR(jc_invert(jc_expected_theta(d)), d, 1e-10 * (1 + d));
  EXPECT_DOUBLE_EQ(jc_expected_theta(0.0), 0.0);
  EXPECT_THROW(jc_invert(0.75), DomainError);
  EXPECT_THROW(jc_invert(-0.1), DomainError);
}
