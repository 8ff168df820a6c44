#include <gtest/gtest.h>

#include <sstream>

#include "coaldetect/alignment_io.hpp"
#include "coaldetect/coalescent.hpp"
#include "coaldetect/errors.hpp"

using namespace coaldetect;

namespace {

std::vector<SequenceSet> sample_sets() {
  const auto species = SpeciesTree::three_leaf(0.3);
  std::vector<SequenceSet> sets;
  for (std::size_t g = 0; g < 3; ++g) sets.push_back(simulate_sequences(sample_gene_tree(species, g), 130, g + 100, g));
  return sets;
}

}  // namespace

TEST(Fasta, RoundTrip) {
  const auto sets = sample_sets();
  std::stringstream buffer;
  write_fasta(buffer, sets);
  const auto back = read_fasta(buffer);
  ASSERT_EQ(back.size(), sets.size());
  for (std::size_t g = 0; g < sets.size(); ++g) {
    EXPECT_EQ(back[g].gene_index, g);
    EXPECT_EQ(back[g].labels, sets[g].labels);
    EXPECT_EQ(back[g].sequences, sets[g].sequences);
  }
}

TEST(Fasta, WrapsAtSixtyColumnsAndSkipsComments) {
  std::stringstream buffer;
  write_fasta(buffer, sample_sets());
  std::string line;
  while (std::getline(buffer, line)) {
    if (line[0] != '>') EXPECT_LE(line.size(), 60u);
  }
  std::stringstream text("; note\n>a gene=0\nAC\n>b gene=0\nAG\n");
  const auto sets = read_fasta(text);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(theta(sets[0].sequences[0], sets[0].sequences[1]), 1u);
}

TEST(Fasta, RejectsRaggedGenes) {
  std::stringstream text(">a gene=0\nACG\n>b gene=0\nAC\n");
  EXPECT_THROW(read_fasta(text), DomainError);
}

TEST(ThetaCsv, RoundTripKeepsMetadataOut) {
  std::vector<ThetaMatrix> genes;
  for (const auto& set : sample_sets()) genes.push_back(theta_matrix(set));
  std::stringstream buffer;
  write_theta_csv(buffer, genes, {{"seed", "5"}});
  EXPECT_EQ(buffer.str().rfind("# ", 0), 0u);
  const auto back = read_theta_csv(buffer);
  ASSERT_EQ(back.size(), genes.size());
  for (std::size_t g = 0; g < genes.size(); ++g) {
    EXPECT_EQ(back[g].k, 130u);
    EXPECT_EQ(back[g].labels, genes[g].labels);
    EXPECT_EQ(back[g].counts, genes[g].counts);
  }
}

TEST(ThetaCsv, RejectsBadInput) {
  std::stringstream no_k("gene,leaf,a,b\n0,a,0,1\n0,b,1,0\n");
  EXPECT_THROW(read_theta_csv(no_k), DomainError);
  std::stringstream too_big("# k=3\ngene,leaf,a,b\n0,a,0,4\n0,b,4,0\n");
  EXPECT_THROW(read_theta_csv(too_big), DomainError);
  std::stringstream asym("# k=3\ngene,leaf,a,b\n0,a,0,1\n0,b,2,0\n");
  EXPECT_THROW(read_theta_csv(asym), DomainError);
}
