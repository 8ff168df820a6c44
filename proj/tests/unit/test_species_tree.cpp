#include <gtest/gtest.h>

#include <cmath>

#include "coaldetect/errors.hpp"
#include "coaldetect/species_tree.hpp"

using namespace coaldetect;

TEST(SpeciesTree, TwoLeafShape) {
  const auto tree = SpeciesTree::two_leaf(0.7);
  EXPECT_EQ(tree.leaf_count(), 2u);
  EXPECT_DOUBLE_EQ(tree.node(tree.root()).height, 0.7);
  EXPECT_TRUE(std::isinf(tree.upper_time(tree.root())));
  EXPECT_DOUBLE_EQ(tree.upper_time(tree.leaves()[0]), 0.7);
}

TEST(SpeciesTree, ThreeLeafPlacesCherryAtOneMinusF) {
  const auto tree = SpeciesTree::three_leaf(0.1);
  EXPECT_EQ(tree.leaf_labels(), (std::vector<std::string>{"1", "2", "3"}));
  const int one = tree.find_leaf("1");
  const int two = tree.find_leaf("2");
  const int three = tree.find_leaf("3");
  EXPECT_EQ(tree.node(one).parent, tree.node(two).parent);
  EXPECT_NEAR(tree.node(tree.node(one).parent).height, 0.9, 1e-15);
  EXPECT_EQ(tree.node(three).parent, tree.root());
  EXPECT_DOUBLE_EQ(tree.node(tree.root()).height, 1.0);
}

TEST(SpeciesTree, ThreeLeafWithOtherClosestPair) {
  const auto tree = SpeciesTree::three_leaf(0.2, {"1", "3"});
  EXPECT_EQ(tree.node(tree.find_leaf("1")).parent, tree.node(tree.find_leaf("3")).parent);
}

TEST(SpeciesTree, ParsesUltrametricNewickWithRates) {
  const auto tree = parse_species_newick("((a:1[&nu=2],b:1):1,c:2);");
  EXPECT_EQ(tree.leaf_count(), 3u);
  EXPECT_DOUBLE_EQ(tree.node(tree.root()).height, 2.0);
  EXPECT_DOUBLE_EQ(tree.node(tree.find_leaf("a")).nu, 2.0);
  EXPECT_DOUBLE_EQ(tree.node(tree.find_leaf("b")).nu, 1.0);
  const auto again = parse_species_newick(to_newick(tree));
  EXPECT_EQ(to_newick(again), to_newick(tree));
}

TEST(SpeciesTree, RejectsNonUltrametricAndNonBinary) {
  EXPECT_THROW(parse_species_newick("((a:1,b:1):1,c:1.5);"), DomainError);
  EXPECT_THROW(parse_species_newick("(a:1,b:1,c:1);"), DomainError);
  EXPECT_THROW(parse_species_newick("((a:1,a:1):1,c:2);"), DomainError);
  EXPECT_THROW(parse_species_newick("((a:1,b:1):1,c:2[&nu=-1]);"), DomainError);
  EXPECT_THROW(SpeciesTree::two_leaf(0.0), DomainError);
  EXPECT_THROW(SpeciesTree::three_leaf(1.0), DomainError);
}

TEST(SpeciesTree, PostorderVisitsChildrenFirst) {
  const auto tree = SpeciesTree::three_leaf(0.3);
  std::vector<bool> seen(tree.nodes().size(), false);
  for (int id : tree.postorder_by_height()) {
    for (int child : tree.node(id).children) {
      if (child != kNoNode) EXPECT_TRUE(seen[static_cast<std::size_t>(child)]);
    }
    seen[static_cast<std::size_t>(id)] = true;
  }
  EXPECT_TRUE(tree.is_ancestor_or_self(tree.root(), tree.find_leaf("2")));
  EXPECT_FALSE(tree.is_ancestor_or_self(tree.find_leaf("3"), tree.find_leaf("2")));
}
