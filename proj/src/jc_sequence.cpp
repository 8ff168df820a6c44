#include "coaldetect/jc_sequence.hpp"

#include <bit>
#include <cmath>

#include "coaldetect/errors.hpp"
#include "coaldetect/rng.hpp"

namespace coaldetect {

namespace {

constexpr char kAlphabet[4] = {'A', 'C', 'G', 'T'};

std::uint8_t encode(char c) {
  switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: throw DomainError(std::string("sequence: invalid symbol '") + c + "'");
  }
}

}  // namespace

PackedSequence PackedSequence::from_string(std::string_view acgt) {
  PackedSequence seq(acgt.size());
  for (std::size_t i = 0; i < acgt.size(); ++i) seq.set(i, encode(acgt[i]));
  return seq;
}

std::string PackedSequence::to_string() const {
  std::string out(length_, 'A');
  for (std::size_t i = 0; i < length_; ++i) out[i] = kAlphabet[at(i)];
  return out;
}

SequenceSet simulate_sequences(const GeneTree& gene, std::size_t k, std::uint64_t seed, std::size_t gene_index) {
  SequenceSet out;
  out.gene_index = gene_index;
  out.k = k;

  // Preorder so parents are filled before children.
  std::vector<int> order;
  order.reserve(gene.nodes.size());
  std::vector<int> stack{gene.root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& node = gene.node(id);
    if (!node.is_leaf()) {
      stack.push_back(node.children[1]);
      stack.push_back(node.children[0]);
    }
  }

  // Mutation test on the top 53 bits; replacement symbol from the low 2 bits.
  std::vector<std::uint64_t> thresholds(gene.nodes.size(), 0);
  for (const int id : order) {
    const double p = gene.node(id).mutation_prob;
    if (p < 0.0 || p > 1.0) throw DomainError("simulate_sequences: mutation probability outside [0, 1]");
    thresholds[static_cast<std::size_t>(id)] = static_cast<std::uint64_t>(std::ldexp(p, 53));
  }

  std::vector<int> leaf_slot;
  out.labels.reserve(gene.leaf_count);
  for (std::size_t leaf = 0; leaf < gene.leaf_count; ++leaf) {
    out.labels.push_back(gene.nodes[leaf].label);
    out.sequences.emplace_back(k);
  }

  // Flattened preorder: parent slot (or -1 for the root) and threshold.
  std::vector<int> parent_slot(order.size());
  std::vector<std::uint64_t> ordered_threshold(order.size());
  {
    std::vector<int> slot_of(gene.nodes.size(), -1);
    for (std::size_t s = 0; s < order.size(); ++s) {
      const int id = order[s];
      slot_of[static_cast<std::size_t>(id)] = static_cast<int>(s);
      const int parent = gene.nodes[static_cast<std::size_t>(id)].parent;
      parent_slot[s] = parent == kNoNode ? -1 : slot_of[static_cast<std::size_t>(parent)];
      ordered_threshold[s] = thresholds[static_cast<std::size_t>(id)];
    }
    leaf_slot.resize(gene.leaf_count);
    for (std::size_t leaf = 0; leaf < gene.leaf_count; ++leaf) leaf_slot[leaf] = slot_of[leaf];
  }

  Rng rng(seed);
  std::vector<std::uint8_t> state(order.size(), 0);
  for (std::size_t site = 0; site < k; ++site) {
    for (std::size_t s = 0; s < order.size(); ++s) {
      const std::uint64_t draw = rng();
      const int parent = parent_slot[s];
      if (parent < 0 || (draw >> 11) < ordered_threshold[s]) {
        state[s] = static_cast<std::uint8_t>(draw & 3U);
      } else {
        state[s] = state[static_cast<std::size_t>(parent)];
      }
    }
    for (std::size_t leaf = 0; leaf < gene.leaf_count; ++leaf) out.sequences[leaf].set(site, state[static_cast<std::size_t>(leaf_slot[leaf])]);
  }
  return out;
}

std::size_t theta(const PackedSequence& a, const PackedSequence& b) {
  if (a.size() != b.size()) throw DomainError("theta: sequences differ in length");
  constexpr std::uint64_t kLowBits = 0x5555555555555555ULL;
  std::size_t count = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const std::uint64_t diff = wa[i] ^ wb[i];
    count += static_cast<std::size_t>(std::popcount((diff | (diff >> 1)) & kLowBits));
  }
  return count;
}

std::size_t theta(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) throw DomainError("theta: sequences differ in length");
  return theta(PackedSequence::from_string(a), PackedSequence::from_string(b));
}

ThetaMatrix theta_matrix(const SequenceSet& set) {
  const auto n = static_cast<Eigen::Index>(set.sequences.size());
  ThetaMatrix out{set.k, set.labels, Eigen::MatrixXi::Zero(n, n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const auto count = static_cast<int>(
          theta(set.sequences[static_cast<std::size_t>(a)], set.sequences[static_cast<std::size_t>(b)]));
      out.counts(a, b) = count;
      out.counts(b, a) = count;
    }
  }
  return out;
}

double jc_expected_theta(double path_length) {
  if (!(path_length >= 0.0)) throw DomainError("jc_expected_theta: path length must be nonnegative");
  return -0.75 * std::expm1(-path_length);
}

double jc_invert(double theta_fraction) {
  if (!(theta_fraction >= 0.0)) throw DomainError("jc_invert: fraction must be nonnegative");
  if (!(theta_fraction < 0.75)) throw DomainError("jc_invert: fraction saturated (>= 3/4)");
  return -std::log1p(-theta_fraction / 0.75);
}

}  // namespace coaldetect
