#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coaldetect/coalescent.hpp"

namespace coaldetect {

/// Nucleotide sequence stored 2 bits per site (A=0, C=1, G=2, T=3),
/// 32 sites per 64-bit word.
class PackedSequence {
 public:
  PackedSequence() = default;
  explicit PackedSequence(std::size_t length) : length_(length), words_((length + 31) / 32, 0) {}

  static PackedSequence from_string(std::string_view acgt);
  std::string to_string() const;

  std::size_t size() const noexcept { return length_; }
  std::uint8_t at(std::size_t site) const noexcept {
    return static_cast<std::uint8_t>((words_[site / 32] >> (2 * (site % 32))) & 3U);
  }
  void set(std::size_t site, std::uint8_t symbol) noexcept {
    auto& word = words_[site / 32];
    const auto shift = 2 * (site % 32);
    word = (word & ~(std::uint64_t{3} << shift)) | (std::uint64_t{symbol & 3U} << shift);
  }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  std::vector<std::uint64_t>& words() noexcept { return words_; }

  friend bool operator==(const PackedSequence&, const PackedSequence&) = default;

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Leaf sequences of one gene.
struct SequenceSet {
  std::size_t gene_index = 0;
  std::size_t k = 0;
  std::vector<std::string> labels;
  std::vector<PackedSequence> sequences;
};

/// Runs the Jukes-Cantor process down `gene`: a uniform root sequence, then
/// on each edge every site independently mutates with probability p_e and,
/// when it does, is redrawn uniformly from all four states (so the observed
/// change probability is 3/4 p_e). Random draws are consumed site by site.
SequenceSet simulate_sequences(const GeneTree& gene, std::size_t k, std::uint64_t seed,
                               std::size_t gene_index = 0);

/// Number of sites where `a` and `b` differ.
std::size_t theta(const PackedSequence& a, const PackedSequence& b);
std::size_t theta(std::string_view a, std::string_view b);

/// Pairwise substitution counts of one gene.
struct ThetaMatrix {
  std::size_t k = 0;
  std::vector<std::string> labels;
  Eigen::MatrixXi counts;
};

ThetaMatrix theta_matrix(const SequenceSet& set);

/// (3/4)(1 - e^{-d}).
double jc_expected_theta(double path_length);

/// -ln(1 - 4 theta / 3). Throws DomainError for theta outside [0, 3/4).
double jc_invert(double theta_fraction);

}  // namespace coaldetect
