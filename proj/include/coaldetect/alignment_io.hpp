#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "coaldetect/jc_sequence.hpp"

namespace coaldetect {

/// One record per leaf, header `>label gene=<index> k=<length>`, 60 columns per line.
/// Lines starting with `;` are comments and are skipped on read.
void write_fasta(std::ostream& out, const std::vector<SequenceSet>& genes);
std::vector<SequenceSet> read_fasta(std::istream& in);

/// Theta matrices, one block of n rows per gene:
///
///   # key=value            (metadata; `k` is required on read)
///   gene,leaf,<label 1>,...,<label n>
///   0,<label 1>,0,12,...
///
void write_theta_csv(std::ostream& out, const std::vector<ThetaMatrix>& genes,
                     const std::map<std::string, std::string>& metadata = {});
std::vector<ThetaMatrix> read_theta_csv(std::istream& in);

}  // namespace coaldetect
