#include "coaldetect/alignment_io.hpp"

#include <istream>
#include <ostream>
#include <optional>
#include <sstream>

#include "coaldetect/errors.hpp"

namespace coaldetect {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

std::size_t parse_count(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size() || value < 0) throw DomainError("");
    return static_cast<std::size_t>(value);
  } catch (const std::exception&) {
    throw DomainError(std::string("bad ") + what + " '" + text + "'");
  }
}

}  // namespace

void write_fasta(std::ostream& out, const std::vector<SequenceSet>& genes) {
  for (const auto& gene : genes) {
    for (std::size_t leaf = 0; leaf < gene.sequences.size(); ++leaf) {
      out << '>' << gene.labels[leaf] << " gene=" << gene.gene_index << " k=" << gene.k << '\n';
      const std::string seq = gene.sequences[leaf].to_string();
      for (std::size_t pos = 0; pos < seq.size(); pos += 60) out << seq.substr(pos, 60) << '\n';
      if (seq.empty()) out << '\n';
    }
  }
}

std::vector<SequenceSet> read_fasta(std::istream& in) {
  std::vector<SequenceSet> genes;
  std::map<std::size_t, std::size_t> slot;  // gene index -> position in `genes`
  std::string line;
  std::string label;
  std::string body;
  std::size_t gene_index = 0;
  bool open = false;

  auto flush = [&] {
    if (!open) return;
    auto [it, inserted] = slot.try_emplace(gene_index, genes.size());
    if (inserted) genes.push_back(SequenceSet{gene_index, body.size(), {}, {}});
    auto& set = genes[it->second];
    if (set.k != body.size()) throw DomainError("fasta: sequences of gene " + std::to_string(gene_index) + " differ in length");
    set.labels.push_back(label);
    set.sequences.push_back(PackedSequence::from_string(body));
    body.clear();
  };

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '>') {
      flush();
      open = true;
      std::istringstream header(line.substr(1));
      header >> label;
      if (label.empty()) throw DomainError("fasta: record without a label");
      gene_index = 0;
      std::string token;
      while (header >> token) {
        if (token.rfind("gene=", 0) == 0) gene_index = parse_count(token.substr(5), "gene index");
      }
    } else {
      if (!open) throw DomainError("fasta: sequence data before the first header");
      body += line;
    }
  }
  flush();
  return genes;
}

void write_theta_csv(std::ostream& out, const std::vector<ThetaMatrix>& genes,
                     const std::map<std::string, std::string>& metadata) {
  if (genes.empty()) throw DomainError("theta csv: no genes to write");
  out << "# k=" << genes.front().k << '\n';
  for (const auto& [key, value] : metadata) {
    if (key != "k") out << "# " << key << '=' << value << '\n';
  }
  const auto& labels = genes.front().labels;
  out << "gene,leaf";
  for (const auto& label : labels) out << ',' << label;
  out << '\n';
  for (std::size_t g = 0; g < genes.size(); ++g) {
    const auto& m = genes[g];
    if (m.labels != labels || m.k != genes.front().k) throw DomainError("theta csv: genes disagree on leaves or k");
    for (Eigen::Index a = 0; a < m.counts.rows(); ++a) {
      out << g << ',' << m.labels[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < m.counts.cols(); ++b) out << ',' << m.counts(a, b);
      out << '\n';
    }
  }
}

std::vector<ThetaMatrix> read_theta_csv(std::istream& in) {
  std::string line;
  std::optional<std::size_t> k;
  std::vector<std::string> labels;
  std::vector<ThetaMatrix> genes;
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::size_t> rows_seen;

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos && trim(line.substr(1, eq - 1)) == "k") k = parse_count(trim(line.substr(eq + 1)), "k");
      continue;
    }
    const auto fields = split(line, ',');
    if (labels.empty()) {
      if (fields.size() < 3 || fields[0] != "gene" || fields[1] != "leaf") {
        throw DomainError("theta csv: expected header 'gene,leaf,<labels>'");
      }
      labels.assign(fields.begin() + 2, fields.end());
      continue;
    }
    if (!k) throw DomainError("theta csv: missing '# k=' metadata");
    const auto n = labels.size();
    if (fields.size() != n + 2) throw DomainError("theta csv: row has wrong number of columns");
    const auto gene = parse_count(fields[0], "gene index");
    auto [it, inserted] = slot.try_emplace(gene, genes.size());
    if (inserted) {
      genes.push_back(ThetaMatrix{*k, labels, Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))});
      rows_seen.push_back(0);
    }
    auto& m = genes[it->second];
    std::size_t row = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == fields[1]) row = i;
    }
    if (row == n) throw DomainError("theta csv: unknown leaf '" + fields[1] + "'");
    for (std::size_t col = 0; col < n; ++col) {
      const auto value = parse_count(fields[col + 2], "theta");
      if (value > *k) throw DomainError("theta csv: theta exceeds k");
      m.counts(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = static_cast<int>(value);
    }
    ++rows_seen[it->second];
  }
  for (std::size_t g = 0; g < genes.size(); ++g) {
    const auto& m = genes[g];
    if (rows_seen[g] != labels.size()) throw DomainError("theta csv: incomplete matrix for a gene");
    if (m.counts != m.counts.transpose() || (m.counts.diagonal().array() != 0).any()) {
      throw DomainError("theta csv: matrix must be symmetric with zero diagonal");
    }
  }
  return genes;
}

}  // namespace coaldetect
