#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coaldetect {

/// Syntax tree of a Newick string.
///
///   tree     := node ';'
///   node     := [ '(' node (',' node)* ')' ] [label] [annot] [':' number] [annot]
///   annot    := '[&' key '=' value (',' key '=' value)* ']'
///
/// Labels are unquoted runs of characters other than "():;,[]" and whitespace.
/// Bracket comments that do not start with '&' are skipped.
struct NewickNode {
  std::string label;
  std::optional<double> length;
  std::map<std::string, std::string> attributes;
  std::vector<NewickNode> children;
};

NewickNode parse_newick(std::string_view text);

std::string format_newick(const NewickNode& root);

/// Shortest round-tripping decimal representation.
std::string format_number(double value);

}  // namespace coaldetect
