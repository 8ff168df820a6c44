#include "coaldetect/newick.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "coaldetect/errors.hpp"

namespace coaldetect {
namespace {

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  NewickNode parse_tree() {
    NewickNode root = parse_node();
    skip_space();
    if (!consume(';')) fail("expected ';'");
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after ';'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("newick: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == '[' && (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '&')) {
        const auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  static bool is_label_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' && c != ':' &&
           c != ';' && c != '[' && c != ']';
  }

  std::string parse_label() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && is_label_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  double parse_number() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && is_label_char(text_[pos_])) ++pos_;
    const auto token = text_.substr(start, pos_ - start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
      fail("bad number '" + std::string(token) + "'");
    }
    return value;
  }

  void parse_annotation(NewickNode& node) {
    while (peek('[')) {
      pos_ += 2;  // "[&"
      while (true) {
        skip_space();
        const auto key_start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '=' && text_[pos_] != ']' && text_[pos_] != ',') ++pos_;
        std::string key(text_.substr(key_start, pos_ - key_start));
        if (!consume('=')) fail("expected '=' in annotation");
        skip_space();
        const auto value_start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']') ++pos_;
        node.attributes[key] = std::string(text_.substr(value_start, pos_ - value_start));
        if (consume(']')) break;
        if (!consume(',')) fail("expected ',' or ']' in annotation");
      }
    }
  }

  NewickNode parse_node() {
    NewickNode node;
    if (consume('(')) {
      do {
        node.children.push_back(parse_node());
      } while (consume(','));
      if (!consume(')')) fail("expected ')'");
    }
    node.label = parse_label();
    parse_annotation(node);
    if (consume(':')) node.length = parse_number();
    parse_annotation(node);
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void format_into(const NewickNode& node, std::ostringstream& out) {
  if (!node.children.empty()) {
    out << '(';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out << ',';
      format_into(node.children[i], out);
    }
    out << ')';
  }
  out << node.label;
  if (node.length) out << ':' << format_number(*node.length);
  if (!node.attributes.empty()) {
    out << "[&";
    bool first = true;
    for (const auto& [key, value] : node.attributes) {
      if (!first) out << ',';
      out << key << '=' << value;
      first = false;
    }
    out << ']';
  }
}

}  // namespace

NewickNode parse_newick(std::string_view text) { return NewickParser(text).parse_tree(); }

std::string format_newick(const NewickNode& root) {
  std::ostringstream out;
  format_into(root, out);
  out << ';';
  return out.str();
}

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace coaldetect
