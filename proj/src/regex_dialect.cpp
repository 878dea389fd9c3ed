#include "cpgql/regex_dialect.hpp"

#include <cctype>

namespace cpgql {
namespace {

bool is_quantifier(char c) { return c == '*' || c == '+' || c == '?'; }

class DialectChecker {
 public:
  explicit DialectChecker(std::string_view p) : p_(p) {}

  std::optional<std::string> run() {
    if (auto err = alternation(); err) return err;
    if (pos_ != p_.size()) return at("unbalanced ')'");
    return std::nullopt;
  }

 private:
  std::string at(std::string_view what) const {
    return std::string(what) + " at offset " + std::to_string(pos_);
  }

  std::optional<std::string> alternation() {
    if (auto err = sequence(); err) return err;
    while (pos_ < p_.size() && p_[pos_] == '|') {
      ++pos_;
      if (auto err = sequence(); err) return err;
    }
    return std::nullopt;
  }

  std::optional<std::string> sequence() {
    bool have_atom = false;
    while (pos_ < p_.size()) {
      const char c = p_[pos_];
      if (c == '|' || c == ')') break;
      if (is_quantifier(c)) {
        if (!have_atom) return at("quantifier without operand");
        ++pos_;
        have_atom = false;  // no stacked quantifiers
        continue;
      }
      if (c == '^' || c == '$') {
        ++pos_;
        have_atom = false;
        continue;
      }
      if (auto err = atom(); err) return err;
      have_atom = true;
    }
    return std::nullopt;
  }

  std::optional<std::string> atom() {
    const char c = p_[pos_];
    switch (c) {
      case '(': {
        ++pos_;
        if (pos_ < p_.size() && p_[pos_] == '?') return at("group modifiers are not supported");
        if (auto err = alternation(); err) return err;
        if (pos_ >= p_.size() || p_[pos_] != ')') return at("unterminated group");
        ++pos_;
        return std::nullopt;
      }
      case '[':
        return bracket();
      case ']':
        return at("unbalanced ']'");
      case '{':
      case '}':
        return at("counted repetition is not supported");
      case '\\':
        return escape();
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) return at("control character");
        ++pos_;
        return std::nullopt;
    }
  }

  std::optional<std::string> escape() {
    ++pos_;
    if (pos_ >= p_.size()) return at("dangling escape");
    const unsigned char e = static_cast<unsigned char>(p_[pos_]);
    if (std::isdigit(e)) return at("backreferences are not supported");
    if (std::isalpha(e)) return at("escape class is not supported");
    ++pos_;
    return std::nullopt;
  }

  std::optional<std::string> bracket() {
    ++pos_;
    if (pos_ < p_.size() && p_[pos_] == '^') ++pos_;
    bool first = true;
    while (pos_ < p_.size()) {
      const char c = p_[pos_];
      if (c == ']' && !first) {
        ++pos_;
        return std::nullopt;
      }
      if (c == '[') return at("nested bracket expression");
      if (c == '\\') {
        if (auto err = escape(); err) return err;
      } else {
        ++pos_;
      }
      first = false;
    }
    return at("unterminated bracket expression");
  }

  std::string_view p_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<std::string> check_regex_dialect(std::string_view pattern) {
  if (pattern.empty()) return std::string("empty pattern");
  return DialectChecker(pattern).run();
}

}  // namespace cpgql
