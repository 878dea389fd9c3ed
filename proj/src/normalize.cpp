#include <cctype>

#include "cpgql/joern_client.hpp"

namespace cpgql {
namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_inline_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

// Length of a `val resN: <Type> = ` prefix at the start of `s` (after optional
// inline whitespace), or 0. The type is opaque: everything up to the first
// `=` that has whitespace on both sides. Newlines never match.
std::size_t repl_prefix_length(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_inline_ws(s[i])) ++i;
  if (s.substr(i, 3) != "val") return 0;
  i += 3;
  const std::size_t ws_start = i;
  while (i < s.size() && is_inline_ws(s[i])) ++i;
  if (i == ws_start) return 0;
  if (s.substr(i, 3) != "res") return 0;
  i += 3;
  const std::size_t digits = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits) return 0;
  while (i < s.size() && is_inline_ws(s[i])) ++i;
  if (i >= s.size() || s[i] != ':') return 0;
  ++i;
  const std::size_t type_start = i;
  for (; i + 2 < s.size(); ++i) {
    if (s[i] == '\n') return 0;
    if (i > type_start && is_inline_ws(s[i]) && s[i + 1] == '=' && is_inline_ws(s[i + 2])) {
      std::size_t end = i + 2;
      while (end < s.size() && is_inline_ws(s[end])) ++end;
      return end;
    }
  }
  return 0;
}

std::string_view strip_prefixes(std::string_view line) {
  while (const std::size_t n = repl_prefix_length(line)) line.remove_prefix(n);
  return line;
}

}  // namespace

std::string normalize(std::string_view raw) {
  std::string stripped;
  stripped.reserve(raw.size());
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    stripped += strip_prefixes(raw.substr(start, end - start));
    if (end < raw.size()) stripped += '\n';
    start = end + 1;
  }

  std::string out;
  out.reserve(stripped.size());
  bool pending_space = false;
  for (char c : stripped) {
    if (is_ws(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }

  // Collapsing can expose a prefix that spanned lines; strip to a fixpoint so
  // a second pass finds nothing.
  std::string_view view = out;
  const std::string_view head = strip_prefixes(view);
  if (head.size() != view.size()) return std::string(head);
  return out;
}

}  // namespace cpgql
