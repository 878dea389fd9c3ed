#pragma once

#include <random>
#include <string>
#include <vector>

namespace cpgql::test {

// Random strings biased towards the interesting parts: REPL prefixes,
// whitespace runs, newlines and quotes.
inline std::string random_output(std::mt19937& rng) {
  static const std::vector<std::string> pieces{
      "val res0: List[String] = ", "val res12: Int = ",  "val res3: List[(String, Option[Integer])] = ",
      "List(",                     ")",                  "\"isBlank\"",
      ", ",                        " ",                  "\t",
      "\n",                        "\r\n",               "   ",
      "Some(value = 42)",          "val",                "res",
      "=",                         ": ",                 "┌──┐",
      "│x│",                       "\"\"\"",             "val resX: T = ",
      "ü",                         "List()",             "\"a b  c\""};
  std::uniform_int_distribution<std::size_t> count(0, 18), which(0, pieces.size() - 1);
  std::string s;
  for (std::size_t i = 0, n = count(rng); i < n; ++i) s += pieces[which(rng)];
  return s;
}

// True when normalize left a whitespace run, a non-space whitespace
// character, or whitespace at either end.
inline bool has_ws_run_or_edges(const std::string& s) {
  if (s.empty()) return false;
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  if (ws(s.front()) || ws(s.back())) return true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (ws(s[i]) && s[i] != ' ') return true;
    if (i > 0 && s[i] == ' ' && s[i - 1] == ' ') return true;
  }
  return false;
}

}  // namespace cpgql::test
