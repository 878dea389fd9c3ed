#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cpgql {

/// Checks a filter regex against the portable subset accepted by the schema:
/// literal characters, `.`, `*`, `+`, `?`, bracket classes, groups, alternation,
/// `^`/`$` anchors, and backslash escapes of non-alphanumeric characters.
/// Backreferences, lookaround, counted repetition and class escapes (`\d`, `\w`)
/// are rejected. Returns a description of the first problem, or nullopt.
std::optional<std::string> check_regex_dialect(std::string_view pattern);

}  // namespace cpgql
