#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cpgql::detail {

/// "https://host:8080/v1/x" -> {"https://host:8080", "/v1/x"}.
struct SplitUrl {
  std::string origin;
  std::string path;
};

std::optional<SplitUrl> split_url(std::string_view url);

/// Joins a base path and a suffix without doubling or dropping the slash.
std::string join_path(std::string_view base, std::string_view suffix);

}  // namespace cpgql::detail
