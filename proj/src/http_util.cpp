#include "http_util.hpp"

namespace cpgql::detail {

std::optional<SplitUrl> split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == host_start) return std::nullopt;
  SplitUrl out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
    out.path = "";
  } else {
    out.origin = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  if (out.origin.size() == host_start) return std::nullopt;
  return out;
}

std::string join_path(std::string_view base, std::string_view suffix) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (suffix.empty()) return out.empty() ? "/" : out;
  if (suffix.front() != '/') out += '/';
  out += suffix;
  return out;
}

}  // namespace cpgql::detail
