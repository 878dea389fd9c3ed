#pragma once

#include <string_view>

// Data files compiled into the library; definitions are generated by CMake
// from data/ (see embedded_data.cpp.in).
namespace cpgql::embedded {

std::string_view templates_v1();
std::string_view query_spec_schema();
std::string_view prompt_direct();
std::string_view prompt_structured();
std::string_view prompt_agentic();

}  // namespace cpgql::embedded
