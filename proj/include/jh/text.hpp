#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jh {

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

/// Index of the last case-insensitive (ASCII) occurrence of `needle`, or npos.
std::size_t rfind_icase(std::string_view haystack, std::string_view needle);

}  // namespace jh
