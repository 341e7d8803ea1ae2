#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace attribqa::text {

bool is_space(char c) noexcept;
bool is_ascii_punct(char c) noexcept;

std::string_view trim(std::string_view s) noexcept;

// Runs of whitespace become one space; leading/trailing whitespace removed.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view s);

// Word count used for corpus statistics and quote-length filtering: split on
// whitespace, strip leading/trailing ASCII punctuation from each token, count
// the tokens that remain non-empty.
std::size_t count_words(std::string_view s);

// Finds `needle` in `haystack` with both sides whitespace-collapsed. Returns
// the [begin, end) byte range of the match in the ORIGINAL haystack.
std::optional<std::pair<std::size_t, std::size_t>> find_collapsed(std::string_view haystack,
                                                                  std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

std::string to_lower_ascii(std::string_view s);

// Parses a comma-separated integer list such as "1,2,3".
std::vector<long long> parse_int_list(std::string_view s);

}  // namespace attribqa::text
