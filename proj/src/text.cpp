#include "attribqa/text.hpp"

#include <charconv>

#include "attribqa/error.hpp"

namespace attribqa::text {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) noexcept {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t count_words(std::string_view s) {
  std::size_t n = 0;
  for (std::string_view tok : split_whitespace(s)) {
    std::size_t b = 0;
    std::size_t e = tok.size();
    while (b < e && is_ascii_punct(tok[b])) ++b;
    while (e > b && is_ascii_punct(tok[e - 1])) --e;
    if (e > b) ++n;
  }
  return n;
}

std::optional<std::pair<std::size_t, std::size_t>> find_collapsed(std::string_view haystack,
                                                                  std::string_view needle) {
  const std::string want = collapse_whitespace(needle);
  if (want.empty()) return std::nullopt;

  std::string flat;
  std::vector<std::size_t> origin;
  flat.reserve(haystack.size());
  origin.reserve(haystack.size());
  bool pending_space = false;
  std::size_t space_pos = 0;
  for (std::size_t i = 0; i < haystack.size(); ++i) {
    char c = haystack[i];
    if (is_space(c)) {
      if (!pending_space && !flat.empty()) space_pos = i;
      pending_space = !flat.empty();
      continue;
    }
    if (pending_space) {
      flat.push_back(' ');
      origin.push_back(space_pos);
    }
    pending_space = false;
    flat.push_back(c);
    origin.push_back(i);
  }

  std::size_t pos = flat.find(want);
  if (pos == std::string::npos) return std::nullopt;
  return std::make_pair(origin[pos], origin[pos + want.size() - 1] + 1);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                   : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<long long> parse_int_list(std::string_view s) {
  std::vector<long long> out;
  if (trim(s).empty()) return out;
  for (const std::string& part : split(s, ',')) {
    std::string_view t = trim(part);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw UsageError("not an integer list: " + std::string(s));
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace attribqa::text
