#include "attribqa/chains.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>

#include "attribqa/error.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

namespace {

constexpr std::string_view kLeftCurly = "\xE2\x80\x9C";   // U+201C
constexpr std::string_view kRightCurly = "\xE2\x80\x9D";  // U+201D

constexpr std::array<std::string_view, 18> kTitleAbbreviations = {
    "Mr", "Mrs", "Ms", "Dr", "Prof", "St", "vs", "Mt", "Ft",
    "Gen", "Col", "Lt", "Sgt", "Capt", "Rev", "No", "Messrs", "Hon"};

bool starts_with_at(std::string_view s, std::size_t i, std::string_view prefix) {
  return s.substr(i, prefix.size()) == prefix;
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

// True when the '.' at `dot` closes an abbreviation ("U.S.", "J.", "Dr.")
// rather than a sentence.
bool is_abbreviation_dot(std::string_view s, std::size_t dot) {
  if (dot == 0) return false;
  if (s[dot - 1] == '.') return false;
  std::size_t b = dot;
  while (b > 0 && !text::is_space(s[b - 1]) && s[b - 1] != '(' && s[b - 1] != '"') --b;
  std::string_view token = s.substr(b, dot - b);
  if (token.empty()) return false;
  if (token.size() == 1 && is_upper(token[0])) return true;
  // Dotted forms such as "U.S", "e.g", "D.C".
  if (token.find('.') != std::string_view::npos && is_alpha(token.back())) {
    std::size_t last_dot = token.rfind('.');
    if (token.size() - last_dot - 1 <= 2) return true;
  }
  return std::find(kTitleAbbreviations.begin(), kTitleAbbreviations.end(), token) !=
         kTitleAbbreviations.end();
}

std::string clean_answer(std::string_view s) {
  std::string_view t = text::trim(s);
  if (!t.empty() && t.back() == '.' && !is_abbreviation_dot(t, t.size() - 1)) {
    t = text::trim(t.substr(0, t.size() - 1));
  }
  return std::string(t);
}

struct CitationGroup {
  std::size_t end = 0;
  std::vector<int> indices;
};

// `[n]` or `[n, m, ...]` starting at s[i] == '['.
std::optional<CitationGroup> parse_citation_group(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '[') return std::nullopt;
  CitationGroup g;
  std::size_t j = i + 1;
  while (true) {
    while (j < s.size() && s[j] == ' ') ++j;
    std::size_t start = j;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j == start || j - start > 9) return std::nullopt;
    int v = 0;
    std::from_chars(s.data() + start, s.data() + j, v);
    g.indices.push_back(v);
    while (j < s.size() && s[j] == ' ') ++j;
    if (j < s.size() && s[j] == ',') {
      ++j;
      continue;
    }
    if (j < s.size() && s[j] == ']') {
      g.end = j + 1;
      return g;
    }
    return std::nullopt;
  }
}

std::size_t skip_spaces(std::string_view s, std::size_t j) {
  while (j < s.size() && text::is_space(s[j])) ++j;
  return j;
}

// One or more citation groups, optionally separated by spaces.
std::optional<CitationGroup> parse_citation_run(std::string_view s, std::size_t i) {
  auto first = parse_citation_group(s, i);
  if (!first) return std::nullopt;
  CitationGroup run = *first;
  while (true) {
    std::size_t j = skip_spaces(s, run.end);
    auto next = parse_citation_group(s, j);
    if (!next) break;
    run.indices.insert(run.indices.end(), next->indices.begin(), next->indices.end());
    run.end = next->end;
  }
  return run;
}

struct QuoteSpan {
  std::size_t end = 0;  // one past the closing delimiter
  std::string text;
};

std::optional<QuoteSpan> parse_quoted(std::string_view s, std::size_t j) {
  std::size_t open_len = 0;
  bool curly = false;
  if (starts_with_at(s, j, "\"")) {
    open_len = 1;
  } else if (starts_with_at(s, j, kLeftCurly)) {
    open_len = kLeftCurly.size();
    curly = true;
  } else {
    return std::nullopt;
  }
  std::size_t body = j + open_len;
  std::size_t close = std::string_view::npos;
  std::size_t close_len = 0;
  for (std::size_t k = body; k < s.size(); ++k) {
    if (s[k] == '"') {
      close = k;
      close_len = 1;
      break;
    }
    if (curly && starts_with_at(s, k, kRightCurly)) {
      close = k;
      close_len = kRightCurly.size();
      break;
    }
  }
  if (close == std::string_view::npos) return std::nullopt;
  return QuoteSpan{close + close_len, std::string(text::trim(s.substr(body, close - body)))};
}

struct QuoteParenthetical {
  std::size_t end = 0;
  std::vector<Quote> quotes;
  std::vector<int> citations;
};

// `("quote" [n])`, also `("q1" [n]; "q2" [m])`, starting at s[i] == '('.
std::optional<QuoteParenthetical> parse_quote_parenthetical(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '(') return std::nullopt;
  QuoteParenthetical out;
  std::size_t j = i + 1;
  while (true) {
    j = skip_spaces(s, j);
    auto quoted = parse_quoted(s, j);
    if (!quoted) return std::nullopt;
    j = skip_spaces(s, quoted->end);
    auto cites = parse_citation_run(s, j);
    if (!cites) return std::nullopt;
    out.quotes.push_back(Quote{quoted->text, cites->indices.front()});
    out.citations.insert(out.citations.end(), cites->indices.begin(), cites->indices.end());
    j = skip_spaces(s, cites->end);
    if (j < s.size() && s[j] == ')') {
      out.end = j + 1;
      return out;
    }
    if (j < s.size() && (s[j] == ';' || s[j] == ',')) {
      ++j;
      continue;
    }
    return std::nullopt;
  }
}

bool straight_quotes_balanced(std::string_view s) {
  return std::count(s.begin(), s.end(), '"') % 2 == 0;
}

// Splits on sentence-ending periods outside quotes and parentheses. Citation
// groups that directly follow a period are pulled back into that sentence.
std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  const bool track_straight = straight_quotes_balanced(s);
  int depth = 0;
  bool in_quote = false;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (starts_with_at(s, i, kLeftCurly)) {
      in_quote = true;
      i += kLeftCurly.size();
      continue;
    }
    if (starts_with_at(s, i, kRightCurly)) {
      in_quote = false;
      i += kRightCurly.size();
      continue;
    }
    char c = s[i];
    if (c == '"' && track_straight) {
      in_quote = !in_quote;
    } else if (!in_quote && c == '(') {
      ++depth;
    } else if (!in_quote && c == ')') {
      depth = depth > 0 ? depth - 1 : 0;
    } else if (c == '.' && depth == 0 && !in_quote &&
               (i + 1 == s.size() || text::is_space(s[i + 1])) && !is_abbreviation_dot(s, i)) {
      std::string sentence(s.substr(start, i - start));
      std::size_t next = i + 1;
      std::size_t j = skip_spaces(s, next);
      if (auto trailing = parse_citation_run(s, j)) {
        sentence += ' ';
        sentence.append(s.substr(j, trailing->end - j));
        next = trailing->end;
      }
      out.push_back(std::move(sentence));
      start = next;
      i = next;
      continue;
    }
    ++i;
  }
  if (start < s.size()) out.emplace_back(s.substr(start));
  return out;
}

void trim_back(std::string& buf) {
  while (!buf.empty() && text::is_space(buf.back())) buf.pop_back();
}

ReasoningStep parse_step(std::string_view sentence) {
  ReasoningStep step;
  std::string claim;
  std::size_t i = 0;
  while (i < sentence.size()) {
    char c = sentence[i];
    if (c == '(') {
      if (auto qp = parse_quote_parenthetical(sentence, i)) {
        trim_back(claim);
        step.quotes.insert(step.quotes.end(), qp->quotes.begin(), qp->quotes.end());
        step.citations.insert(step.citations.end(), qp->citations.begin(), qp->citations.end());
        i = qp->end;
        continue;
      }
    } else if (c == '[') {
      if (auto group = parse_citation_group(sentence, i)) {
        trim_back(claim);
        step.citations.insert(step.citations.end(), group->indices.begin(), group->indices.end());
        i = group->end;
        continue;
      }
    }
    claim.push_back(c);
    ++i;
  }
  step.claim = std::string(text::trim(claim));
  return step;
}

int rank(PromptMode m) { return static_cast<int>(m); }

}  // namespace

PromptMode parse_mode(std::string_view name) {
  std::string n = text::to_lower_ascii(name);
  if (n == "ao") return PromptMode::AO;
  if (n == "cot") return PromptMode::CoT;
  if (n == "coc") return PromptMode::CoC;
  if (n == "coq") return PromptMode::CoQ;
  throw UsageError("unknown mode: " + std::string(name));
}

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::AO: return "ao";
    case PromptMode::CoT: return "cot";
    case PromptMode::CoC: return "coc";
    case PromptMode::CoQ: return "coq";
  }
  return "?";
}

std::vector<int> AttributionChain::all_citations() const {
  std::vector<int> out;
  for (const auto& s : steps) out.insert(out.end(), s.citations.begin(), s.citations.end());
  return out;
}

std::vector<Quote> AttributionChain::all_quotes() const {
  std::vector<Quote> out;
  for (const auto& s : steps) out.insert(out.end(), s.quotes.begin(), s.quotes.end());
  return out;
}

PromptMode AttributionChain::information_level() const {
  bool citations = false;
  for (const auto& s : steps) {
    if (!s.quotes.empty()) return PromptMode::CoQ;
    citations = citations || !s.citations.empty();
  }
  if (citations) return PromptMode::CoC;
  return steps.empty() ? PromptMode::AO : PromptMode::CoT;
}

std::string extract_answer(std::string_view text) {
  std::size_t pos = text.rfind(kAnswerMarker);
  if (pos == std::string_view::npos) return std::string(text::trim(text));
  return clean_answer(text.substr(pos + kAnswerMarker.size()));
}

AttributionChain parse_chain(std::string_view text, PromptMode mode) {
  AttributionChain chain;
  chain.raw = std::string(text);
  if (mode == PromptMode::AO) {
    chain.answer = extract_answer(text);
    if (chain.answer.empty()) throw ParseError("empty answer");
    return chain;
  }

  std::size_t pos = text.rfind(kAnswerMarker);
  if (pos == std::string_view::npos) throw ParseError("no answer marker");
  chain.answer = clean_answer(text.substr(pos + kAnswerMarker.size()));
  if (chain.answer.empty()) throw ParseError("empty answer");

  // Citations stranded without a claim attach to the neighbouring step.
  std::vector<int> pending_citations;
  std::vector<Quote> pending_quotes;
  for (const std::string& sentence : split_sentences(text.substr(0, pos))) {
    ReasoningStep step = parse_step(sentence);
    if (step.claim.empty()) {
      if (!chain.steps.empty()) {
        auto& prev = chain.steps.back();
        prev.citations.insert(prev.citations.end(), step.citations.begin(), step.citations.end());
        prev.quotes.insert(prev.quotes.end(), step.quotes.begin(), step.quotes.end());
      } else {
        pending_citations.insert(pending_citations.end(), step.citations.begin(),
                                 step.citations.end());
        pending_quotes.insert(pending_quotes.end(), step.quotes.begin(), step.quotes.end());
      }
      continue;
    }
    if (!pending_citations.empty() || !pending_quotes.empty()) {
      step.citations.insert(step.citations.begin(), pending_citations.begin(),
                            pending_citations.end());
      step.quotes.insert(step.quotes.begin(), pending_quotes.begin(), pending_quotes.end());
      pending_citations.clear();
      pending_quotes.clear();
    }
    chain.steps.push_back(std::move(step));
  }
  return chain;
}

AttributionChain convert(const AttributionChain& chain, PromptMode target) {
  PromptMode level = chain.information_level();
  if (rank(target) > rank(level)) {
    throw UsageError("conversion from " + std::string(to_string(level)) + " to " +
                     std::string(to_string(target)) + " would add information");
  }
  AttributionChain out = chain;
  switch (target) {
    case PromptMode::CoQ:
      break;
    case PromptMode::CoC:
      for (auto& s : out.steps) s.quotes.clear();
      break;
    case PromptMode::CoT:
      for (auto& s : out.steps) {
        s.quotes.clear();
        s.citations.clear();
      }
      break;
    case PromptMode::AO:
      out.steps.clear();
      break;
  }
  return out;
}

std::string render_chain(const AttributionChain& chain, PromptMode mode) {
  if (chain.answer.empty()) throw DataError("chain has no answer");
  if (mode == PromptMode::AO) return chain.answer;

  std::string out;
  for (std::size_t k = 0; k < chain.steps.size(); ++k) {
    const ReasoningStep& step = chain.steps[k];
    if (step.claim.empty()) throw DataError("step " + std::to_string(k + 1) + " has no claim");
    if (!out.empty()) out += ' ';
    out += step.claim;
    if (mode == PromptMode::CoC) {
      if (step.citations.empty()) {
        throw DataError("step " + std::to_string(k + 1) + " has no citation");
      }
      for (int c : step.citations) out += " [" + std::to_string(c) + "]";
    } else if (mode == PromptMode::CoQ) {
      if (step.quotes.empty()) throw DataError("step " + std::to_string(k + 1) + " has no quote");
      std::vector<int> bare = step.citations;
      for (const Quote& q : step.quotes) {
        out += " (\"" + q.text + "\" [" + std::to_string(q.doc) + "])";
        auto it = std::find(bare.begin(), bare.end(), q.doc);
        if (it != bare.end()) bare.erase(it);
      }
      for (int c : bare) out += " [" + std::to_string(c) + "]";
    }
    out += '.';
  }
  if (!out.empty()) out += ' ';
  out += kAnswerMarker;
  out += ' ';
  out += chain.answer;
  return out;
}

AttributionChain remap_citations(const AttributionChain& chain,
                                 const std::map<int, int>& index_map) {
  auto lookup = [&](int idx) {
    auto it = index_map.find(idx);
    if (it == index_map.end()) throw DataError("unmapped citation " + std::to_string(idx));
    return it->second;
  };
  AttributionChain out = chain;
  for (auto& s : out.steps) {
    for (int& c : s.citations) c = lookup(c);
    for (Quote& q : s.quotes) q.doc = lookup(q.doc);
  }
  return out;
}

}  // namespace attribqa
