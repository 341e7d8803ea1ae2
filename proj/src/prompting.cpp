#include "attribqa/prompting.hpp"

#include <cmath>

#include "attribqa/error.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

namespace detail {
extern const std::string_view kTemplateAO;
extern const std::string_view kTemplateCoT;
extern const std::string_view kTemplateCoC;
extern const std::string_view kTemplateCoQ;
extern const std::string_view kTemplateQI;
}  // namespace detail

namespace {

// Template files start with `#` header lines; the instruction is the rest,
// without the final newline.
std::string instruction_body(std::string_view source) {
  std::string body;
  bool in_header = true;
  for (const std::string& line : text::split(source, '\n')) {
    if (in_header && !line.empty() && line[0] == '#') continue;
    in_header = false;
    if (!body.empty()) body += '\n';
    body += line;
  }
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

}  // namespace

std::size_t default_token_count(std::string_view text) {
  std::size_t words = text::split_whitespace(text).size();
  return (words * 13 + 9) / 10;
}

std::string_view instruction_template_source(PromptMode mode) {
  switch (mode) {
    case PromptMode::AO: return detail::kTemplateAO;
    case PromptMode::CoT: return detail::kTemplateCoT;
    case PromptMode::CoC: return detail::kTemplateCoC;
    case PromptMode::CoQ: return detail::kTemplateCoQ;
  }
  return {};
}

const std::string& build_instruction(PromptMode mode) {
  static const std::string ao = instruction_body(detail::kTemplateAO);
  static const std::string cot = instruction_body(detail::kTemplateCoT);
  static const std::string coc = instruction_body(detail::kTemplateCoC);
  static const std::string coq = instruction_body(detail::kTemplateCoQ);
  switch (mode) {
    case PromptMode::AO: return ao;
    case PromptMode::CoT: return cot;
    case PromptMode::CoC: return coc;
    case PromptMode::CoQ: return coq;
  }
  return ao;
}

const std::string& quote_listing_instruction() {
  static const std::string qi = instruction_body(detail::kTemplateQI);
  return qi;
}

std::string render_context(const std::vector<Document>& documents) {
  std::string out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const Document& d = documents[i];
    if (d.index != static_cast<int>(i) + 1) {
      throw DataError("document indices must run 1..n in order; found " +
                      std::to_string(d.index) + " at position " + std::to_string(i + 1));
    }
    if (i) out += '\n';
    out += "Document [" + std::to_string(d.index) + "](Title: " + d.title + "): " + d.body;
  }
  return out;
}

std::string render_question(std::string_view question, PromptMode mode) {
  std::string q(text::trim(question));
  if (mode != PromptMode::AO) {
    q += ' ';
    q += kStepByStep;
  }
  return q;
}

std::string render_user_turn(const std::vector<Document>& documents, std::string_view question,
                             PromptMode mode) {
  std::string out = render_context(documents);
  if (!out.empty()) out += "\n\n";
  out += "Question: " + render_question(question, mode) + "\n\nAnswer:";
  return out;
}

std::pair<std::string, std::string> render_demo(const Demonstration& demo, PromptMode mode) {
  parse_chain(demo.target_text, mode);
  return {render_user_turn(demo.instance.documents, demo.instance.question, mode),
          demo.target_text};
}

PromptBundle build_prompt(const QAInstance& instance, PromptMode mode,
                          const std::vector<Demonstration>& demos, std::size_t budget,
                          const TokenCounter& counter) {
  PromptBundle bundle;
  bundle.system_or_instruction = build_instruction(mode);
  bundle.final_user = render_user_turn(instance.documents, instance.question, mode);

  const std::size_t base = counter(bundle.system_or_instruction) + counter(bundle.final_user);
  if (base > budget) {
    throw UsageError("prompt without demonstrations needs " + std::to_string(base) +
                     " tokens, exceeding the budget of " + std::to_string(budget) + " by " +
                     std::to_string(base - budget));
  }

  std::vector<std::size_t> cost;
  cost.reserve(demos.size());
  for (const Demonstration& demo : demos) {
    auto turn = render_demo(demo, mode);
    cost.push_back(counter(turn.first) + counter(turn.second));
    bundle.turns.push_back(std::move(turn));
  }

  std::size_t total = base;
  for (std::size_t c : cost) total += c;
  while (!bundle.turns.empty() && total > budget) {
    total -= cost[bundle.turns.size() - 1];
    bundle.turns.pop_back();
  }
  bundle.demos_kept = bundle.turns.size();
  bundle.estimated_tokens = total;
  return bundle;
}

}  // namespace attribqa
