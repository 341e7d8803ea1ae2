#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attribqa/chains.hpp"
#include "attribqa/corpus.hpp"

namespace attribqa {

inline constexpr std::string_view kStepByStep = "Think step-by-step.";

// Counts tokens in one text segment.
using TokenCounter = std::function<std::size_t(std::string_view)>;

// ceil(1.3 x whitespace-separated words).
std::size_t default_token_count(std::string_view text);

// Instruction text for a mode, as stored in templates/<mode>.txt.
const std::string& build_instruction(PromptMode mode);
// Fixed instruction for the quote-identification training task.
const std::string& quote_listing_instruction();
// The full template file (header comments included) a mode's instruction was loaded from.
std::string_view instruction_template_source(PromptMode mode);

// One line per document: `Document [i](Title: <title>): <body>`.
// Throws DataError unless indices run 1..n in order.
std::string render_context(const std::vector<Document>& documents);

// Question with the step-by-step suffix for CoT/CoC/CoQ.
std::string render_question(std::string_view question, PromptMode mode);

// Context, blank line, `Question: <q>`, blank line, `Answer:`.
std::string render_user_turn(const std::vector<Document>& documents, std::string_view question,
                             PromptMode mode);

struct Demonstration {
  QAInstance instance;
  std::string target_text;
};

struct PromptBundle {
  std::string system_or_instruction;
  std::vector<std::pair<std::string, std::string>> turns;
  std::string final_user;
  std::size_t demos_kept = 0;
  std::size_t estimated_tokens = 0;
};

// Returns (user, assistant). Throws ParseError when the target does not
// parse in `mode`.
std::pair<std::string, std::string> render_demo(const Demonstration& demo, PromptMode mode);

// Places demos as dialogue turns, dropping from the end until the estimate
// fits the budget. Throws UsageError reporting the overflow when even the
// zero-demonstration prompt exceeds the budget.
PromptBundle build_prompt(const QAInstance& instance, PromptMode mode,
                          const std::vector<Demonstration>& demos, std::size_t budget,
                          const TokenCounter& counter = default_token_count);

}  // namespace attribqa
