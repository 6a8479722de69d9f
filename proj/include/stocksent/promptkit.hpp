#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "stocksent/textprep.hpp"

namespace stocksent {

/// Company the analysis prompt is parameterized with.
struct CompanyContext {
    std::string display_name;   // "Apple"
    std::string ticker_symbol;  // "AAPL", uppercase

    bool operator==(const CompanyContext&) const = default;
};

/// A complete chat request: system + user message, pinned temperature.
struct PromptBundle {
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;
    std::string model_id;

    bool operator==(const PromptBundle&) const = default;
};

// The instruction templates, byte-identical to the text resources under
// resources/prompts/. Placeholders: {company}, {ticker}, {message}.
std::string_view system_prompt_template();
std::string_view user_prompt_template();

/// Renders the scoring prompt for one llm-profile cleaned message. The
/// message body goes between triple-backtick fences; everything outside the
/// fences and the company slots is byte-identical across messages.
PromptBundle build_prompt(const CleanedMessage& message, const CompanyContext& ctx,
                          std::string_view model_id = "gpt-4");

/// Order-of-magnitude token count for the cost ledger: ceil(chars / 4) over
/// both texts. Deterministic and monotone in the message length.
std::size_t prompt_token_estimate(const PromptBundle& bundle);

/// The message body a bundle was rendered from (text between the fences).
/// Used by offline providers that key on the cleaned body.
std::string_view fenced_message(const PromptBundle& bundle);

/// Company display name recovered from the system text.
std::string company_from_system_text(std::string_view system_text);

}  // namespace stocksent
