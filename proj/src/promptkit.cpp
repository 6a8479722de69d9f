#include "stocksent/promptkit.hpp"

#include <stdexcept>

#include "stocksent/errors.hpp"

namespace stocksent {

namespace {

// Single source of truth for the prompt wording; resources/prompts/*.txt
// carry the same bytes and a test keeps them in sync.
constexpr std::string_view kSystemTemplate =
    "You are a financial analyst, who analyzes if news could have some "
    "benefits for the company {company} ({ticker}).";

constexpr std::string_view kUserTemplate =
    R"tmpl(Determine from ['1(neg)', '2', '3', '4', '5(pos)']: probabilities, from ['Advantage', 'Disadvantage']: probabilities, from ['Mostly {company}', 'Mostly competitor', 'Unrelated']: probabilities.
Format: [Sentiment: Probabilities for each sentiment, Advantage: Probabilities, Relation: Probabilities].
Alternatively, state "NA".
```{message}```)tmpl";

std::string replace_all(std::string text, std::string_view what,
                        std::string_view with) {
    size_t pos = 0;
    while ((pos = text.find(what, pos)) != std::string::npos) {
        text.replace(pos, what.size(), with);
        pos += with.size();
    }
    return text;
}

}  // namespace

std::string_view system_prompt_template() { return kSystemTemplate; }
std::string_view user_prompt_template() { return kUserTemplate; }

PromptBundle build_prompt(const CleanedMessage& message, const CompanyContext& ctx,
                          std::string_view model_id) {
    if (ctx.display_name.empty() || ctx.ticker_symbol.empty())
        throw ConfigError("company context needs a display name and a ticker");
    for (char c : ctx.ticker_symbol) {
        if (c >= 'a' && c <= 'z')
            throw ConfigError("ticker symbol must be uppercase: " + ctx.ticker_symbol);
    }
    if (message.profile != CleaningProfile::llm_profile)
        throw std::invalid_argument("build_prompt expects an llm_profile message");
    if (message.body.empty())
        throw std::invalid_argument("build_prompt expects a non-empty body");

    PromptBundle b;
    b.system_text = replace_all(
        replace_all(std::string(kSystemTemplate), "{company}", ctx.display_name),
        "{ticker}", ctx.ticker_symbol);
    std::string user = replace_all(std::string(kUserTemplate), "{company}",
                                   ctx.display_name);
    b.user_text = replace_all(std::move(user), "{message}", message.body);
    b.temperature = 0.0;
    b.model_id = std::string(model_id);
    return b;
}

std::size_t prompt_token_estimate(const PromptBundle& bundle) {
    std::size_t chars = bundle.system_text.size() + bundle.user_text.size();
    return (chars + 3) / 4;
}

std::string_view fenced_message(const PromptBundle& bundle) {
    std::string_view u = bundle.user_text;
    size_t open = u.find("```");
    if (open == std::string_view::npos) return {};
    size_t close = u.rfind("```");
    if (close == std::string_view::npos || close <= open + 3) return {};
    return u.substr(open + 3, close - open - 3);
}

std::string company_from_system_text(std::string_view system_text) {
    constexpr std::string_view anchor = "for the company ";
    size_t start = system_text.find(anchor);
    if (start == std::string_view::npos) return {};
    start += anchor.size();
    size_t paren = system_text.find(" (", start);
    if (paren == std::string_view::npos) return {};
    return std::string(system_text.substr(start, paren - start));
}

}  // namespace stocksent
