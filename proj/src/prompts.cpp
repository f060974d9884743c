#include "jh/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "jh/errors.hpp"
#include "jh/hash.hpp"
#include "jh/prompt_assets.hpp"
#include "jh/text.hpp"

namespace jh {

std::string_view to_string(AnswerFormat format) {
    switch (format) {
        case AnswerFormat::arabic_number: return "arabic_number";
        case AnswerFormat::option_AE: return "option_AE";
        case AnswerFormat::option_AC: return "option_AC";
        case AnswerFormat::option_AF: return "option_AF";
        case AnswerFormat::yes_no: return "yes_no";
        case AnswerFormat::free_string: return "free_string";
    }
    return "free_string";
}

AnswerFormat answer_format_from_string(std::string_view text) {
    for (AnswerFormat f : kAllAnswerFormats) {
        if (to_string(f) == text) return f;
    }
    throw ConfigError("unknown answer format: " + std::string(text));
}

std::optional<char> last_option_letter(AnswerFormat format) {
    switch (format) {
        case AnswerFormat::option_AE: return 'E';
        case AnswerFormat::option_AC: return 'C';
        case AnswerFormat::option_AF: return 'F';
        default: return std::nullopt;
    }
}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls on_text(literal) and on_slot(name) in body order.
template <typename OnText, typename OnSlot>
void scan_template(std::string_view body, OnText on_text, OnSlot on_slot) {
    std::size_t pos = 0;
    std::size_t literal_start = 0;
    while (pos < body.size()) {
        if (body[pos] == '{' && pos + 1 < body.size() && is_ident_start(body[pos + 1])) {
            std::size_t end = pos + 1;
            while (end < body.size() && is_ident_char(body[end])) ++end;
            if (end < body.size() && body[end] == '}') {
                on_text(body.substr(literal_start, pos - literal_start));
                on_slot(body.substr(pos + 1, end - pos - 1));
                pos = end + 1;
                literal_start = pos;
                continue;
            }
        }
        ++pos;
    }
    on_text(body.substr(literal_start));
}

void require_question(std::string_view question) {
    if (trim(question).empty()) throw TemplateError("question must be non-empty");
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string body)
    : name_(std::move(name)), body_(std::move(body)) {
    scan_template(
        body_, [](std::string_view) {},
        [this](std::string_view slot) {
            if (std::find(slots_.begin(), slots_.end(), slot) == slots_.end()) {
                slots_.emplace_back(slot);
            }
        });
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
    for (const auto& [key, value] : bindings) {
        if (std::find(slots_.begin(), slots_.end(), key) == slots_.end()) {
            throw TemplateError("template '" + name_ + "' has no slot '" + key + "'");
        }
    }
    std::string out;
    out.reserve(body_.size());
    scan_template(
        body_, [&out](std::string_view text) { out.append(text); },
        [&](std::string_view slot) {
            auto it = bindings.find(std::string(slot));
            if (it == bindings.end()) {
                throw TemplateError("template '" + name_ + "': slot '" + std::string(slot) +
                                    "' is unbound");
            }
            out.append(it->second);
        });
    return out;
}

const PromptTemplate& prompt_template(std::string_view name) {
    static const std::vector<PromptTemplate> templates = [] {
        std::vector<PromptTemplate> all;
        for (const auto& asset : assets::kPromptAssets) {
            all.emplace_back(std::string(asset.name), std::string(asset.text));
        }
        return all;
    }();
    for (const auto& t : templates) {
        if (t.name() == name) return t;
    }
    throw TemplateError("no prompt asset named '" + std::string(name) + "'");
}

const std::string& template_version() {
    static const std::string version = [] {
        std::string all;
        for (const auto& asset : assets::kPromptAssets) {
            all.append(asset.name).push_back('\0');
            all.append(asset.text).push_back('\0');
        }
        return std::string(assets::kPromptSetVersion) + "+" + sha256_hex(all).substr(0, 12);
    }();
    return version;
}

std::string question_prompt(std::string_view question_text,
                            const std::vector<std::pair<char, std::string>>& choices) {
    std::string out(trim(question_text));
    if (!choices.empty()) {
        out += " Answer Choices:";
        for (const auto& [letter, text] : choices) {
            out += " (";
            out.push_back(letter);
            out += ") ";
            out += text;
        }
    }
    return out;
}

Messages render_persona_gen(std::string_view question) {
    require_question(question);
    return {
        {Role::system, prompt_template("persona_generator.system").render({})},
        {Role::user,
         prompt_template("persona_generator.user").render({{"input", std::string(question)}})},
    };
}

Messages render_solver(const std::optional<std::string>& persona, std::string_view question) {
    require_question(question);
    Messages messages;
    if (persona) {
        const auto job = trim(*persona);
        if (job.empty()) throw TemplateError("persona must be non-empty when present");
        messages.push_back({Role::system, "You are a " + std::string(job)});
    }
    messages.push_back({Role::user, std::string(question)});
    return messages;
}

Messages render_extraction(const std::optional<std::string>& persona, std::string_view question,
                           std::string_view explanation, AnswerFormat format) {
    Messages messages = render_solver(persona, question);
    std::string& body = messages.back().content;
    body += "\n";
    body += explanation;
    body += "\n";
    body += answer_trigger(format);
    return messages;
}

std::string_view answer_trigger(AnswerFormat format) {
    switch (format) {
        case AnswerFormat::arabic_number: return "Therefore, the answer (arabic numerals) is";
        case AnswerFormat::option_AE: return "Therefore, among A through E, the answer is";
        case AnswerFormat::option_AC: return "Therefore, among A through C, the answer is";
        case AnswerFormat::option_AF: return "Therefore, among A through F, the answer is";
        case AnswerFormat::yes_no: return "Therefore, the answer (Yes or No) is";
        case AnswerFormat::free_string: return "Therefore, the final answer is";
    }
    return "Therefore, the final answer is";
}

Messages render_evaluator(std::string_view question, const CandidateText& first,
                          const CandidateText& second) {
    require_question(question);
    return {{Role::user, prompt_template("evaluator").render({
                             {"question", std::string(question)},
                             {"assistantA_answer", first.answer},
                             {"assistantA_explanation", first.explanation},
                             {"assistantB_answer", second.answer},
                             {"assistantB_explanation", second.explanation},
                         })}};
}

Messages render_portia(std::string_view question, std::string_view first_answer,
                       std::string_view second_answer, std::string_view interleaved_explanations) {
    require_question(question);
    return {{Role::user, prompt_template("portia_evaluator").render({
                             {"question", std::string(question)},
                             {"assistantA_answer", std::string(first_answer)},
                             {"assistantB_answer", std::string(second_answer)},
                             {"interleaved_explanations", std::string(interleaved_explanations)},
                         })}};
}

Messages render_scoring(std::string_view question, const CandidateText& first,
                        const CandidateText& second) {
    require_question(question);
    return {{Role::user, prompt_template("mec_bpc_scoring").render({
                             {"question", std::string(question)},
                             {"assistantA_answer", first.answer},
                             {"assistantA_explanation", first.explanation},
                             {"assistantB_answer", second.answer},
                             {"assistantB_explanation", second.explanation},
                         })}};
}

}  // namespace jh
