#pragma once

// Prompt templates and answer triggers. Template bodies ship as text assets
// under prompts/ and are compiled in; rendering is single-pass, so braces
// inside substituted model text are never expanded again.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jh/answer_format.hpp"
#include "jh/gateway.hpp"

namespace jh {

class PromptTemplate {
public:
    PromptTemplate(std::string name, std::string body);

    const std::string& name() const noexcept { return name_; }
    const std::string& body() const noexcept { return body_; }
    /// Slot names in first-appearance order, without duplicates.
    const std::vector<std::string>& slots() const noexcept { return slots_; }

    /// Throws TemplateError when a slot is unbound or a binding names no slot.
    std::string render(const std::map<std::string, std::string>& bindings) const;

private:
    std::string name_;
    std::string body_;
    std::vector<std::string> slots_;
};

/// Compiled-in template by asset name (e.g. "evaluator").
const PromptTemplate& prompt_template(std::string_view name);

/// Version tag of the shipped prompt set: "<VERSION>+<12 hex of content hash>".
const std::string& template_version();

/// Question text as shown to every model, with choices appended when present.
std::string question_prompt(std::string_view question_text,
                            const std::vector<std::pair<char, std::string>>& choices);

/// The answer and explanation of one candidate, as shown to a judge.
struct CandidateText {
    std::string answer;
    std::string explanation;
};

Messages render_persona_gen(std::string_view question);

/// With a persona: system "You are a <persona>" + user question.
/// Without: the user question alone.
Messages render_solver(const std::optional<std::string>& persona, std::string_view question);

/// Second solve stage: question, stage-one reasoning and the answer trigger
/// in one user message (after the persona system message when present).
Messages render_extraction(const std::optional<std::string>& persona, std::string_view question,
                           std::string_view explanation, AnswerFormat format);

std::string_view answer_trigger(AnswerFormat format);

/// Pairwise verdict prompt; `first` fills the assistant A slots.
Messages render_evaluator(std::string_view question, const CandidateText& first,
                          const CandidateText& second);

Messages render_portia(std::string_view question, std::string_view first_answer,
                       std::string_view second_answer, std::string_view interleaved_explanations);

Messages render_scoring(std::string_view question, const CandidateText& first,
                        const CandidateText& second);

}  // namespace jh
