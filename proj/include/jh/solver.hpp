#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "jh/answer.hpp"
#include "jh/dataset.hpp"
#include "jh/gateway.hpp"
#include "jh/persona.hpp"
#include "jh/prompts.hpp"

namespace jh {

enum class SolverId { neutral, persona };

std::string_view to_string(SolverId id);
SolverId solver_id_from_string(std::string_view text);

struct Solution {
    SolverId solver_id = SolverId::neutral;
    std::optional<Persona> persona;
    std::string explanation;  // stage-one reasoning
    std::string raw_answer;   // stage-two text
    NormalizedAnswer answer;
};

/// Answer/explanation pair shown to judges. An unextracted answer falls back
/// to the trimmed stage-two text.
CandidateText candidate_text(const Solution& solution);

/// Two-stage zero-shot CoT: reason, then answer after the format's trigger.
/// Exactly two calls (stages solve and extract). The persona system message
/// is kept for the extraction call.
Solution solve(const QuestionRecord& question, const std::optional<Persona>& persona,
               const StageModels& models, const CallContext& calls, std::uint64_t slot_index);

nlohmann::json to_json(const Solution& solution);
Solution solution_from_json(const nlohmann::json& j);

}  // namespace jh
