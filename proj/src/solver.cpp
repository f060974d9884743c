#include "jh/solver.hpp"

#include "jh/errors.hpp"
#include "jh/text.hpp"

namespace jh {

using nlohmann::json;

std::string_view to_string(SolverId id) { return id == SolverId::neutral ? "neutral" : "persona"; }

SolverId solver_id_from_string(std::string_view text) {
    if (text == "neutral") return SolverId::neutral;
    if (text == "persona") return SolverId::persona;
    throw SchemaError("unknown solver id: " + std::string(text));
}

CandidateText candidate_text(const Solution& solution) {
    std::string answer = solution.answer.render();
    if (answer.empty()) answer = std::string(trim(solution.raw_answer));
    if (answer.empty()) answer = "none";
    return {std::move(answer), solution.explanation};
}

Solution solve(const QuestionRecord& question, const std::optional<Persona>& persona,
               const StageModels& models, const CallContext& calls, std::uint64_t slot_index) {
    const std::string prompt = question.prompt();
    std::optional<std::string> job;
    if (persona) job = persona->job;

    const auto reasoning = calls.complete(
        make_request(models.solve, Stage::solve, render_solver(job, prompt), slot_index));
    if (trim(reasoning.content).empty()) {
        throw SolverError(question.id + ": solver returned an empty explanation");
    }

    const auto extraction = calls.complete(make_request(
        models.extract, Stage::extract,
        render_extraction(job, prompt, reasoning.content, question.format), slot_index));

    Solution s;
    s.solver_id = persona ? SolverId::persona : SolverId::neutral;
    s.persona = persona;
    s.explanation = reasoning.content;
    s.raw_answer = extraction.content;
    s.answer = normalize(extraction.content, question.format);
    return s;
}

json to_json(const Solution& s) {
    json j = {
        {"solver", to_string(s.solver_id)},
        {"persona", nullptr},
        {"explanation", s.explanation},
        {"raw_answer", s.raw_answer},
        {"answer", to_json(s.answer)},
    };
    if (s.persona) {
        j["persona"] = {{"job", s.persona->job},
                        {"origin", to_string(s.persona->origin)},
                        {"generator_model", s.persona->generator_model
                                                ? json(*s.persona->generator_model)
                                                : json(nullptr)}};
    }
    return j;
}

Solution solution_from_json(const json& j) {
    Solution s;
    s.solver_id = solver_id_from_string(j.at("solver").get<std::string>());
    if (const auto& p = j.at("persona"); !p.is_null()) {
        Persona persona;
        persona.job = p.at("job").get<std::string>();
        persona.origin = p.at("origin").get<std::string>() == "handcrafted" ? PersonaOrigin::handcrafted
                                                                            : PersonaOrigin::generated;
        if (const auto& g = p.at("generator_model"); !g.is_null()) {
            persona.generator_model = g.get<std::string>();
        }
        s.persona = std::move(persona);
    }
    s.explanation = j.at("explanation").get<std::string>();
    s.raw_answer = j.at("raw_answer").get<std::string>();
    s.answer = normalized_answer_from_json(j.at("answer"));
    return s;
}

}  // namespace jh
