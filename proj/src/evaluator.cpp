#include "jh/evaluator.hpp"

#include <regex>

#include "jh/errors.hpp"
#include "jh/sampling.hpp"

namespace jh {

using nlohmann::json;

std::string_view to_string(ComparisonMode mode) {
    return mode == ComparisonMode::normalized ? "normalized" : "literal";
}

ComparisonMode comparison_mode_from_string(std::string_view text) {
    if (text == "normalized") return ComparisonMode::normalized;
    if (text == "literal") return ComparisonMode::literal;
    throw ConfigError("unknown comparison mode: " + std::string(text));
}

void JudgeConfig::validate() const {
    if (max_attempts < 1) throw ConfigError("k (max attempts) must be >= 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("judge temperature outside [0, 2]");
}

std::string_view to_string(Order order) { return order == Order::forward ? "forward" : "reverse"; }

std::string_view to_string(Decision decision) {
    switch (decision) {
        case Decision::neutral: return "neutral";
        case Decision::persona: return "persona";
        case Decision::cant_answer: return "cant_answer";
    }
    return "cant_answer";
}

Decision decision_from_string(std::string_view text) {
    if (text == "neutral") return Decision::neutral;
    if (text == "persona") return Decision::persona;
    if (text == "cant_answer") return Decision::cant_answer;
    throw SchemaError("unknown decision: " + std::string(text));
}

Decision decision_for(SolverId id) {
    return id == SolverId::neutral ? Decision::neutral : Decision::persona;
}

json to_json(const JudgeOutcome& outcome) {
    json history = json::array();
    for (const auto& v : outcome.verdict_history) {
        history.push_back({{"order", to_string(v.order)},
                           {"letter", v.letter ? json(std::string(1, *v.letter)) : json(nullptr)}});
    }
    return {{"decision", to_string(outcome.decision)},
            {"trials", outcome.trials},
            {"verdicts", history}};
}

JudgeOutcome judge_outcome_from_json(const json& j) {
    JudgeOutcome o;
    o.decision = decision_from_string(j.at("decision").get<std::string>());
    o.trials = j.at("trials").get<int>();
    for (const auto& v : j.at("verdicts")) {
        VerdictRecord r;
        r.order = v.at("order").get<std::string>() == "forward" ? Order::forward : Order::reverse;
        if (const auto& l = v.at("letter"); !l.is_null()) r.letter = l.get<std::string>().at(0);
        o.verdict_history.push_back(r);
    }
    return o;
}

namespace {

std::optional<char> last_match(std::string_view text, const std::regex& pattern) {
    std::optional<char> letter;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
        letter = static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0])));
    }
    return letter;
}

}  // namespace

std::optional<char> parse_verdict(std::string_view text) {
    static const std::regex kDouble(R"(\[\[\s*([ABab])\s*\]\])");
    static const std::regex kSingle(R"(\[\s*([ABab])\s*\])");
    if (auto letter = last_match(text, kDouble)) return letter;
    return last_match(text, kSingle);
}

Verdict judge_once(const QuestionRecord& question, const Solution& first, const Solution& second,
                   const JudgeConfig& config, const ModelEndpoint& evaluator,
                   const CallContext& calls, std::uint64_t slot_index) {
    ModelEndpoint endpoint = evaluator;
    endpoint.temperature = config.temperature;
    const Messages messages =
        render_evaluator(question.prompt(), candidate_text(first), candidate_text(second));
    for (int ask = 0; ask < 3; ++ask) {
        const auto response = calls.complete(
            make_request(endpoint, Stage::evaluate, messages, with_reask(slot_index, ask)));
        if (auto letter = parse_verdict(response.content)) {
            return Verdict{*letter, *letter == 'A' ? first.solver_id : second.solver_id};
        }
    }
    throw VerdictParseError(question.id + ": no bracketed verdict after 3 asks");
}

JudgeOutcome robust_judge(const QuestionRecord& question, const Solution& neutral,
                          const Solution& persona, const JudgeConfig& config,
                          const ModelEndpoint& evaluator, const CallContext& calls,
                          std::uint64_t repetition) {
    config.validate();
    JudgeOutcome outcome;
    for (int t = 1; t <= config.max_attempts; ++t) {
        outcome.trials = t;
        const std::uint64_t slot = 2 * static_cast<std::uint64_t>(t - 1);
        std::optional<Verdict> forward;
        std::optional<Verdict> reverse;
        try {
            forward = judge_once(question, neutral, persona, config, evaluator, calls,
                                 sample_slot(repetition, slot));
        } catch (const VerdictParseError&) {
        }
        outcome.verdict_history.push_back(
            {Order::forward, forward ? std::optional<char>(forward->letter) : std::nullopt});
        try {
            reverse = judge_once(question, persona, neutral, config, evaluator, calls,
                                 sample_slot(repetition, slot + 1));
        } catch (const VerdictParseError&) {
        }
        outcome.verdict_history.push_back(
            {Order::reverse, reverse ? std::optional<char>(reverse->letter) : std::nullopt});

        if (!forward || !reverse) continue;
        if (config.comparison_mode == ComparisonMode::normalized) {
            if (forward->prefers == reverse->prefers) {
                outcome.decision = decision_for(forward->prefers);
                return outcome;
            }
        } else if (forward->letter == reverse->letter) {
            // Literal agreement: the forward letter names the chosen solution.
            outcome.decision = decision_for(forward->prefers);
            return outcome;
        }
    }
    outcome.decision = Decision::cant_answer;
    return outcome;
}

JudgeOutcome oracle_judge(const Solution& neutral, const Solution& persona,
                          const NormalizedAnswer& gold) {
    JudgeOutcome outcome;
    outcome.trials = 1;
    const bool neutral_right = answers_equal(neutral.answer, gold);
    const bool persona_right = answers_equal(persona.answer, gold);
    outcome.decision = persona_right && !neutral_right ? Decision::persona : Decision::neutral;
    return outcome;
}

}  // namespace jh
