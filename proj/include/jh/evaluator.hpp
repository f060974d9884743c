#pragma once

// Pairwise judge with order-swapped consistency verification.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jh/solver.hpp"

namespace jh {

enum class ComparisonMode {
    normalized,  // both orders must prefer the same solution
    literal,     // both orders must emit the same letter
};

std::string_view to_string(ComparisonMode mode);
ComparisonMode comparison_mode_from_string(std::string_view text);

struct JudgeConfig {
    int max_attempts = 5;  // k
    double temperature = 0.7;
    ComparisonMode comparison_mode = ComparisonMode::normalized;

    void validate() const;
};

/// Presentation order of one evaluation.
enum class Order { forward, reverse };  // forward = (neutral, persona)

std::string_view to_string(Order order);

struct Verdict {
    char letter = 'A';
    SolverId prefers = SolverId::neutral;
};

enum class Decision { neutral, persona, cant_answer };

std::string_view to_string(Decision decision);
Decision decision_from_string(std::string_view text);
Decision decision_for(SolverId id);

struct VerdictRecord {
    Order order = Order::forward;
    std::optional<char> letter;  // empty when no verdict could be parsed
};

struct JudgeOutcome {
    Decision decision = Decision::cant_answer;
    int trials = 1;
    std::vector<VerdictRecord> verdict_history;
};

nlohmann::json to_json(const JudgeOutcome& outcome);
JudgeOutcome judge_outcome_from_json(const nlohmann::json& j);

/// Last "[[A]]"/"[[B]]" in the text; single brackets are accepted when no
/// double-bracket verdict exists.
std::optional<char> parse_verdict(std::string_view text);

/// One evaluation of (first, second); `first` fills the assistant A slots.
/// Up to two re-asks when the reply carries no bracketed verdict.
Verdict judge_once(const QuestionRecord& question, const Solution& first, const Solution& second,
                   const JudgeConfig& config, const ModelEndpoint& evaluator,
                   const CallContext& calls, std::uint64_t slot_index);

/// Up to k paired trials in both orders; abstains after k disagreements.
JudgeOutcome robust_judge(const QuestionRecord& question, const Solution& neutral,
                          const Solution& persona, const JudgeConfig& config,
                          const ModelEndpoint& evaluator, const CallContext& calls,
                          std::uint64_t repetition = 0);

/// Upper bound: picks a correct solution whenever one exists; no model calls.
JudgeOutcome oracle_judge(const Solution& neutral, const Solution& persona,
                          const NormalizedAnswer& gold);

}  // namespace jh
