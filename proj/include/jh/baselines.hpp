#pragma once

// Comparison methods: self-consistency voting, Portia chunk interleaving and
// MEC+BPC score averaging.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jh/evaluator.hpp"

namespace jh {

struct VoteBudget {
    double avg_jh_runs = 0.0;
    int base_k = 0;
    int persona_k = 0;
};

/// base_k = ceil(n); persona_k = max(6, 2 * ceil(n / 2)).
VoteBudget vote_budget(double avg_jh_runs);

/// Most frequent non-none answer; ties go to the earliest first occurrence.
/// Returns none only when every vote is none (or there are no votes).
NormalizedAnswer majority_vote(const std::vector<NormalizedAnswer>& votes, AnswerFormat format);

struct VoteResult {
    NormalizedAnswer answer;
    std::vector<Solution> samples;
};

/// m solver runs with fresh samples. In persona mode m must be even and
/// m / 2 persona-generate + solve pairs are run.
VoteResult self_consistency(const QuestionRecord& question, bool persona_mode, int m,
                            const StageModels& models, const CallContext& calls,
                            std::uint64_t repetition = 0);

/// Whitespace tokens split into `parts` chunks of near-equal size; the
/// remainder goes to the earlier chunks.
std::vector<std::vector<std::string>> split_chunks(const std::string& text, std::size_t parts = 3);

/// Labelled A1, B1, A2, B2, A3, B3 block.
std::string interleave_explanations(const std::string& first, const std::string& second);

/// One judge call over the interleaved prompt; A = neutral, B = persona.
JudgeOutcome portia_judge(const QuestionRecord& question, const Solution& neutral,
                          const Solution& persona, const JudgeConfig& config,
                          const ModelEndpoint& evaluator, const CallContext& calls,
                          std::uint64_t repetition = 0);

struct ScoredSample {
    Order order = Order::forward;
    int score_first = 0;
    int score_second = 0;
};

/// Three scored samples per presentation order.
struct ScoreSheet {
    std::vector<ScoredSample> samples;

    void validate() const;
    double neutral_mean() const;
    double persona_mean() const;
    /// Higher mean wins; exact tie goes to neutral.
    Decision decision() const;
};

/// First two integers in [1, 10] after the last "Scores:" marker (or in the
/// whole text when there is no marker).
std::optional<std::array<int, 2>> parse_scores(std::string_view text);

inline constexpr int kScoringSamplesPerOrder = 3;

/// Six scoring calls (three per order); per-solution means over both orders.
JudgeOutcome mec_bpc_judge(const QuestionRecord& question, const Solution& neutral,
                           const Solution& persona, const JudgeConfig& config,
                           const ModelEndpoint& scorer, const CallContext& calls,
                           std::uint64_t repetition = 0, ScoreSheet* sheet_out = nullptr);

}  // namespace jh
