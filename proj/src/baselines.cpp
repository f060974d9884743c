#include "jh/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "jh/errors.hpp"
#include "jh/sampling.hpp"
#include "jh/text.hpp"

namespace jh {

VoteBudget vote_budget(double n) {
    if (!(n > 0.0)) throw ConfigError("average J&H runs must be positive");
    VoteBudget b;
    b.avg_jh_runs = n;
    b.base_k = static_cast<int>(std::ceil(n));
    b.persona_k = std::max(6, 2 * static_cast<int>(std::ceil(n / 2.0)));
    return b;
}

NormalizedAnswer majority_vote(const std::vector<NormalizedAnswer>& votes, AnswerFormat format) {
    // Distinct answers in first-occurrence order with their counts.
    std::vector<std::pair<NormalizedAnswer, int>> tally;
    for (const auto& vote : votes) {
        if (vote.is_none()) continue;
        auto it = std::find_if(tally.begin(), tally.end(),
                               [&](const auto& entry) { return answers_equal(entry.first, vote); });
        if (it == tally.end()) {
            tally.emplace_back(vote, 1);
        } else {
            ++it->second;
        }
    }
    if (tally.empty()) return NormalizedAnswer::none(format);
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

VoteResult self_consistency(const QuestionRecord& question, bool persona_mode, int m,
                            const StageModels& models, const CallContext& calls,
                            std::uint64_t repetition) {
    if (m < 1) throw ConfigError("self-consistency needs m >= 1");
    if (persona_mode && m % 2 != 0) {
        throw ConfigError("persona self-consistency needs an even m (generator + solver per sample)");
    }
    const int samples = persona_mode ? m / 2 : m;
    VoteResult result;
    std::vector<NormalizedAnswer> votes;
    for (int j = 0; j < samples; ++j) {
        const auto slot = sample_slot(repetition, static_cast<std::uint64_t>(j));
        std::optional<Persona> persona;
        if (persona_mode) persona = generate_persona(question.prompt(), models.persona_gen, calls, slot);
        result.samples.push_back(solve(question, persona, models, calls, slot));
        votes.push_back(result.samples.back().answer);
    }
    result.answer = majority_vote(votes, question.format);
    return result;
}

std::vector<std::vector<std::string>> split_chunks(const std::string& text, std::size_t parts) {
    if (parts == 0) throw ConfigError("split_chunks: parts must be >= 1");
    const auto tokens = split_whitespace(text);
    const std::size_t base = tokens.size() / parts;
    const std::size_t extra = tokens.size() % parts;
    std::vector<std::vector<std::string>> chunks;
    std::size_t next = 0;
    for (std::size_t i = 0; i < parts; ++i) {
        const std::size_t size = base + (i < extra ? 1 : 0);
        chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(next),
                            tokens.begin() + static_cast<std::ptrdiff_t>(next + size));
        next += size;
    }
    return chunks;
}

std::string interleave_explanations(const std::string& first, const std::string& second) {
    constexpr std::size_t kParts = 3;
    const auto a = split_chunks(first, kParts);
    const auto b = split_chunks(second, kParts);
    std::string out;
    auto append = [&out](char who, std::size_t part, const std::vector<std::string>& tokens) {
        if (!out.empty()) out += "\n\n";
        out += "assistant ";
        out.push_back(who);
        out += "'s explanation (part " + std::to_string(part + 1) + " of " +
               std::to_string(kParts) + "):";
        for (const auto& t : tokens) {
            out.push_back(' ');
            out += t;
        }
    };
    for (std::size_t i = 0; i < kParts; ++i) {
        append('A', i, a[i]);
        append('B', i, b[i]);
    }
    return out;
}

JudgeOutcome portia_judge(const QuestionRecord& question, const Solution& neutral,
                          const Solution& persona, const JudgeConfig& config,
                          const ModelEndpoint& evaluator, const CallContext& calls,
                          std::uint64_t repetition) {
    if (trim(neutral.explanation).empty() || trim(persona.explanation).empty()) {
        throw ConfigError("portia needs two non-empty explanations");
    }
    ModelEndpoint endpoint = evaluator;
    endpoint.temperature = config.temperature;
    const auto first = candidate_text(neutral);
    const auto second = candidate_text(persona);
    const Messages messages =
        render_portia(question.prompt(), first.answer, second.answer,
                      interleave_explanations(neutral.explanation, persona.explanation));
    for (int ask = 0; ask < 3; ++ask) {
        const auto response = calls.complete(make_request(
            endpoint, Stage::evaluate, messages, with_reask(sample_slot(repetition, 0), ask)));
        if (auto letter = parse_verdict(response.content)) {
            JudgeOutcome outcome;
            outcome.trials = 1;
            outcome.decision = *letter == 'A' ? Decision::neutral : Decision::persona;
            outcome.verdict_history.push_back({Order::forward, letter});
            return outcome;
        }
    }
    throw VerdictParseError(question.id + ": no bracketed verdict after 3 asks (portia)");
}

void ScoreSheet::validate() const {
    int forward = 0;
    int reverse = 0;
    for (const auto& s : samples) {
        (s.order == Order::forward ? forward : reverse) += 1;
        for (int score : {s.score_first, s.score_second}) {
            if (score < 1 || score > 10) throw ScoreParseError("score outside [1, 10]");
        }
    }
    if (forward != kScoringSamplesPerOrder || reverse != kScoringSamplesPerOrder) {
        throw ScoreParseError("score sheet needs three samples per order");
    }
}

double ScoreSheet::neutral_mean() const {
    double sum = 0.0;
    for (const auto& s : samples) sum += s.order == Order::forward ? s.score_first : s.score_second;
    return samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

double ScoreSheet::persona_mean() const {
    double sum = 0.0;
    for (const auto& s : samples) sum += s.order == Order::forward ? s.score_second : s.score_first;
    return samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

Decision ScoreSheet::decision() const {
    // Integer sums compare exactly; the means share one denominator.
    long neutral = 0;
    long persona = 0;
    for (const auto& s : samples) {
        neutral += s.order == Order::forward ? s.score_first : s.score_second;
        persona += s.order == Order::forward ? s.score_second : s.score_first;
    }
    return persona > neutral ? Decision::persona : Decision::neutral;
}

std::optional<std::array<int, 2>> parse_scores(std::string_view text) {
    if (const auto marker = rfind_icase(text, "scores:"); marker != std::string_view::npos) {
        text = text.substr(marker);
    }
    std::array<int, 2> scores{};
    std::size_t found = 0;
    std::size_t i = 0;
    while (i < text.size() && found < 2) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        const bool decimal = i + 1 < text.size() && text[i] == '.' &&
                             std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (decimal) {
            ++i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            continue;
        }
        if (i - start > 2) continue;
        const int value = std::stoi(std::string(text.substr(start, i - start)));
        if (value >= 1 && value <= 10) scores[found++] = value;
    }
    if (found < 2) return std::nullopt;
    return scores;
}

JudgeOutcome mec_bpc_judge(const QuestionRecord& question, const Solution& neutral,
                           const Solution& persona, const JudgeConfig& config,
                           const ModelEndpoint& scorer, const CallContext& calls,
                           std::uint64_t repetition, ScoreSheet* sheet_out) {
    ModelEndpoint endpoint = scorer;
    endpoint.temperature = config.temperature;
    const auto n = candidate_text(neutral);
    const auto p = candidate_text(persona);
    ScoreSheet sheet;
    for (Order order : {Order::forward, Order::reverse}) {
        const Messages messages = order == Order::forward ? render_scoring(question.prompt(), n, p)
                                                          : render_scoring(question.prompt(), p, n);
        for (int i = 0; i < kScoringSamplesPerOrder; ++i) {
            std::optional<std::array<int, 2>> scores;
            for (int ask = 0; ask < 3 && !scores; ++ask) {
                const auto slot = sample_slot(repetition, static_cast<std::uint64_t>(i));
                const auto response = calls.complete(
                    make_request(endpoint, Stage::score, messages, with_reask(slot, ask)));
                scores = parse_scores(response.content);
            }
            if (!scores) throw ScoreParseError(question.id + ": no two scores in [1, 10] after 3 asks");
            sheet.samples.push_back({order, (*scores)[0], (*scores)[1]});
        }
    }
    sheet.validate();
    JudgeOutcome outcome;
    outcome.trials = 1;
    outcome.decision = sheet.decision();
    if (sheet_out) *sheet_out = sheet;
    return outcome;
}

}  // namespace jh
