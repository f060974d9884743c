#pragma once

// Per-question run records and the statistics computed from them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jh/dataset.hpp"
#include "jh/evaluator.hpp"

namespace jh {

enum class Method { base, persona, jekyll_hyde, base_voting, persona_voting, portia, mec_bpc, oracle };

std::string_view to_string(Method method);
Method method_from_string(std::string_view text);

struct RunRecord {
    std::string question_id;
    std::string dataset_id;
    Category category = Category::other;
    std::uint64_t repetition = 0;
    Method method = Method::base;
    std::vector<Solution> solutions;
    std::optional<JudgeOutcome> judge_outcome;
    NormalizedAnswer final_answer;  // none when abstained or failed
    bool abstained = false;         // judge returned "Can't answer"
    NormalizedAnswer gold;
    bool correct = false;
    std::map<Stage, std::size_t> call_ledger;
    double wall_time_seconds = 0.0;
    std::string template_version;
    std::string config_hash;
    std::optional<std::string> error;  // per-question failure, scored wrong

    /// Sets `correct` from final_answer, gold and abstention.
    void score();
    std::size_t total_calls() const;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

std::vector<RunRecord> read_records(const std::string& path);

/// A percentage held as integer hundredths (two decimals, half-up).
struct Percent {
    std::int64_t hundredths = 0;

    static Percent of(std::size_t part, std::size_t whole);
    double value() const { return static_cast<double>(hundredths) / 100.0; }
    std::string str() const;

    friend auto operator<=>(const Percent&, const Percent&) = default;
};

/// 100 * correct / N over records of one (method, dataset).
Percent accuracy(const std::vector<RunRecord>& records);

/// Neutral solver on rows, persona solver on columns; w = wrong, r = right.
struct ConfusionMatrix {
    std::size_t ww = 0;
    std::size_t wr = 0;
    std::size_t rw = 0;
    std::size_t rr = 0;

    std::size_t total() const { return ww + wr + rw + rr; }
    Percent pct_ww() const { return Percent::of(ww, total()); }
    Percent pct_wr() const { return Percent::of(wr, total()); }
    Percent pct_rw() const { return Percent::of(rw, total()); }
    Percent pct_rr() const { return Percent::of(rr, total()); }
};

/// Pairs records by (repetition, question id); throws IdMismatch when the two
/// runs do not cover the same questions.
ConfusionMatrix confusion(const std::vector<RunRecord>& neutral_records,
                          const std::vector<RunRecord>& persona_records);

/// Same matrix from records that carry both solutions (jekyll_hyde, portia,
/// mec_bpc, oracle).
ConfusionMatrix solver_confusion(const std::vector<RunRecord>& records);

struct DatasetAccuracy {
    std::string dataset;
    Category category = Category::other;
    double base = 0.0;
    double persona = 0.0;
};

struct WinRate {
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t ties = 0;
    /// wins / datasets in the category; ties count for neither side.
    double fraction = 0.0;
};

WinRate win_rate(const std::vector<DatasetAccuracy>& accuracies, Category category);

struct RunStats {
    double mean = 0.0;
    double std_dev = 0.0;  // sample (n - 1) standard deviation
};

/// Throws TooFewRuns for fewer than two runs.
RunStats run_stats(const std::vector<double>& per_run_accuracies);

struct CallStats {
    double mean_total = 0.0;
    std::map<Stage, double> mean_per_stage;
    std::size_t total_calls = 0;
};

CallStats avg_llm_runs(const std::vector<RunRecord>& records);

}  // namespace jh
