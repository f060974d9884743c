#pragma once

// Experiment configuration, resumable runs, sweeps and reports.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jh/analytics.hpp"
#include "jh/baselines.hpp"
#include "jh/gateway.hpp"

namespace jh {

struct StageModelConfig {
    std::string model;
    std::string base_url;  // empty: JH_API_BASE or the top-level base_url
    double temperature = 0.7;
};

enum class PersonaSource { generated, handcrafted };

struct RunConfig {
    Method method = Method::jekyll_hyde;
    std::vector<std::string> datasets;
    std::string manifest_path;
    bool strict_count = false;

    std::string base_url;
    StageModelConfig persona_generator;
    StageModelConfig solver;
    StageModelConfig evaluator;  // its temperature is the judge tau

    int max_tokens_persona_gen = 32;
    int max_tokens_solve = 1024;
    int max_tokens_extract = 64;
    int max_tokens_evaluate = 1024;
    int max_tokens_score = 1024;

    JudgeConfig judge;
    int repetitions = 3;

    std::optional<int> voting_m;
    std::optional<double> voting_avg_jh_runs;

    PersonaSource persona_source = PersonaSource::generated;
    std::string handcrafted_registry_path;

    bool system_role_supported = true;
    int max_concurrency = 8;
    double requests_per_second = 0.0;
    int retry_max_attempts = 5;

    CassetteMode cassette_mode = CassetteMode::passthrough;
    std::string cassette_path;

    std::uint64_t seed = 0;
    std::string output_dir;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
    StageModels stage_models() const;
    /// Votes per question for the voting methods.
    int votes() const;
};

/// Parses a config object. Relative paths resolve against `base_dir`.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Effective config with every default filled in.
nlohmann::json to_json(const RunConfig& config);

/// SHA-256 of the experiment-defining part of the effective config.
/// Operational settings (output dir, cassette, concurrency, rate limit,
/// retry budget) are left out so that replaying a recorded run matches.
std::string config_hash(const RunConfig& config);

/// Executes one method on one question; gateway failures propagate.
RunRecord run_question(const QuestionRecord& question, const RunConfig& config,
                       std::uint64_t repetition, const CallContext& calls,
                       const HandcraftedRegistry* registry = nullptr);

struct RunResult {
    std::string directory;
    std::size_t executed = 0;  // questions run by this invocation
    std::size_t skipped = 0;   // already present from an earlier invocation
    std::size_t errors = 0;
    std::size_t http_attempts = 0;
};

/// Runs every (repetition, dataset, question) not yet in records.jsonl and
/// rewrites summary.json. A null transport means live HTTP.
RunResult run(const RunConfig& config, std::shared_ptr<Transport> transport = nullptr);

/// Deterministic summary of a run directory's records.
nlohmann::json summarize(const std::vector<RunRecord>& records);

enum class SweepParam { k, tau };

SweepParam sweep_param_from_string(std::string_view text);
std::vector<double> parse_sweep_values(SweepParam param, std::string_view csv);

struct SweepRow {
    double value = 0.0;
    std::string directory;
    double mean_accuracy = 0.0;
};

/// One run per value under <output_dir>/<param>=<value>; writes sweep.json.
std::vector<SweepRow> sweep(const RunConfig& config, SweepParam param,
                            const std::vector<double>& values,
                            std::shared_ptr<Transport> transport = nullptr);

std::string format_sweep(SweepParam param, const std::vector<SweepRow>& rows);

struct ReportOptions {
    bool json = false;
    std::string csv_dir;
};

/// Accuracy per (method, dataset), mean/std over repetitions, confusion
/// matrices between methods and win rates per category.
std::string report(const std::vector<std::string>& directories, const ReportOptions& options = {});

/// Confusion matrix per dataset: rows from dir_a (neutral), columns from dir_b.
std::string confusion_report(const std::string& dir_a, const std::string& dir_b);

/// Records of one run directory; rejects mixed config hashes.
std::vector<RunRecord> load_run_directory(const std::string& directory);

}  // namespace jh
