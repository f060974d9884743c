#include "jh/app.hpp"

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "jh/errors.hpp"
#include "jh/hash.hpp"
#include "jh/http_transport.hpp"
#include "jh/prompts.hpp"
#include "jh/sampling.hpp"
#include "jh/text.hpp"

namespace fs = std::filesystem;

namespace jh {

using nlohmann::json;

namespace {

constexpr const char* kDefaultBaseUrl = "https://api.openai.com";

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    if (path.empty()) return path;
    const fs::path p(path);
    return p.is_relative() ? (fs::path(base_dir) / p).lexically_normal().string() : path;
}

StageModelConfig stage_from_json(const json& j, const StageModelConfig& fallback) {
    StageModelConfig s = fallback;
    if (j.is_string()) {
        s.model = j.get<std::string>();
        return s;
    }
    s.model = j.value("model", s.model);
    s.base_url = j.value("base_url", s.base_url);
    s.temperature = j.value("temperature", s.temperature);
    return s;
}

json stage_to_json(const StageModelConfig& s, bool with_temperature) {
    json j = {{"model", s.model}, {"base_url", s.base_url}};
    if (with_temperature) j["temperature"] = s.temperature;
    return j;
}

std::string fmt_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

double round_to(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

}  // namespace

// Config

void RunConfig::validate() const {
    if (datasets.empty()) throw ConfigError("config lists no datasets");
    if (manifest_path.empty()) throw ConfigError("config has no manifest");
    judge.validate();
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    for (const auto* s : {&persona_generator, &solver, &evaluator}) {
        if (s->model.empty()) throw ConfigError("every stage needs a model name");
        if (!(s->temperature >= 0.0 && s->temperature <= 2.0)) {
            throw ConfigError("stage temperature outside [0, 2]");
        }
    }
    for (int t : {max_tokens_persona_gen, max_tokens_solve, max_tokens_extract, max_tokens_evaluate,
                  max_tokens_score}) {
        if (t <= 0) throw ConfigError("max_tokens must be positive");
    }
    if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    if (retry_max_attempts < 1) throw ConfigError("retry max attempts must be >= 1");
    if (requests_per_second < 0.0) throw ConfigError("requests_per_second must be >= 0");
    if (cassette_mode != CassetteMode::passthrough && cassette_path.empty()) {
        throw ConfigError("cassette mode " + std::string(to_string(cassette_mode)) + " needs a path");
    }
    if (output_dir.empty()) throw ConfigError("config has no output_dir");
    if (persona_source == PersonaSource::handcrafted && handcrafted_registry_path.empty()) {
        throw ConfigError("handcrafted personas need a registry path");
    }
    if (method == Method::base_voting || method == Method::persona_voting) (void)votes();
}

int RunConfig::votes() const {
    if (voting_m) {
        if (*voting_m < 1) throw ConfigError("voting.m must be >= 1");
        if (method == Method::persona_voting && *voting_m % 2 != 0) {
            throw ConfigError("persona voting needs an even voting.m");
        }
        return *voting_m;
    }
    if (voting_avg_jh_runs) {
        const auto budget = vote_budget(*voting_avg_jh_runs);
        return method == Method::persona_voting ? budget.persona_k : budget.base_k;
    }
    throw ConfigError("voting methods need voting.m or voting.avg_jh_runs");
}

StageModels RunConfig::stage_models() const {
    auto endpoint = [this](const StageModelConfig& s, double temperature, int max_tokens) {
        return ModelEndpoint{s.base_url.empty() ? base_url : s.base_url, s.model, temperature, max_tokens};
    };
    StageModels m;
    m.persona_gen = endpoint(persona_generator, persona_generator.temperature, max_tokens_persona_gen);
    m.solve = endpoint(solver, solver.temperature, max_tokens_solve);
    m.extract = endpoint(solver, solver.temperature, max_tokens_extract);
    m.evaluate = endpoint(evaluator, judge.temperature, max_tokens_evaluate);
    m.score = endpoint(evaluator, judge.temperature, max_tokens_score);
    return m;
}

RunConfig config_from_json(const json& j, const std::string& base_dir) {
    RunConfig c;
    try {
        c.method = method_from_string(j.value("method", std::string("jekyll_hyde")));
        c.datasets = j.value("datasets", std::vector<std::string>{});
        c.manifest_path = resolve_path(j.value("manifest", std::string()), base_dir);
        c.strict_count = j.value("strict_count", false);

        const char* env_base = std::getenv("JH_API_BASE");
        c.base_url = j.value("base_url", std::string(env_base && *env_base ? env_base : kDefaultBaseUrl));

        StageModelConfig default_stage;
        default_stage.model = j.value("model", std::string());
        const json models = j.value("models", json::object());
        c.persona_generator = stage_from_json(models.value("persona_generator", json::object()), default_stage);
        c.solver = stage_from_json(models.value("solver", json::object()), default_stage);
        c.evaluator = stage_from_json(models.value("evaluator", json::object()), default_stage);

        const json max_tokens = j.value("max_tokens", json::object());
        c.max_tokens_persona_gen = max_tokens.value("persona_gen", c.max_tokens_persona_gen);
        c.max_tokens_solve = max_tokens.value("solve", c.max_tokens_solve);
        c.max_tokens_extract = max_tokens.value("extract", c.max_tokens_extract);
        c.max_tokens_evaluate = max_tokens.value("evaluate", c.max_tokens_evaluate);
        c.max_tokens_score = max_tokens.value("score", c.max_tokens_score);

        const json judge = j.value("judge", json::object());
        c.judge.max_attempts = judge.value("k", c.judge.max_attempts);
        c.judge.temperature = judge.value("temperature", c.judge.temperature);
        c.judge.comparison_mode = comparison_mode_from_string(
            judge.value("comparison_mode", std::string(to_string(c.judge.comparison_mode))));
        c.evaluator.temperature = c.judge.temperature;

        c.repetitions = j.value("repetitions", c.repetitions);

        const json voting = j.value("voting", json::object());
        if (voting.contains("m") && !voting["m"].is_null()) c.voting_m = voting["m"].get<int>();
        if (voting.contains("avg_jh_runs") && !voting["avg_jh_runs"].is_null()) {
            c.voting_avg_jh_runs = voting["avg_jh_runs"].get<double>();
        }

        const json personas = j.value("personas", json::object());
        c.persona_source = personas.value("source", std::string("generated")) == "handcrafted"
                               ? PersonaSource::handcrafted
                               : PersonaSource::generated;
        c.handcrafted_registry_path = resolve_path(personas.value("registry", std::string()), base_dir);

        c.system_role_supported = j.value("system_role_supported", true);
        c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
        c.requests_per_second = j.value("requests_per_second", c.requests_per_second);
        c.retry_max_attempts = j.value("retry_max_attempts", c.retry_max_attempts);

        const json cassette = j.value("cassette", json::object());
        c.cassette_mode = cassette_mode_from_string(cassette.value("mode", std::string("passthrough")));
        c.cassette_path = resolve_path(cassette.value("path", std::string()), base_dir);

        c.seed = j.value("seed", std::uint64_t{0});
        c.output_dir = resolve_path(j.value("output_dir", std::string()), base_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(j, fs::path(path).parent_path().string());
}

json to_json(const RunConfig& c) {
    json j = {
        {"method", to_string(c.method)},
        {"datasets", c.datasets},
        {"manifest", c.manifest_path},
        {"strict_count", c.strict_count},
        {"base_url", c.base_url},
        {"models",
         {{"persona_generator", stage_to_json(c.persona_generator, true)},
          {"solver", stage_to_json(c.solver, true)},
          {"evaluator", stage_to_json(c.evaluator, false)}}},
        {"max_tokens",
         {{"persona_gen", c.max_tokens_persona_gen},
          {"solve", c.max_tokens_solve},
          {"extract", c.max_tokens_extract},
          {"evaluate", c.max_tokens_evaluate},
          {"score", c.max_tokens_score}}},
        {"judge",
         {{"k", c.judge.max_attempts},
          {"temperature", c.judge.temperature},
          {"comparison_mode", to_string(c.judge.comparison_mode)}}},
        {"repetitions", c.repetitions},
        {"voting",
         {{"m", c.voting_m ? json(*c.voting_m) : json(nullptr)},
          {"avg_jh_runs", c.voting_avg_jh_runs ? json(*c.voting_avg_jh_runs) : json(nullptr)}}},
        {"personas",
         {{"source", c.persona_source == PersonaSource::handcrafted ? "handcrafted" : "generated"},
          {"registry", c.handcrafted_registry_path}}},
        {"system_role_supported", c.system_role_supported},
        {"max_concurrency", c.max_concurrency},
        {"requests_per_second", c.requests_per_second},
        {"retry_max_attempts", c.retry_max_attempts},
        {"cassette", {{"mode", to_string(c.cassette_mode)}, {"path", c.cassette_path}}},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
    };
    return j;
}

std::string config_hash(const RunConfig& config) {
    json j = to_json(config);
    for (const char* key : {"output_dir", "cassette", "max_concurrency", "requests_per_second",
                            "retry_max_attempts", "manifest"}) {
        j.erase(key);
    }
    return sha256_hex(j.dump());
}

// Pipeline

RunRecord run_question(const QuestionRecord& q, const RunConfig& config, std::uint64_t repetition,
                       const CallContext& calls, const HandcraftedRegistry* registry) {
    RunRecord r;
    r.question_id = q.id;
    r.dataset_id = q.dataset_id;
    r.category = q.category;
    r.repetition = repetition;
    r.method = config.method;
    r.gold = q.gold;
    r.final_answer = NormalizedAnswer::none(q.format);
    r.template_version = template_version();

    const StageModels models = config.stage_models();
    const auto slot = sample_slot(repetition, 0);
    auto persona = [&]() -> Persona {
        if (config.persona_source == PersonaSource::handcrafted) {
            if (!registry) throw ConfigError("handcrafted personas requested without a registry");
            return handcrafted_persona(q.dataset_id, repetition, *registry);
        }
        return generate_persona(q.prompt(), models.persona_gen, calls, slot);
    };

    switch (config.method) {
        case Method::base:
        case Method::persona: {
            std::optional<Persona> p;
            if (config.method == Method::persona) p = persona();
            r.solutions.push_back(solve(q, p, models, calls, slot));
            r.final_answer = r.solutions.back().answer;
            break;
        }
        case Method::base_voting:
        case Method::persona_voting: {
            auto vote = self_consistency(q, config.method == Method::persona_voting, config.votes(),
                                         models, calls, repetition);
            r.solutions = std::move(vote.samples);
            r.final_answer = vote.answer;
            break;
        }
        case Method::jekyll_hyde:
        case Method::portia:
        case Method::mec_bpc:
        case Method::oracle: {
            const Persona p = persona();
            Solution neutral = solve(q, std::nullopt, models, calls, slot);
            Solution personated = solve(q, p, models, calls, slot);
            JudgeOutcome outcome;
            switch (config.method) {
                case Method::jekyll_hyde:
                    outcome = robust_judge(q, neutral, personated, config.judge, models.evaluate, calls,
                                           repetition);
                    break;
                case Method::portia:
                    outcome = portia_judge(q, neutral, personated, config.judge, models.evaluate, calls,
                                           repetition);
                    break;
                case Method::mec_bpc:
                    outcome = mec_bpc_judge(q, neutral, personated, config.judge, models.score, calls,
                                            repetition);
                    break;
                default:
                    outcome = oracle_judge(neutral, personated, q.gold);
                    break;
            }
            if (outcome.decision == Decision::cant_answer) {
                r.abstained = true;
            } else {
                r.final_answer = outcome.decision == Decision::neutral ? neutral.answer : personated.answer;
            }
            r.judge_outcome = std::move(outcome);
            r.solutions.push_back(std::move(neutral));
            r.solutions.push_back(std::move(personated));
            break;
        }
    }
    r.score();
    return r;
}

// Run

namespace {

class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw ConfigError("cannot create lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw ConfigError("another process is writing to " + path.parent_path().string());
        }
    }
    ~DirectoryLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    int fd_ = -1;
};

using WorkKey = std::tuple<std::uint64_t, std::string, std::string>;

struct WorkItem {
    std::uint64_t repetition;
    const QuestionRecord* question;
};

void write_text(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

// An interrupted writer can leave a partial last line; cut it off so that
// appended records start on a line of their own.
void drop_torn_tail(const fs::path& path) {
    std::string content;
    {
        std::ifstream in(path, std::ios::binary);
        content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    if (content.empty() || content.back() == '\n') return;
    const auto last_newline = content.rfind('\n');
    fs::resize_file(path, last_newline == std::string::npos ? 0 : last_newline + 1);
}

}  // namespace

RunResult run(const RunConfig& config, std::shared_ptr<Transport> transport) {
    config.validate();

    // Resolve every input before the first model call.
    std::vector<DatasetManifest> selected;
    {
        const auto manifests = load_manifests(config.manifest_path);
        for (const auto& id : config.datasets) {
            auto it = std::find_if(manifests.begin(), manifests.end(),
                                   [&](const DatasetManifest& m) { return m.dataset_id == id; });
            if (it == manifests.end()) throw ConfigError("dataset '" + id + "' is not in the manifest");
            selected.push_back(*it);
        }
    }
    std::vector<std::vector<QuestionRecord>> questions;
    for (const auto& m : selected) {
        try {
            questions.push_back(load(m, config.strict_count));
        } catch (const SchemaError& e) {
            throw ConfigError(e.what());
        } catch (const CountMismatch& e) {
            throw ConfigError(e.what());
        }
    }
    std::optional<HandcraftedRegistry> registry;
    if (config.persona_source == PersonaSource::handcrafted) {
        registry = HandcraftedRegistry::load(config.handcrafted_registry_path);
        for (const auto& m : selected) {
            if (!registry->contains(m.dataset_id)) {
                throw ConfigError("no handcrafted personas for dataset '" + m.dataset_id + "'");
            }
        }
    }

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    DirectoryLock lock(dir / ".lock");

    const std::string hash = config_hash(config);
    const fs::path config_file = dir / "config.json";
    if (fs::exists(config_file)) {
        std::ifstream in(config_file);
        const auto stored = json::parse(in, nullptr, false);
        if (stored.is_discarded() || stored.value("config_hash", std::string()) != hash) {
            throw ConfigError(dir.string() + " holds a run with a different configuration");
        }
    }
    json stored_config = to_json(config);
    stored_config["config_hash"] = hash;
    stored_config["template_version"] = template_version();
    write_text(config_file, stored_config.dump(2) + "\n");

    const fs::path records_path = dir / "records.jsonl";
    std::set<WorkKey> done;
    if (fs::exists(records_path)) {
        drop_torn_tail(records_path);
        for (const auto& r : read_records(records_path.string())) {
            done.emplace(r.repetition, r.dataset_id, r.question_id);
        }
    }

    RunResult result;
    result.directory = dir.string();
    std::vector<WorkItem> work;
    for (int rep = 0; rep < config.repetitions; ++rep) {
        for (const auto& dataset : questions) {
            for (const auto& q : dataset) {
                if (done.count({static_cast<std::uint64_t>(rep), q.dataset_id, q.id})) {
                    ++result.skipped;
                } else {
                    work.push_back({static_cast<std::uint64_t>(rep), &q});
                }
            }
        }
    }

    if (!transport && config.cassette_mode != CassetteMode::replay) {
        transport = std::make_shared<HttpTransport>();
    }
    GatewayOptions options;
    options.api_key = api_key_from_env();
    options.retry.max_attempts = config.retry_max_attempts;
    options.max_concurrency = config.max_concurrency;
    options.requests_per_second = config.requests_per_second;
    options.system_role_supported = config.system_role_supported;
    options.jitter_seed = config.seed;
    Gateway gateway(transport, options);
    std::optional<Cassette> file_cassette;
    if (config.cassette_mode != CassetteMode::passthrough) {
        file_cassette.emplace(config.cassette_path, config.cassette_mode);
    }
    Cassette passthrough(CassetteMode::passthrough);
    Cassette& cassette = file_cassette ? *file_cassette : passthrough;

    std::ofstream records_out(records_path, std::ios::binary | std::ios::app);
    if (!records_out) throw Error("cannot append to " + records_path.string());
    std::mutex write_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> errors{0};
    std::atomic<bool> fatal{false};
    std::string fatal_message;

    auto worker = [&] {
        for (;;) {
            if (fatal.load()) return;
            const std::size_t index = next.fetch_add(1);
            if (index >= work.size()) return;
            const auto& item = work[index];
            CallLedger ledger;
            CallContext calls{gateway, cassette, ledger};
            const auto start = std::chrono::steady_clock::now();
            RunRecord record;
            try {
                record = run_question(*item.question, config, item.repetition, calls,
                                      registry ? &*registry : nullptr);
            } catch (const AuthError& e) {
                std::lock_guard lock(write_mutex);
                if (!fatal.exchange(true)) fatal_message = e.what();
                return;
            } catch (const std::exception& e) {
                record = RunRecord{};
                record.question_id = item.question->id;
                record.dataset_id = item.question->dataset_id;
                record.category = item.question->category;
                record.repetition = item.repetition;
                record.method = config.method;
                record.gold = item.question->gold;
                record.final_answer = NormalizedAnswer::none(item.question->format);
                record.template_version = template_version();
                record.error = e.what();
                record.correct = false;
                ++errors;
            }
            record.call_ledger = ledger.stage_counts();
            record.config_hash = hash;
            record.wall_time_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const std::string line = to_json(record).dump() + "\n";
            std::lock_guard lock(write_mutex);
            records_out << line;
            records_out.flush();
        }
    };

    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrency), work.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    records_out.close();

    if (fatal.load()) throw AuthError(fatal_message);

    result.executed = std::min(next.load(), work.size());
    result.errors = errors.load();
    result.http_attempts = gateway.http_attempts();

    const auto records = read_records(records_path.string());
    write_text(dir / "summary.json", summarize(records).dump(2) + "\n");
    return result;
}

// Summary

namespace {

json summarize_group(const std::vector<const RunRecord*>& records) {
    std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> per_rep;  // correct, total
    std::set<std::string> questions;
    std::size_t abstentions = 0;
    std::size_t failures = 0;
    std::map<Stage, std::size_t> stage_totals;
    std::size_t total_calls = 0;
    for (const auto* r : records) {
        auto& [correct, total] = per_rep[r->repetition];
        correct += r->correct ? 1 : 0;
        ++total;
        questions.insert(r->dataset_id + "/" + r->question_id);
        abstentions += r->abstained ? 1 : 0;
        failures += r->error ? 1 : 0;
        for (const auto& [stage, count] : r->call_ledger) {
            stage_totals[stage] += count;
            total_calls += count;
        }
    }
    json accuracies = json::array();
    std::vector<double> values;
    for (const auto& [rep, counts] : per_rep) {
        const auto pct = Percent::of(counts.first, counts.second);
        accuracies.push_back(pct.str());
        values.push_back(pct.value());
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    json per_stage = json::object();
    for (Stage stage : kAllStages) per_stage[std::string(to_string(stage))] = stage_totals[stage];

    return {
        {"questions", questions.size()},
        {"records", records.size()},
        {"repetitions", per_rep.size()},
        {"accuracy_per_repetition", accuracies},
        {"mean_accuracy", fmt_fixed(mean, 2)},
        {"std_dev", values.size() >= 2 ? json(fmt_fixed(run_stats(values).std_dev, 2)) : json(nullptr)},
        {"abstentions", abstentions},
        {"errors", failures},
        {"calls",
         {{"total", total_calls},
          {"per_stage", per_stage},
          {"mean_per_question",
           round_to(static_cast<double>(total_calls) / static_cast<double>(records.size()), 4)}}},
    };
}

}  // namespace

json summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) throw EmptyRun("no records to summarize");
    std::set<std::string> hashes, methods, versions;
    std::map<std::string, std::vector<const RunRecord*>> by_dataset;
    std::vector<const RunRecord*> all;
    for (const auto& r : records) {
        hashes.insert(r.config_hash);
        methods.insert(std::string(to_string(r.method)));
        versions.insert(r.template_version);
        by_dataset[r.dataset_id].push_back(&r);
        all.push_back(&r);
    }
    if (hashes.size() != 1) throw ConfigError("records mix several configurations");
    json datasets = json::object();
    for (const auto& [id, group] : by_dataset) datasets[id] = summarize_group(group);
    return {
        {"config_hash", *hashes.begin()},
        {"method", *methods.begin()},
        {"template_version", *versions.begin()},
        {"datasets", datasets},
        {"overall", summarize_group(all)},
    };
}

// Sweep

SweepParam sweep_param_from_string(std::string_view text) {
    if (text == "k") return SweepParam::k;
    if (text == "tau") return SweepParam::tau;
    throw ConfigError("sweep parameter must be k or tau");
}

std::vector<double> parse_sweep_values(SweepParam param, std::string_view csv) {
    std::vector<double> values;
    for (const auto& part : split(csv, ',')) {
        const auto token = std::string(trim(part));
        if (token.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') throw ConfigError("not a number: " + token);
        if (param == SweepParam::k && (v < 1.0 || v != std::floor(v))) {
            throw ConfigError("k values must be positive integers: " + token);
        }
        if (param == SweepParam::tau && !(v >= 0.0 && v <= 2.0)) {
            throw ConfigError("tau values must lie in [0, 2]: " + token);
        }
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    return values;
}

namespace {

std::string sweep_label(SweepParam param, double value) {
    return param == SweepParam::k ? "k=" + std::to_string(static_cast<int>(value))
                                  : "tau=" + fmt_fixed(value, 2);
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& config, SweepParam param, const std::vector<double>& values,
                            std::shared_ptr<Transport> transport) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<RunConfig> configs;
    for (double v : values) {
        RunConfig c = config;
        if (param == SweepParam::k) {
            c.judge.max_attempts = static_cast<int>(v);
        } else {
            c.judge.temperature = v;
            c.evaluator.temperature = v;
        }
        c.output_dir = (fs::path(config.output_dir) / sweep_label(param, v)).string();
        c.validate();
        configs.push_back(std::move(c));
    }
    std::vector<SweepRow> rows;
    json table = json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto result = run(configs[i], transport);
        const auto summary = summarize(read_records((fs::path(result.directory) / "records.jsonl").string()));
        SweepRow row{values[i], result.directory,
                     std::stod(summary.at("overall").at("mean_accuracy").get<std::string>())};
        table.push_back({{"value", values[i]},
                         {"directory", row.directory},
                         {"mean_accuracy", summary.at("overall").at("mean_accuracy")}});
        rows.push_back(std::move(row));
    }
    write_text(fs::path(config.output_dir) / "sweep.json",
               json{{"param", param == SweepParam::k ? "k" : "tau"}, {"rows", table}}.dump(2) + "\n");
    return rows;
}

std::string format_sweep(SweepParam param, const std::vector<SweepRow>& rows) {
    std::string out = std::string(param == SweepParam::k ? "k" : "tau") + "\tmean_accuracy\tdirectory\n";
    for (const auto& row : rows) {
        out += (param == SweepParam::k ? std::to_string(static_cast<int>(row.value)) : fmt_fixed(row.value, 2)) +
               "\t" + fmt_fixed(row.mean_accuracy, 2) + "\t" + row.directory + "\n";
    }
    return out;
}

// Reports

namespace {

class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string render() const {
        std::vector<std::size_t> widths;
        for (const auto& row : rows_) {
            widths.resize(std::max(widths.size(), row.size()), 0);
            for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
        }
        std::ostringstream out;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            for (std::size_t i = 0; i < rows_[r].size(); ++i) {
                if (i) out << "  ";
                out << rows_[r][i];
                if (i + 1 < rows_[r].size()) out << std::string(widths[i] - rows_[r][i].size(), ' ');
            }
            out << '\n';
            if (r == 0) {
                std::size_t total = 0;
                for (auto w : widths) total += w + 2;
                out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
            }
        }
        return out.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

struct Group {
    std::string directory;
    std::string model;
    Method method;
    std::string dataset;
    Category category;
    std::vector<RunRecord> records;
};

std::string solver_model_of(const std::string& directory) {
    std::ifstream in(fs::path(directory) / "config.json");
    if (!in) return "unknown";
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) return "unknown";
    try {
        return j.at("models").at("solver").at("model").get<std::string>();
    } catch (const json::exception&) {
        return "unknown";
    }
}

std::vector<double> per_repetition_accuracy(const std::vector<RunRecord>& records) {
    std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> per_rep;
    for (const auto& r : records) {
        per_rep[r.repetition].first += r.correct ? 1 : 0;
        ++per_rep[r.repetition].second;
    }
    std::vector<double> values;
    for (const auto& [rep, c] : per_rep) values.push_back(Percent::of(c.first, c.second).value());
    return values;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void confusion_rows(TextTable& table, const std::string& label, const ConfusionMatrix& m) {
    table.add({label, "wrong", m.pct_ww().str() + "% (" + std::to_string(m.ww) + ")",
               m.pct_wr().str() + "% (" + std::to_string(m.wr) + ")"});
    table.add({"", "right", m.pct_rw().str() + "% (" + std::to_string(m.rw) + ")",
               m.pct_rr().str() + "% (" + std::to_string(m.rr) + ")"});
}

json confusion_json(const ConfusionMatrix& m) {
    return {{"ww", m.ww}, {"wr", m.wr}, {"rw", m.rw}, {"rr", m.rr},
            {"pct", {m.pct_ww().str(), m.pct_wr().str(), m.pct_rw().str(), m.pct_rr().str()}}};
}

}  // namespace

std::vector<RunRecord> load_run_directory(const std::string& directory) {
    const auto path = fs::path(directory) / "records.jsonl";
    if (!fs::exists(path)) throw MissingRecords(directory + " has no records.jsonl");
    auto records = read_records(path.string());
    if (records.empty()) throw MissingRecords(directory + " has no records");
    std::set<std::string> hashes;
    for (const auto& r : records) hashes.insert(r.config_hash);
    if (hashes.size() > 1) throw ConfigError(directory + " mixes records from several configurations");
    return records;
}

std::string report(const std::vector<std::string>& directories, const ReportOptions& options) {
    if (directories.empty()) throw ConfigError("report needs at least one run directory");
    std::vector<Group> groups;
    for (const auto& dir : directories) {
        const auto records = load_run_directory(dir);
        const std::string model = solver_model_of(dir);
        std::map<std::pair<Method, std::string>, std::size_t> index;
        for (const auto& r : records) {
            const auto key = std::make_pair(r.method, r.dataset_id);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, groups.size()).first;
                groups.push_back({dir, model, r.method, r.dataset_id, r.category, {}});
            }
            groups[it->second].records.push_back(r);
        }
    }

    json out = {{"accuracy", json::array()}, {"confusion", json::array()}, {"win_rate", json::array()}};
    std::ostringstream text;

    // Accuracy per (method, dataset).
    bool any_repeated = false;
    for (const auto& g : groups) any_repeated |= per_repetition_accuracy(g.records).size() >= 2;
    std::vector<std::string> header = {"method", "dataset", "N", "accuracy"};
    if (any_repeated) {
        header.push_back("mean");
        header.push_back("std");
    }
    header.push_back("abstain");
    header.push_back("calls/q");
    TextTable acc(header);
    for (const auto& g : groups) {
        const auto values = per_repetition_accuracy(g.records);
        std::string per_rep;
        for (double v : values) per_rep += (per_rep.empty() ? "" : "/") + fmt_fixed(v, 2);
        std::size_t abstained = 0;
        for (const auto& r : g.records) abstained += r.abstained ? 1 : 0;
        const auto calls = avg_llm_runs(g.records);
        std::vector<std::string> row = {std::string(to_string(g.method)), g.dataset,
                                        std::to_string(g.records.size() / values.size()), per_rep};
        json j = {{"method", to_string(g.method)}, {"dataset", g.dataset}, {"model", g.model},
                  {"per_repetition", values}, {"abstentions", abstained},
                  {"calls_per_question", round_to(calls.mean_total, 4)}};
        if (any_repeated) {
            if (values.size() >= 2) {
                const auto stats = run_stats(values);
                row.push_back(fmt_fixed(stats.mean, 2));
                row.push_back(fmt_fixed(stats.std_dev, 2));
                j["mean"] = round_to(stats.mean, 2);
                j["std"] = round_to(stats.std_dev, 2);
            } else {
                row.push_back(fmt_fixed(mean_of(values), 2));
                row.push_back("-");
            }
        }
        row.push_back(std::to_string(abstained));
        row.push_back(fmt_fixed(calls.mean_total, 2));
        acc.add(row);
        out["accuracy"].push_back(j);
    }
    text << "Accuracy\n" << acc.render();

    // Confusion matrices: between every two methods on a dataset, and between
    // the two solvers inside runs that carry both solutions.
    TextTable conf({"rows \\ columns", "neutral", "persona wrong", "persona right"});
    bool any_confusion = false;
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            if (groups[a].dataset != groups[b].dataset || groups[a].method == groups[b].method) continue;
            try {
                const auto m = confusion(groups[a].records, groups[b].records);
                confusion_rows(conf, std::string(to_string(groups[a].method)) + " x " +
                                         std::string(to_string(groups[b].method)) + " [" +
                                         groups[a].dataset + "]",
                               m);
                out["confusion"].push_back({{"rows", to_string(groups[a].method)},
                                            {"columns", to_string(groups[b].method)},
                                            {"dataset", groups[a].dataset},
                                            {"matrix", confusion_json(m)}});
                any_confusion = true;
            } catch (const IdMismatch&) {
            }
        }
    }
    for (const auto& g : groups) {
        const auto m = solver_confusion(g.records);
        if (m.total() == 0) continue;
        confusion_rows(conf, "neutral x persona solver [" + g.dataset + ", " +
                                 std::string(to_string(g.method)) + "]",
                       m);
        out["confusion"].push_back({{"rows", "neutral_solver"},
                                    {"columns", "persona_solver"},
                                    {"dataset", g.dataset},
                                    {"method", to_string(g.method)},
                                    {"matrix", confusion_json(m)}});
        any_confusion = true;
    }
    if (any_confusion) text << "\nConfusion (rows: first method / neutral solver)\n" << conf.render();

    // Win rate of persona over base per category.
    std::vector<DatasetAccuracy> pairs;
    for (const auto& g : groups) {
        if (g.method != Method::base) continue;
        for (const auto& h : groups) {
            if (h.method == Method::persona && h.dataset == g.dataset) {
                pairs.push_back({g.dataset, g.category, mean_of(per_repetition_accuracy(g.records)),
                                 mean_of(per_repetition_accuracy(h.records))});
            }
        }
    }
    if (!pairs.empty()) {
        TextTable wins({"category", "wins", "losses", "ties", "win rate"});
        for (Category c : {Category::arithmetic, Category::commonsense, Category::symbolic, Category::other}) {
            if (std::none_of(pairs.begin(), pairs.end(), [c](const auto& p) { return p.category == c; })) continue;
            const auto w = win_rate(pairs, c);
            wins.add({std::string(to_string(c)), std::to_string(w.wins), std::to_string(w.losses),
                      std::to_string(w.ties), fmt_fixed(w.fraction, 2)});
            out["win_rate"].push_back({{"category", to_string(c)}, {"wins", w.wins}, {"losses", w.losses},
                                       {"ties", w.ties}, {"fraction", round_to(w.fraction, 4)}});
        }
        text << "\nPersona vs base win rate\n" << wins.render();
    }

    if (!options.csv_dir.empty()) {
        fs::create_directories(options.csv_dir);
        for (const auto& g : groups) {
            const auto path = fs::path(options.csv_dir) /
                              (g.model + "__" + g.dataset + "__" + std::string(to_string(g.method)) + ".csv");
            std::ofstream csv(path, std::ios::binary | std::ios::trunc);
            csv << "repetition,question_id,correct,abstained,final_answer,gold,total_calls\n";
            for (const auto& r : g.records) {
                std::string answer = r.final_answer.render();
                std::replace(answer.begin(), answer.end(), ',', ' ');
                csv << r.repetition << ',' << r.question_id << ',' << (r.correct ? 1 : 0) << ','
                    << (r.abstained ? 1 : 0) << ',' << answer << ',' << r.gold.render() << ','
                    << r.total_calls() << '\n';
            }
        }
    }

    return options.json ? out.dump(2) + "\n" : text.str();
}

std::string confusion_report(const std::string& dir_a, const std::string& dir_b) {
    const auto a = load_run_directory(dir_a);
    const auto b = load_run_directory(dir_b);
    std::map<std::string, std::pair<std::vector<RunRecord>, std::vector<RunRecord>>> by_dataset;
    for (const auto& r : a) by_dataset[r.dataset_id].first.push_back(r);
    for (const auto& r : b) by_dataset[r.dataset_id].second.push_back(r);
    std::ostringstream out;
    for (const auto& [dataset, runs] : by_dataset) {
        const auto m = confusion(runs.first, runs.second);
        TextTable table({dataset + " (N=" + std::to_string(m.total()) + ")", "", "B wrong", "B right"});
        table.add({"A", "wrong", m.pct_ww().str() + "%", m.pct_wr().str() + "%"});
        table.add({"", "right", m.pct_rw().str() + "%", m.pct_rr().str() + "%"});
        out << table.render() << '\n';
    }
    return out.str();
}

}  // namespace jh
