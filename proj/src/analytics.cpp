#include "jh/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "jh/errors.hpp"

namespace jh {

using nlohmann::json;

std::string_view to_string(Method method) {
    switch (method) {
        case Method::base: return "base";
        case Method::persona: return "persona";
        case Method::jekyll_hyde: return "jekyll_hyde";
        case Method::base_voting: return "base_voting";
        case Method::persona_voting: return "persona_voting";
        case Method::portia: return "portia";
        case Method::mec_bpc: return "mec_bpc";
        case Method::oracle: return "oracle";
    }
    return "base";
}

Method method_from_string(std::string_view text) {
    for (Method m : {Method::base, Method::persona, Method::jekyll_hyde, Method::base_voting,
                     Method::persona_voting, Method::portia, Method::mec_bpc, Method::oracle}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("unknown method: " + std::string(text));
}

void RunRecord::score() {
    correct = !abstained && !error && answers_equal(final_answer, gold);
}

std::size_t RunRecord::total_calls() const {
    std::size_t n = 0;
    for (const auto& [stage, count] : call_ledger) n += count;
    return n;
}

json to_json(const RunRecord& r) {
    json solutions = json::array();
    for (const auto& s : r.solutions) solutions.push_back(to_json(s));
    json ledger = json::object();
    for (const auto& [stage, count] : r.call_ledger) ledger[std::string(to_string(stage))] = count;
    return {
        {"question_id", r.question_id},
        {"dataset", r.dataset_id},
        {"category", to_string(r.category)},
        {"repetition", r.repetition},
        {"method", to_string(r.method)},
        {"solutions", solutions},
        {"judge", r.judge_outcome ? to_json(*r.judge_outcome) : json(nullptr)},
        {"final_answer", to_json(r.final_answer)},
        {"abstained", r.abstained},
        {"gold", to_json(r.gold)},
        {"correct", r.correct},
        {"call_ledger", ledger},
        {"wall_time_s", r.wall_time_seconds},
        {"template_version", r.template_version},
        {"config_hash", r.config_hash},
        {"error", r.error ? json(*r.error) : json(nullptr)},
    };
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.dataset_id = j.at("dataset").get<std::string>();
    r.category = category_from_string(j.at("category").get<std::string>());
    r.repetition = j.at("repetition").get<std::uint64_t>();
    r.method = method_from_string(j.at("method").get<std::string>());
    for (const auto& s : j.at("solutions")) r.solutions.push_back(solution_from_json(s));
    if (const auto& judge = j.at("judge"); !judge.is_null()) r.judge_outcome = judge_outcome_from_json(judge);
    r.final_answer = normalized_answer_from_json(j.at("final_answer"));
    r.abstained = j.at("abstained").get<bool>();
    r.gold = normalized_answer_from_json(j.at("gold"));
    r.correct = j.at("correct").get<bool>();
    for (const auto& [stage, count] : j.at("call_ledger").items()) {
        r.call_ledger[stage_from_string(stage)] = count.get<std::size_t>();
    }
    r.wall_time_seconds = j.value("wall_time_s", 0.0);
    r.template_version = j.at("template_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    if (const auto& e = j.at("error"); !e.is_null()) r.error = e.get<std::string>();
    return r;
}

std::vector<RunRecord> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingRecords("no records file at " + path);
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(run_record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            // A torn final line is what an interrupted writer leaves behind.
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return records;
}

Percent Percent::of(std::size_t part, std::size_t whole) {
    if (whole == 0) return Percent{0};
    const auto p = static_cast<std::int64_t>(part);
    const auto w = static_cast<std::int64_t>(whole);
    return Percent{(20000 * p + w) / (2 * w)};
}

std::string Percent::str() const {
    char buf[32];
    const auto abs = hundredths < 0 ? -hundredths : hundredths;
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", hundredths < 0 ? "-" : "",
                  static_cast<long long>(abs / 100), static_cast<long long>(abs % 100));
    return buf;
}

Percent accuracy(const std::vector<RunRecord>& records) {
    if (records.empty()) throw EmptyRun("accuracy of an empty run");
    std::size_t correct = 0;
    for (const auto& r : records) {
        if (r.method != records.front().method || r.dataset_id != records.front().dataset_id) {
            throw Error("accuracy expects records of a single (method, dataset)");
        }
        correct += r.correct ? 1 : 0;
    }
    return Percent::of(correct, records.size());
}

namespace {

void add_cell(ConfusionMatrix& m, bool neutral_right, bool persona_right) {
    if (neutral_right) {
        ++(persona_right ? m.rr : m.rw);
    } else {
        ++(persona_right ? m.wr : m.ww);
    }
}

using RecordKey = std::tuple<std::uint64_t, std::string, std::string>;

RecordKey key_of(const RunRecord& r) { return {r.repetition, r.dataset_id, r.question_id}; }

}  // namespace

ConfusionMatrix confusion(const std::vector<RunRecord>& neutral_records,
                          const std::vector<RunRecord>& persona_records) {
    std::map<RecordKey, bool> persona_correct;
    for (const auto& r : persona_records) {
        if (!persona_correct.emplace(key_of(r), r.correct).second) {
            throw IdMismatch("duplicate question " + r.question_id + " in persona run");
        }
    }
    if (neutral_records.size() != persona_records.size()) {
        throw IdMismatch("runs cover different numbers of questions");
    }
    ConfusionMatrix m;
    std::set<RecordKey> seen;
    for (const auto& r : neutral_records) {
        auto it = persona_correct.find(key_of(r));
        if (it == persona_correct.end() || !seen.insert(key_of(r)).second) {
            throw IdMismatch("question " + r.question_id + " is not paired across the two runs");
        }
        add_cell(m, r.correct, it->second);
    }
    return m;
}

ConfusionMatrix solver_confusion(const std::vector<RunRecord>& records) {
    ConfusionMatrix m;
    for (const auto& r : records) {
        const Solution* neutral = nullptr;
        const Solution* persona = nullptr;
        for (const auto& s : r.solutions) {
            if (s.solver_id == SolverId::neutral && !neutral) neutral = &s;
            if (s.solver_id == SolverId::persona && !persona) persona = &s;
        }
        if (!neutral || !persona) continue;
        add_cell(m, answers_equal(neutral->answer, r.gold), answers_equal(persona->answer, r.gold));
    }
    return m;
}

WinRate win_rate(const std::vector<DatasetAccuracy>& accuracies, Category category) {
    WinRate w;
    std::size_t datasets = 0;
    for (const auto& a : accuracies) {
        if (a.category != category) continue;
        ++datasets;
        // Compare at the two decimals the accuracies are reported with.
        const auto base = std::llround(a.base * 100.0);
        const auto persona = std::llround(a.persona * 100.0);
        if (persona > base) {
            ++w.wins;
        } else if (persona < base) {
            ++w.losses;
        } else {
            ++w.ties;
        }
    }
    if (datasets == 0) throw Error("win_rate: no dataset in category " + std::string(to_string(category)));
    w.fraction = static_cast<double>(w.wins) / static_cast<double>(datasets);
    return w;
}

RunStats run_stats(const std::vector<double>& values) {
    if (values.size() < 2) throw TooFewRuns("standard deviation needs at least two runs");
    RunStats s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double squares = 0.0;
    for (double v : values) squares += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(squares / static_cast<double>(values.size() - 1));
    return s;
}

CallStats avg_llm_runs(const std::vector<RunRecord>& records) {
    if (records.empty()) throw EmptyRun("call statistics of an empty run");
    CallStats stats;
    std::map<Stage, std::size_t> totals;
    for (const auto& r : records) {
        for (const auto& [stage, count] : r.call_ledger) {
            totals[stage] += count;
            stats.total_calls += count;
        }
    }
    const auto n = static_cast<double>(records.size());
    stats.mean_total = static_cast<double>(stats.total_calls) / n;
    for (Stage stage : kAllStages) {
        stats.mean_per_stage[stage] = static_cast<double>(totals[stage]) / n;
    }
    return stats;
}

}  // namespace jh
