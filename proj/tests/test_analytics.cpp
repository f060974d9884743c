#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "jh/analytics.hpp"
#include "jh/errors.hpp"

using namespace jh;
using namespace jh::testing;

TEST_CASE("confusion quadrants on an AQuA-sized run") {
    const auto [neutral, persona] = quadrant_runs(84, 40, 35, 95, "aqua");
    const auto m = confusion(neutral, persona);
    CHECK(m.total() == 254);
    CHECK(m.pct_ww().str() == "33.07");
    CHECK(m.pct_wr().str() == "15.75");
    CHECK(m.pct_rw().str() == "13.78");
    CHECK(m.pct_rr().str() == "37.40");
}

TEST_CASE("confusion quadrants on a 500-question run") {
    const auto [neutral, persona] = quadrant_runs(23, 20, 90, 367, "letters");
    const auto m = confusion(neutral, persona);
    CHECK(m.pct_ww().str() == "4.60");
    CHECK(m.pct_wr().str() == "4.00");
    CHECK(m.pct_rw().str() == "18.00");
    CHECK(m.pct_rr().str() == "73.40");
}

TEST_CASE("confusion pairs by id, not by position") {
    auto [neutral, persona] = quadrant_runs(1, 2, 3, 4, "d");
    const auto expected = confusion(neutral, persona);
    std::reverse(persona.begin(), persona.end());
    const auto m = confusion(neutral, persona);
    CHECK(m.ww == expected.ww);
    CHECK(m.wr == expected.wr);
    CHECK(m.rw == expected.rw);
    CHECK(m.rr == expected.rr);
}

TEST_CASE("unpaired runs are an id mismatch") {
    auto [neutral, persona] = quadrant_runs(1, 1, 1, 1, "d");
    SUBCASE("missing") {
        persona.pop_back();
        CHECK_THROWS_AS(confusion(neutral, persona), IdMismatch);
    }
    SUBCASE("renamed") {
        persona.back().question_id = "other";
        CHECK_THROWS_AS(confusion(neutral, persona), IdMismatch);
    }
    SUBCASE("duplicate") {
        persona.back().question_id = persona.front().question_id;
        CHECK_THROWS_AS(confusion(neutral, persona), IdMismatch);
    }
    SUBCASE("different repetition") {
        persona.back().repetition = 1;
        CHECK_THROWS_AS(confusion(neutral, persona), IdMismatch);
    }
}

TEST_CASE("solver confusion reads both solutions off combined records") {
    std::vector<RunRecord> records;
    for (auto [n, p] : {std::pair{"1", "1"}, {"1", "2"}, {"2", "1"}, {"2", "2"}, {"2", "1"}}) {
        auto r = make_record("d", "q" + std::to_string(records.size()), 0, Method::jekyll_hyde, true);
        r.solutions = {make_solution(SolverId::neutral, n, AnswerFormat::arabic_number),
                       make_solution(SolverId::persona, p, AnswerFormat::arabic_number)};
        records.push_back(r);
    }
    const auto m = solver_confusion(records);
    CHECK(m.rr == 1);
    CHECK(m.rw == 1);
    CHECK(m.wr == 2);
    CHECK(m.ww == 1);
}

TEST_CASE("percentages round half up at two decimals") {
    CHECK(Percent::of(1, 3).str() == "33.33");
    CHECK(Percent::of(2, 3).str() == "66.67");
    CHECK(Percent::of(1, 8).str() == "12.50");
    CHECK(Percent::of(1, 800).str() == "0.13");  // 0.125 -> 0.13
    CHECK(Percent::of(0, 5).str() == "0.00");
    CHECK(Percent::of(5, 5).str() == "100.00");
    CHECK(Percent::of(1, 0).str() == "0.00");
    CHECK(Percent::of(171, 254).value() == doctest::Approx(67.32).epsilon(1e-12));
}

TEST_CASE("accuracy counts correct records and rejects mixed runs") {
    std::vector<RunRecord> records;
    for (int i = 0; i < 7; ++i) records.push_back(make_record("d", "q" + std::to_string(i), 0, Method::base, i < 3));
    CHECK(accuracy(records).str() == "42.86");
    CHECK_THROWS_AS(accuracy({}), EmptyRun);
    records.push_back(make_record("other", "x", 0, Method::base, true));
    CHECK_THROWS_AS(accuracy(records), Error);
}

TEST_CASE("scoring: abstentions and errors are wrong") {
    auto r = make_record("d", "q", 0, Method::jekyll_hyde, false);
    r.final_answer = r.gold;
    r.score();
    CHECK(r.correct);
    r.abstained = true;
    r.score();
    CHECK_FALSE(r.correct);
    r.abstained = false;
    r.final_answer = NormalizedAnswer::none(AnswerFormat::arabic_number);
    r.score();
    CHECK_FALSE(r.correct);
}

TEST_CASE("run statistics use the sample standard deviation") {
    const auto s = run_stats({48.58, 50.66, 52.74});
    CHECK(s.mean == doctest::Approx(50.66).epsilon(1e-9));
    CHECK(s.std_dev == doctest::Approx(2.08).epsilon(1e-9));
    CHECK(run_stats({1.0, 1.0}).std_dev == 0.0);
    CHECK_THROWS_AS(run_stats({50.0}), TooFewRuns);
}

TEST_CASE("win rate over six arithmetic accuracy pairs") {
    const std::vector<DatasetAccuracy> gpt4 = {
        {"multiarith", Category::arithmetic, 98.44, 97.78}, {"gsm8k", Category::arithmetic, 92.97, 94.06},
        {"addsub", Category::arithmetic, 97.13, 97.55},     {"aqua", Category::arithmetic, 68.24, 74.80},
        {"singleeq", Category::arithmetic, 98.56, 98.56},   {"svamp", Category::arithmetic, 91.00, 90.90},
        {"csqa", Category::commonsense, 79.91, 80.89},
    };
    const auto w = win_rate(gpt4, Category::arithmetic);
    CHECK(w.wins == 3);
    CHECK(w.losses == 2);
    CHECK(w.ties == 1);
    CHECK(w.fraction == doctest::Approx(0.5));
    CHECK_THROWS_AS(win_rate(gpt4, Category::symbolic), Error);
}

TEST_CASE("average LLM runs per question and per stage") {
    std::vector<RunRecord> records(4, make_record("d", "q", 0, Method::jekyll_hyde, true));
    const std::vector<std::size_t> evaluate = {2, 2, 4, 10};
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].call_ledger = {{Stage::persona_gen, 1}, {Stage::solve, 2}, {Stage::extract, 2},
                                  {Stage::evaluate, evaluate[i]}};
    }
    const auto stats = avg_llm_runs(records);
    CHECK(stats.total_calls == 38);
    CHECK(stats.mean_total == doctest::Approx(9.5));
    CHECK(stats.mean_per_stage.at(Stage::evaluate) == doctest::Approx(4.5));
    CHECK(stats.mean_per_stage.at(Stage::score) == 0.0);
    CHECK_THROWS_AS(avg_llm_runs({}), EmptyRun);
}

TEST_CASE("records round-trip and a torn last line is dropped") {
    auto r = make_record("d", "q1", 2, Method::jekyll_hyde, true);
    r.solutions = {make_solution(SolverId::neutral, "1", AnswerFormat::arabic_number),
                   make_solution(SolverId::persona, "2", AnswerFormat::arabic_number)};
    JudgeOutcome o;
    o.decision = Decision::neutral;
    o.trials = 1;
    o.verdict_history = {{Order::forward, 'A'}, {Order::reverse, 'B'}};
    r.judge_outcome = o;
    r.call_ledger = {{Stage::solve, 2}, {Stage::evaluate, 2}};
    r.error = "boom";
    const auto back = run_record_from_json(to_json(r));
    CHECK(to_json(back) == to_json(r));
    CHECK(back.total_calls() == 4);

    const auto dir = temp_dir("analytics_records");
    const auto path = dir + "/records.jsonl";
    {
        std::ofstream out(path, std::ios::binary);
        out << to_json(r).dump() << "\n" << to_json(r).dump().substr(0, 40);
    }
    CHECK(read_records(path).size() == 1);
    {
        std::ofstream out(path, std::ios::binary);
        out << "{broken\n" << to_json(r).dump() << "\n";
    }
    CHECK_THROWS_AS(read_records(path), SchemaError);
    CHECK_THROWS_AS(read_records(dir + "/absent.jsonl"), MissingRecords);
}
