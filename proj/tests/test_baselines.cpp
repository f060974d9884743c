#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "jh/baselines.hpp"
#include "jh/errors.hpp"
#include "transports.hpp"

using namespace jh;
using namespace jh::testing;

namespace {

const ModelEndpoint kJudge{"http://sim", "judge", 0.7, 1024};

StageModels models() {
    StageModels m;
    m.persona_gen = {"http://sim", "gen", 0.7, 32};
    m.solve = {"http://sim", "solver", 0.7, 1024};
    m.extract = {"http://sim", "solver", 0.7, 64};
    m.evaluate = kJudge;
    m.score = kJudge;
    return m;
}

NormalizedAnswer n(const char* s) { return normalize(s, AnswerFormat::arabic_number); }

std::vector<std::string> tokens_of(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

}  // namespace

TEST_CASE("vote budgets for reference average call counts") {
    const std::vector<std::tuple<double, int, int>> pairs = {
        {3.81, 4, 6}, {4.14, 5, 6}, {4.35, 5, 6}, {4.30, 5, 6}, {4.96, 5, 6}, {4.59, 5, 6}};
    for (const auto& [avg, base_k, persona_k] : pairs) {
        const auto b = vote_budget(avg);
        CHECK(b.base_k == base_k);
        CHECK(b.persona_k == persona_k);
    }
    CHECK(vote_budget(6.2).persona_k == 8);
    CHECK_THROWS_AS(vote_budget(0.0), ConfigError);
}

TEST_CASE("majority vote skips none and breaks ties by first occurrence") {
    const auto none = NormalizedAnswer::none(AnswerFormat::arabic_number);
    CHECK(majority_vote({n("3"), n("4"), n("4"), none, none}, AnswerFormat::arabic_number).render() == "4");
    CHECK(majority_vote({n("4"), n("3"), n("3.0"), n("4")}, AnswerFormat::arabic_number).render() == "4");
    CHECK(majority_vote({none, n("7")}, AnswerFormat::arabic_number).render() == "7");
    CHECK(majority_vote({none, none}, AnswerFormat::arabic_number).is_none());
    CHECK(majority_vote({}, AnswerFormat::arabic_number).is_none());
}

TEST_CASE("self-consistency makes m solver runs") {
    auto t = std::make_shared<FunctionTransport>([](const SeenRequest& r) {
        if (r.last_user().find("recommend a job") != std::string::npos) {
            return HttpReply{200, completion_body(R"({"job": "Math Teacher"})")};
        }
        return HttpReply{200, completion_body("The answer is 8.")};
    });
    const auto q = make_question("q", "d", "3 + 5 = ?", "8", AnswerFormat::arabic_number);
    {
        Harness h(t);
        const auto r = self_consistency(q, false, 5, models(), h.calls());
        CHECK(r.samples.size() == 5);
        CHECK(r.answer.render() == "8");
        CHECK(h.ledger.count(Stage::solve) == 5);
        CHECK(h.ledger.count(Stage::extract) == 5);
        CHECK(h.ledger.count(Stage::persona_gen) == 0);
    }
    {
        Harness h(t);
        const auto r = self_consistency(q, true, 6, models(), h.calls());
        CHECK(r.samples.size() == 3);
        CHECK(h.ledger.count(Stage::persona_gen) == 3);
        CHECK(h.ledger.count(Stage::solve) == 3);
        for (const auto& s : r.samples) CHECK(s.solver_id == SolverId::persona);
        // Every sample draws from its own slot.
        std::set<std::uint64_t> slots;
        for (const auto& e : h.ledger.entries()) {
            if (e.stage == Stage::solve) slots.insert(e.sample_index);
        }
        CHECK(slots.size() == 3);
    }
    Harness h(t);
    CHECK_THROWS_AS(self_consistency(q, true, 5, models(), h.calls()), ConfigError);
}

TEST_CASE("chunks take the remainder at the front") {
    const auto chunks = split_chunks("a b c d e f g");
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(chunks[1] == std::vector<std::string>{"d", "e"});
    CHECK(chunks[2] == std::vector<std::string>{"f", "g"});
    CHECK(split_chunks("one").at(1).empty());
}

TEST_CASE("interleaving alternates A and B chunks") {
    const auto text = interleave_explanations("a1 a2 a3 a4", "b1 b2 b3");
    CHECK(text ==
          "assistant A's explanation (part 1 of 3): a1 a2\n\n"
          "assistant B's explanation (part 1 of 3): b1\n\n"
          "assistant A's explanation (part 2 of 3): a3\n\n"
          "assistant B's explanation (part 2 of 3): b2\n\n"
          "assistant A's explanation (part 3 of 3): a4\n\n"
          "assistant B's explanation (part 3 of 3): b3");
}

TEST_CASE("interleaving conserves every token (fuzz)") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 500; ++round) {
        auto make = [&](char tag) {
            const int count = static_cast<int>(rng() % 40);
            std::vector<std::string> words;
            std::string text;
            for (int i = 0; i < count; ++i) {
                words.push_back(std::string(1, tag) + std::to_string(i));
                text += words.back() + (rng() % 3 ? " " : "\n  ");
            }
            return std::make_pair(text, words);
        };
        const auto [a_text, a_words] = make('a');
        const auto [b_text, b_words] = make('b');
        const auto out = interleave_explanations(a_text, b_text);

        std::vector<std::string> got_a, got_b;
        std::vector<std::size_t> a_sizes, b_sizes;
        std::string expected_order;
        std::istringstream blocks(out);
        std::string line;
        while (std::getline(blocks, line)) {
            if (line.empty()) continue;
            const char who = line.at(10);
            expected_order.push_back(who);
            const auto words = tokens_of(line.substr(line.find("):") + 2));
            (who == 'A' ? a_sizes : b_sizes).push_back(words.size());
            auto& sink = who == 'A' ? got_a : got_b;
            sink.insert(sink.end(), words.begin(), words.end());
        }
        CHECK(expected_order == "ABABAB");
        CHECK(got_a == a_words);
        CHECK(got_b == b_words);
        for (const auto* sizes : {&a_sizes, &b_sizes}) {
            const auto [lo, hi] = std::minmax_element(sizes->begin(), sizes->end());
            CHECK(*hi - *lo <= 1);
        }
    }
}

TEST_CASE("portia puts the neutral solution in slot A") {
    auto t = std::make_shared<FunctionTransport>([](const SeenRequest& r) {
        return HttpReply{200, completion_body(slot_answer(r.last_user(), 'A') == "42" ? "[[A]]" : "[[B]]")};
    });
    Harness h(t);
    const auto q = make_question("q", "d", "6*7?", "42", AnswerFormat::arabic_number);
    const auto neutral = make_solution(SolverId::neutral, "42", AnswerFormat::arabic_number, "six sevens are 42");
    const auto persona = make_solution(SolverId::persona, "41", AnswerFormat::arabic_number, "I think 41");
    const auto o = portia_judge(q, neutral, persona, {}, kJudge, h.calls());
    CHECK(o.decision == Decision::neutral);
    CHECK(t->calls() == 1);
    const auto prompt = t->log()[0].last_user();
    CHECK(prompt.find("assistant A's explanation (part 1 of 3): six sevens") != std::string::npos);
}

TEST_CASE("score parsing") {
    CHECK(parse_scores("Scores: first=8, second=6") == std::array<int, 2>{8, 6});
    CHECK(parse_scores("I'd say 3 steps.\nScores: first=10, second=1") == std::array<int, 2>{10, 1});
    CHECK(parse_scores("first 7 then 9") == std::array<int, 2>{7, 9});
    CHECK(parse_scores("Scores: first=7.5, second=9, third 4") == std::array<int, 2>{9, 4});
    CHECK_FALSE(parse_scores("Scores: first=11, second=0"));
    CHECK_FALSE(parse_scores("no numbers"));
}

TEST_CASE("worked score sheet: means 8.0 and 6.0 through the swap") {
    ScoreSheet sheet;
    sheet.samples = {{Order::forward, 9, 5}, {Order::forward, 8, 6}, {Order::forward, 9, 5},
                     {Order::reverse, 7, 7}, {Order::reverse, 6, 8}, {Order::reverse, 7, 7}};
    CHECK_NOTHROW(sheet.validate());
    CHECK(sheet.neutral_mean() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(sheet.persona_mean() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(sheet.decision() == Decision::neutral);
}

TEST_CASE("mec+bpc issues three scorings per order and tracks identities") {
    const std::vector<std::string> replies = {"Scores: first=9, second=5", "Scores: first=8, second=6",
                                              "Scores: first=9, second=5", "Scores: first=7, second=7",
                                              "Scores: first=6, second=8", "Scores: first=7, second=7"};
    auto next = std::make_shared<std::size_t>(0);
    auto t = std::make_shared<FunctionTransport>(
        [replies, next](const SeenRequest&) { return HttpReply{200, completion_body(replies.at((*next)++))}; });
    Harness h(t);
    const auto q = make_question("q", "d", "6*7?", "42", AnswerFormat::arabic_number);
    ScoreSheet sheet;
    const auto o = mec_bpc_judge(q, make_solution(SolverId::neutral, "42", AnswerFormat::arabic_number),
                                 make_solution(SolverId::persona, "41", AnswerFormat::arabic_number), {}, kJudge,
                                 h.calls(), 0, &sheet);
    CHECK(o.decision == Decision::neutral);
    CHECK(h.ledger.count(Stage::score) == 6);
    CHECK(sheet.neutral_mean() == doctest::Approx(8.0));
    CHECK(sheet.persona_mean() == doctest::Approx(6.0));
    // The reverse prompts present the persona solution first.
    const auto log = t->log();
    CHECK(slot_answer(log[0].last_user(), 'A') == "42");
    CHECK(slot_answer(log[3].last_user(), 'A') == "41");
}

TEST_CASE("score sheets must be complete and in range") {
    ScoreSheet sheet;
    sheet.samples = {{Order::forward, 9, 5}};
    CHECK_THROWS_AS(sheet.validate(), ScoreParseError);
    sheet.samples.assign(3, {Order::forward, 9, 5});
    sheet.samples.insert(sheet.samples.end(), 3, {Order::reverse, 0, 5});
    CHECK_THROWS_AS(sheet.validate(), ScoreParseError);
}

TEST_CASE("score-sheet means do not depend on processing order (fuzz)") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 100; ++round) {
        ScoreSheet sheet;
        for (Order o : {Order::forward, Order::reverse}) {
            for (int i = 0; i < kScoringSamplesPerOrder; ++i) {
                sheet.samples.push_back({o, 1 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 10)});
            }
        }
        double neutral = 0, persona = 0;
        for (const auto& s : sheet.samples) {
            neutral += s.order == Order::forward ? s.score_first : s.score_second;
            persona += s.order == Order::forward ? s.score_second : s.score_first;
        }
        auto shuffled = sheet;
        std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
        CHECK(shuffled.neutral_mean() == doctest::Approx(neutral / 6));
        CHECK(shuffled.persona_mean() == doctest::Approx(persona / 6));
        CHECK(shuffled.decision() == sheet.decision());
        CHECK(sheet.decision() == (persona > neutral ? Decision::persona : Decision::neutral));
    }
}
