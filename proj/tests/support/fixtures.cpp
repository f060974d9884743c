#include "fixtures.hpp"

#include <atomic>
#include <filesystem>

#include <unistd.h>

namespace jh::testing {

QuestionRecord make_question(const std::string& id, const std::string& dataset, const std::string& text,
                             const std::string& gold, AnswerFormat format, Category category,
                             std::vector<Choice> choices) {
    QuestionRecord q;
    q.id = id;
    q.dataset_id = dataset;
    q.question_text = text;
    q.choices = std::move(choices);
    q.format = format;
    q.category = category;
    q.gold = normalize(gold, format);
    validate(q);
    return q;
}

Solution make_solution(SolverId solver, const std::string& answer, AnswerFormat format,
                       const std::string& explanation) {
    Solution s;
    s.solver_id = solver;
    if (solver == SolverId::persona) s.persona = make_persona("Math Teacher", PersonaOrigin::handcrafted);
    s.explanation = explanation;
    s.raw_answer = answer;
    s.answer = normalize(answer, format);
    return s;
}

RunRecord make_record(const std::string& dataset, const std::string& id, std::uint64_t repetition,
                      Method method, bool correct) {
    RunRecord r;
    r.question_id = id;
    r.dataset_id = dataset;
    r.category = Category::arithmetic;
    r.repetition = repetition;
    r.method = method;
    r.gold = normalize("1", AnswerFormat::arabic_number);
    r.final_answer = normalize(correct ? "1" : "2", AnswerFormat::arabic_number);
    r.correct = correct;
    r.template_version = "test";
    r.config_hash = "cfg-" + std::string(to_string(method));
    return r;
}

std::pair<std::vector<RunRecord>, std::vector<RunRecord>> quadrant_runs(std::size_t ww, std::size_t wr,
                                                                        std::size_t rw, std::size_t rr,
                                                                        const std::string& dataset) {
    std::vector<RunRecord> neutral;
    std::vector<RunRecord> persona;
    std::size_t next = 0;
    auto add = [&](std::size_t count, bool neutral_ok, bool persona_ok) {
        for (std::size_t i = 0; i < count; ++i, ++next) {
            const auto id = dataset + "-" + std::to_string(next);
            neutral.push_back(make_record(dataset, id, 0, Method::base, neutral_ok));
            persona.push_back(make_record(dataset, id, 0, Method::persona, persona_ok));
        }
    };
    add(ww, false, false);
    add(wr, false, true);
    add(rw, true, false);
    add(rr, true, true);
    return {neutral, persona};
}

std::vector<std::vector<QuestionRecord>> acceptance_question_sets() {
    const auto num = AnswerFormat::arabic_number;
    std::vector<QuestionRecord> arith = {
        make_question("fixture_arith-0", "fixture_arith",
                      "Tom has 3 apples and buys 5 more. How many apples does he have now?", "8", num),
        make_question("fixture_arith-1", "fixture_arith",
                      "A baker made 24 cookies and sold 9 of them. How many cookies are left?", "15", num),
        make_question("fixture_arith-2", "fixture_arith",
                      "Each box holds 6 pencils. How many pencils are in 7 boxes?", "42", num),
        make_question("fixture_arith-3", "fixture_arith",
                      "Sara read 12 pages on Monday and twice as many on Tuesday. How many pages did she "
                      "read in total?",
                      "36", num),
        make_question("fixture_arith-4", "fixture_arith", "A ticket costs $4.50. How much do 4 tickets cost?",
                      "18", num),
        make_question("fixture_arith-5", "fixture_arith",
                      "A school has 1,200 students and 3/4 of them ride the bus. How many students ride "
                      "the bus?",
                      "900", num),
    };

    const auto ae = AnswerFormat::option_AE;
    auto aqua = [&](int i, const std::string& text, const std::string& gold, std::vector<Choice> choices) {
        return make_question("fixture_aqua-" + std::to_string(i), "fixture_aqua", text, gold, ae,
                             Category::arithmetic, std::move(choices));
    };
    std::vector<QuestionRecord> aqua_set = {
        aqua(0, "A train covers 180 km in 3 hours. What is its average speed in km/h?", "C",
             {{'A', "50"}, {'B', "55"}, {'C', "60"}, {'D', "65"}, {'E', "70"}}),
        aqua(1, "What is 15% of 240?", "B", {{'A', "32"}, {'B', "36"}, {'C', "38"}, {'D', "40"}, {'E', "42"}}),
        aqua(2, "If 5x + 3 = 28, what is x?", "E", {{'A', "1"}, {'B', "2"}, {'C', "3"}, {'D', "4"}, {'E', "5"}}),
        aqua(3, "A rectangle is 8 m long and 5 m wide. What is its area in square meters?", "A",
             {{'A', "40"}, {'B', "26"}, {'C', "13"}, {'D', "45"}, {'E', "35"}}),
        aqua(4, "The average of 4, 8 and 12 is", "D",
             {{'A', "6"}, {'B', "7"}, {'C', "9"}, {'D', "8"}, {'E', "10"}}),
    };

    auto relabel = [](std::vector<QuestionRecord> records, const std::string& dataset) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i].dataset_id = dataset;
            records[i].id = dataset + "-" + std::to_string(i);
        }
        return records;
    };
    return {arith, aqua_set, relabel(gen_coin_flip(5, 11), "fixture_coin"),
            relabel(gen_last_letters(4, 13), "fixture_letters")};
}

std::string temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("jh-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace jh::testing
