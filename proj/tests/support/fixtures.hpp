#pragma once

// Builders for hand-made records used across the tests.

#include <string>
#include <utility>
#include <vector>

#include "jh/analytics.hpp"
#include "jh/dataset.hpp"
#include "jh/solver.hpp"

namespace jh::testing {

QuestionRecord make_question(const std::string& id, const std::string& dataset, const std::string& text,
                             const std::string& gold, AnswerFormat format,
                             Category category = Category::arithmetic, std::vector<Choice> choices = {});

Solution make_solution(SolverId solver, const std::string& answer, AnswerFormat format,
                       const std::string& explanation = "Worked it out carefully step by step.");

RunRecord make_record(const std::string& dataset, const std::string& id, std::uint64_t repetition,
                      Method method, bool correct);

/// Two paired runs (neutral-side, persona-side) whose joint correctness has
/// exactly the given quadrant counts: both wrong, only persona right, only
/// neutral right, both right.
std::pair<std::vector<RunRecord>, std::vector<RunRecord>> quadrant_runs(std::size_t ww, std::size_t wr,
                                                                        std::size_t rw, std::size_t rr,
                                                                        const std::string& dataset);

/// The 20-question acceptance fixture over four small datasets
/// (fixture_arith, fixture_aqua, fixture_coin, fixture_letters).
std::vector<std::vector<QuestionRecord>> acceptance_question_sets();

/// Fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& tag);

}  // namespace jh::testing
