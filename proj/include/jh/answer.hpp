#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "jh/answer_format.hpp"

namespace jh {

struct NoAnswer {
    friend bool operator==(const NoAnswer&, const NoAnswer&) = default;
};
struct NumberAnswer {
    std::string decimal;  // commas, currency and '+' removed
    double value = 0.0;
    friend bool operator==(const NumberAnswer&, const NumberAnswer&) = default;
};
struct OptionAnswer {
    char letter = 'A';
    friend bool operator==(const OptionAnswer&, const OptionAnswer&) = default;
};
enum class YesNo { yes, no };
struct TextAnswer {
    std::string text;
    friend bool operator==(const TextAnswer&, const TextAnswer&) = default;
};

using AnswerValue = std::variant<NoAnswer, NumberAnswer, OptionAnswer, YesNo, TextAnswer>;

struct NormalizedAnswer {
    AnswerFormat format = AnswerFormat::free_string;
    AnswerValue value;

    static NormalizedAnswer none(AnswerFormat format) { return {format, NoAnswer{}}; }
    bool is_none() const noexcept { return std::holds_alternative<NoAnswer>(value); }
    /// Canonical text: decimal, letter, "yes"/"no", the string, or "" for none.
    std::string render() const;

    friend bool operator==(const NormalizedAnswer&, const NormalizedAnswer&) = default;
};

/// Pulls the answer of `format` out of free model text. Text after the last
/// answer trigger (or "answer is") is scanned when such an anchor exists.
NormalizedAnswer normalize(std::string_view text, AnswerFormat format);

/// Exact-match scoring with a 1e-6 relative tolerance for numbers.
/// Throws FormatMismatch when the formats differ.
bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& gold);

nlohmann::json to_json(const NormalizedAnswer& answer);
NormalizedAnswer normalized_answer_from_json(const nlohmann::json& j);

}  // namespace jh
