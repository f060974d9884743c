#include "jh/answer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include "jh/errors.hpp"
#include "jh/prompts.hpp"
#include "jh/text.hpp"

namespace jh {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '_';
}

std::string_view answer_tail(std::string_view text, AnswerFormat format) {
    for (std::string_view anchor : {answer_trigger(format), std::string_view("answer is")}) {
        const auto pos = rfind_icase(text, anchor);
        if (pos != std::string_view::npos) return text.substr(pos + anchor.size());
    }
    return text;
}

std::string strip_currency(std::string_view text) {
    static constexpr std::array<std::string_view, 6> kSymbols = {"$", "€", "£", "¥", "₹", "₩"};
    std::string out(text);
    for (auto symbol : kSymbols) {
        for (auto pos = out.find(symbol); pos != std::string::npos; pos = out.find(symbol, pos)) {
            out.erase(pos, symbol.size());
        }
    }
    return out;
}

NormalizedAnswer normalize_number(std::string_view text) {
    static const std::regex kNumber(R"(([-+]?)(\d{1,3}(?:,\d{3})+(?!\d)|\d+)(\.\d+)?)");
    const std::string cleaned = strip_currency(text);
    std::smatch m;
    if (!std::regex_search(cleaned, m, kNumber)) return NormalizedAnswer::none(AnswerFormat::arabic_number);
    std::string decimal = m[1].str() == "-" ? "-" : "";
    for (char c : m[2].str()) {
        if (c != ',') decimal.push_back(c);
    }
    decimal += m[3].str();
    const double value = std::strtod(decimal.c_str(), nullptr);
    return {AnswerFormat::arabic_number, NumberAnswer{decimal, value}};
}

NormalizedAnswer normalize_option(std::string_view text, AnswerFormat format) {
    const char last = *last_option_letter(format);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
        if (c < 'A' || c > last) continue;
        const bool left_ok = i == 0 || !is_word_char(text[i - 1]);
        const bool right_ok = i + 1 == text.size() || !is_word_char(text[i + 1]);
        if (left_ok && right_ok) return {format, OptionAnswer{c}};
    }
    return NormalizedAnswer::none(format);
}

NormalizedAnswer normalize_yes_no(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
        const std::string word = to_lower(text.substr(start, i - start));
        if (word == "yes") return {AnswerFormat::yes_no, YesNo::yes};
        if (word == "no") return {AnswerFormat::yes_no, YesNo::no};
    }
    return NormalizedAnswer::none(AnswerFormat::yes_no);
}

NormalizedAnswer normalize_text(std::string_view text) {
    static constexpr std::array<std::string_view, 8> kQuotes = {"\"", "'", "`", "“", "”", "‘", "’", "*"};
    static constexpr std::string_view kTerminal = ".,!?;:";
    std::string s = to_lower(trim(text));
    for (bool changed = true; changed;) {
        changed = false;
        const std::string before = s;
        s = std::string(trim(s));
        while (!s.empty() && kTerminal.find(s.back()) != std::string_view::npos) s.pop_back();
        while (!s.empty() && kTerminal.find(s.front()) != std::string_view::npos) s.erase(0, 1);
        for (auto q : kQuotes) {
            if (s.size() >= q.size() && s.compare(0, q.size(), q) == 0) s.erase(0, q.size());
            if (s.size() >= q.size() && s.compare(s.size() - q.size(), q.size(), q) == 0) {
                s.erase(s.size() - q.size());
            }
        }
        changed = s != before;
    }
    if (s.empty()) return NormalizedAnswer::none(AnswerFormat::free_string);
    return {AnswerFormat::free_string, TextAnswer{s}};
}

}  // namespace

std::string NormalizedAnswer::render() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoAnswer>) {
                return {};
            } else if constexpr (std::is_same_v<T, NumberAnswer>) {
                return v.decimal;
            } else if constexpr (std::is_same_v<T, OptionAnswer>) {
                return std::string(1, v.letter);
            } else if constexpr (std::is_same_v<T, YesNo>) {
                return v == YesNo::yes ? "yes" : "no";
            } else {
                return v.text;
            }
        },
        value);
}

NormalizedAnswer normalize(std::string_view text, AnswerFormat format) {
    const std::string_view tail = answer_tail(text, format);
    switch (format) {
        case AnswerFormat::arabic_number: return normalize_number(tail);
        case AnswerFormat::option_AE:
        case AnswerFormat::option_AC:
        case AnswerFormat::option_AF: return normalize_option(tail, format);
        case AnswerFormat::yes_no: return normalize_yes_no(tail);
        case AnswerFormat::free_string: return normalize_text(tail);
    }
    return NormalizedAnswer::none(format);
}

bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& gold) {
    if (a.format != gold.format) {
        throw FormatMismatch("cannot compare " + std::string(to_string(a.format)) + " with " +
                             std::string(to_string(gold.format)));
    }
    if (a.is_none() || gold.is_none()) return false;
    if (a.value.index() != gold.value.index()) return false;
    if (const auto* x = std::get_if<NumberAnswer>(&a.value)) {
        const double g = std::get<NumberAnswer>(gold.value).value;
        return std::fabs(x->value - g) <= 1e-6 * std::max(1.0, std::fabs(g));
    }
    return a.value == gold.value;
}

nlohmann::json to_json(const NormalizedAnswer& answer) {
    return {{"format", to_string(answer.format)},
            {"value", answer.is_none() ? nlohmann::json(nullptr) : nlohmann::json(answer.render())}};
}

NormalizedAnswer normalized_answer_from_json(const nlohmann::json& j) {
    const auto format = answer_format_from_string(j.at("format").get<std::string>());
    const auto& value = j.at("value");
    if (value.is_null()) return NormalizedAnswer::none(format);
    return normalize(value.get<std::string>(), format);
}

}  // namespace jh
