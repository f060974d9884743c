#pragma once

#include <optional>
#include <string_view>

namespace jh {

/// How a dataset expects its final answer to be written.
enum class AnswerFormat { arabic_number, option_AE, option_AC, option_AF, yes_no, free_string };

inline constexpr AnswerFormat kAllAnswerFormats[] = {
    AnswerFormat::arabic_number, AnswerFormat::option_AE, AnswerFormat::option_AC,
    AnswerFormat::option_AF,     AnswerFormat::yes_no,    AnswerFormat::free_string};

std::string_view to_string(AnswerFormat format);
AnswerFormat answer_format_from_string(std::string_view text);

constexpr bool is_option(AnswerFormat format) {
    return format == AnswerFormat::option_AE || format == AnswerFormat::option_AC ||
           format == AnswerFormat::option_AF;
}

/// Last admissible letter for option formats ('E', 'C' or 'F').
std::optional<char> last_option_letter(AnswerFormat format);

}  // namespace jh
