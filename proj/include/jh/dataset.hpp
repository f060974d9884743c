#pragma once

// Benchmark records in one normalized JSONL schema, manifests, and the two
// generated symbolic-reasoning datasets.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "jh/answer.hpp"

namespace jh {

enum class Category { arithmetic, commonsense, symbolic, other };

std::string_view to_string(Category category);
Category category_from_string(std::string_view text);

using Choice = std::pair<char, std::string>;

struct QuestionRecord {
    std::string id;
    std::string dataset_id;
    std::string question_text;
    std::vector<Choice> choices;  // empty unless the format is option_*
    NormalizedAnswer gold;
    AnswerFormat format = AnswerFormat::free_string;
    Category category = Category::other;

    /// Question text as sent to models (choices appended).
    std::string prompt() const;
};

/// Throws SchemaError naming the violated invariant.
void validate(const QuestionRecord& record);

/// Canonical JSONL line (sorted keys, no trailing newline).
std::string to_jsonl_line(const QuestionRecord& record);
QuestionRecord record_from_json(const nlohmann::json& j);

struct DatasetManifest {
    std::string dataset_id;
    std::size_t expected_count = 0;
    AnswerFormat format = AnswerFormat::free_string;
    Category category = Category::other;
    std::string source_path;
};

/// Reference facts for the twelve benchmark datasets.
struct KnownDataset {
    std::string_view id;
    std::string_view name;
    AnswerFormat format;
    Category category;
    std::size_t count;
};

const std::vector<KnownDataset>& known_datasets();
std::optional<KnownDataset> find_known_dataset(std::string_view id);

/// Reads a manifest file: a JSON list of {dataset_id, path, n, format,
/// category}. Relative paths resolve against the manifest's directory.
/// Known dataset ids must carry their reference count, format and category.
std::vector<DatasetManifest> load_manifests(const std::string& path);

/// Parses and validates every line; checks the count when `strict_count`.
std::vector<QuestionRecord> load(const DatasetManifest& manifest, bool strict_count = false);

/// Canonical file: one sorted-key JSON object per line, LF endings.
void save(const std::vector<QuestionRecord>& records, const std::string& path);

std::vector<QuestionRecord> gen_coin_flip(std::size_t n, std::uint64_t seed);
std::vector<QuestionRecord> gen_last_letters(std::size_t n, std::uint64_t seed);

/// Pool of first names shared by both generators.
const std::vector<std::string_view>& name_pool();

}  // namespace jh
