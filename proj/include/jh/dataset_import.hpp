#pragma once

// Converters from the upstream benchmark file layouts to the normalized
// JSONL schema.

#include <string>
#include <string_view>
#include <vector>

#include "jh/dataset.hpp"

namespace jh {

/// Dataset ids accepted by import_dataset.
std::vector<std::string_view> importable_datasets();

/// Parses an upstream file for dataset `name`:
///   aqua, gsm8k, commonsenseqa  JSONL as distributed
///   svamp                       JSON array of {Body, Question, Answer}
///   addsub, singleeq, multiarith JSON array of {sQuestion, lSolutions}
///   strategyqa                  JSON array of {qid, question, answer}
///   date, object                BIG-bench task.json with target_scores
///   last_letters, coin_flip     {"examples": [{question, answer}]}
/// Throws UnknownDataset or SchemaError (with the 1-based item number).
std::vector<QuestionRecord> import_records(std::string_view name, const std::string& source_path);

/// import_records followed by save; returns the number of records written.
std::size_t import_dataset(std::string_view name, const std::string& source_path,
                           const std::string& destination_path);

}  // namespace jh
