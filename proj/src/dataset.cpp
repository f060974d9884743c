#include "jh/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "jh/errors.hpp"
#include "jh/prompts.hpp"
#include "jh/text.hpp"

namespace jh {

using nlohmann::json;

std::string_view to_string(Category category) {
    switch (category) {
        case Category::arithmetic: return "arithmetic";
        case Category::commonsense: return "commonsense";
        case Category::symbolic: return "symbolic";
        case Category::other: return "other";
    }
    return "other";
}

Category category_from_string(std::string_view text) {
    for (Category c : {Category::arithmetic, Category::commonsense, Category::symbolic, Category::other}) {
        if (to_string(c) == text) return c;
    }
    throw ConfigError("unknown category: " + std::string(text));
}

std::string QuestionRecord::prompt() const { return question_prompt(question_text, choices); }

void validate(const QuestionRecord& r) {
    if (r.id.empty()) throw SchemaError("record id is empty");
    if (r.dataset_id.empty()) throw SchemaError(r.id + ": dataset is empty");
    if (trim(r.question_text).empty()) throw SchemaError(r.id + ": question is empty");
    if (r.gold.format != r.format) throw SchemaError(r.id + ": gold format differs from record format");
    if (r.gold.is_none()) throw SchemaError(r.id + ": gold answer missing or not valid for " +
                                            std::string(to_string(r.format)));
    if (is_option(r.format)) {
        if (r.choices.empty()) throw SchemaError(r.id + ": option format requires choices");
        const char last = *last_option_letter(r.format);
        std::set<char> seen;
        for (const auto& [letter, text] : r.choices) {
            if (letter < 'A' || letter > last) {
                throw SchemaError(r.id + ": choice letter " + std::string(1, letter) + " out of range");
            }
            if (!seen.insert(letter).second) {
                throw SchemaError(r.id + ": duplicate choice letter " + std::string(1, letter));
            }
        }
        const char gold = std::get<OptionAnswer>(r.gold.value).letter;
        if (!seen.count(gold)) throw SchemaError(r.id + ": gold letter is not among the choices");
    } else if (!r.choices.empty()) {
        throw SchemaError(r.id + ": choices present for non-option format");
    }
}

std::string to_jsonl_line(const QuestionRecord& r) {
    json choices = nullptr;
    if (!r.choices.empty()) {
        choices = json::array();
        for (const auto& [letter, text] : r.choices) {
            choices.push_back(json::array({std::string(1, letter), text}));
        }
    }
    const json j = {
        {"id", r.id},
        {"dataset", r.dataset_id},
        {"question", r.question_text},
        {"choices", choices},
        {"gold", r.gold.render()},
        {"format", to_string(r.format)},
        {"category", to_string(r.category)},
    };
    return j.dump();
}

QuestionRecord record_from_json(const json& j) {
    QuestionRecord r;
    r.id = j.at("id").get<std::string>();
    r.dataset_id = j.at("dataset").get<std::string>();
    r.question_text = j.at("question").get<std::string>();
    r.format = answer_format_from_string(j.at("format").get<std::string>());
    r.category = category_from_string(j.at("category").get<std::string>());
    const auto& choices = j.at("choices");
    if (!choices.is_null()) {
        for (const auto& c : choices) {
            const auto letter = c.at(0).get<std::string>();
            if (letter.size() != 1) throw SchemaError(r.id + ": choice letter must be one character");
            r.choices.emplace_back(letter[0], c.at(1).get<std::string>());
        }
        if (r.choices.empty()) throw SchemaError(r.id + ": empty choices list (use null)");
    }
    const auto gold = j.at("gold").get<std::string>();
    r.gold = normalize(gold, r.format);
    if (!r.gold.is_none() && r.gold.render() != gold) {
        throw SchemaError(r.id + ": gold '" + gold + "' is not in canonical form ('" +
                          r.gold.render() + "')");
    }
    validate(r);
    return r;
}

const std::vector<KnownDataset>& known_datasets() {
    using F = AnswerFormat;
    using C = Category;
    static const std::vector<KnownDataset> table = {
        {"singleeq", "SingleEq", F::arabic_number, C::arithmetic, 508},
        {"addsub", "AddSub", F::arabic_number, C::arithmetic, 395},
        {"multiarith", "MultiArith", F::arabic_number, C::arithmetic, 600},
        {"gsm8k", "GSM8K", F::arabic_number, C::arithmetic, 1319},
        {"aqua", "AQUA", F::option_AE, C::arithmetic, 254},
        {"svamp", "SVAMP", F::arabic_number, C::arithmetic, 1000},
        {"commonsenseqa", "CommonsenseQA", F::option_AE, C::commonsense, 1221},
        {"strategyqa", "StrategyQA", F::yes_no, C::commonsense, 2290},
        {"date", "Date Understanding", F::option_AF, C::other, 369},
        {"object", "Object Tracking", F::option_AC, C::other, 750},
        {"last_letters", "Last Letters", F::free_string, C::symbolic, 500},
        {"coin_flip", "Coin Flip", F::yes_no, C::symbolic, 500},
    };
    return table;
}

std::optional<KnownDataset> find_known_dataset(std::string_view id) {
    for (const auto& d : known_datasets()) {
        if (d.id == id) return d;
    }
    return std::nullopt;
}

std::vector<DatasetManifest> load_manifests(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("manifest " + path + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("manifest " + path + ": expected a JSON list");
    const auto base = std::filesystem::path(path).parent_path();
    std::vector<DatasetManifest> manifests;
    for (const auto& entry : j) {
        DatasetManifest m;
        try {
            m.dataset_id = entry.at("dataset_id").get<std::string>();
            m.expected_count = entry.at("n").get<std::size_t>();
            m.format = answer_format_from_string(entry.at("format").get<std::string>());
            m.category = category_from_string(entry.at("category").get<std::string>());
            auto source = std::filesystem::path(entry.at("path").get<std::string>());
            m.source_path = (source.is_relative() ? base / source : source).string();
        } catch (const json::exception& e) {
            throw ConfigError("manifest " + path + ": " + e.what());
        }
        if (m.expected_count == 0) throw ConfigError("manifest " + m.dataset_id + ": n must be positive");
        if (auto known = find_known_dataset(m.dataset_id)) {
            if (known->count != m.expected_count || known->format != m.format ||
                known->category != m.category) {
                throw ConfigError("manifest entry '" + m.dataset_id +
                                  "' disagrees with the reference table (n=" +
                                  std::to_string(known->count) + ", format " +
                                  std::string(to_string(known->format)) + ")");
            }
        }
        manifests.push_back(std::move(m));
    }
    return manifests;
}

std::vector<QuestionRecord> load(const DatasetManifest& manifest, bool strict_count) {
    std::ifstream in(manifest.source_path, std::ios::binary);
    if (!in) throw SchemaError("cannot open dataset file " + manifest.source_path);
    std::vector<QuestionRecord> records;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        QuestionRecord r;
        try {
            r = record_from_json(json::parse(line));
        } catch (const SchemaError& e) {
            throw SchemaError(manifest.source_path + ":" + std::to_string(line_no) + ": " + e.what(),
                              line_no);
        } catch (const std::exception& e) {
            throw SchemaError(manifest.source_path + ":" + std::to_string(line_no) + ": " + e.what(),
                              line_no);
        }
        if (r.dataset_id != manifest.dataset_id || r.format != manifest.format) {
            throw SchemaError(manifest.source_path + ":" + std::to_string(line_no) +
                                  ": record does not match manifest dataset/format",
                              line_no);
        }
        if (!ids.insert(r.id).second) {
            throw SchemaError(manifest.source_path + ":" + std::to_string(line_no) +
                                  ": duplicate id " + r.id,
                              line_no);
        }
        records.push_back(std::move(r));
    }
    if (strict_count && records.size() != manifest.expected_count) {
        throw CountMismatch(manifest.dataset_id + ": expected " +
                            std::to_string(manifest.expected_count) + " records, found " +
                            std::to_string(records.size()));
    }
    return records;
}

void save(const std::vector<QuestionRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

const std::vector<std::string_view>& name_pool() {
    static const std::vector<std::string_view> names = {
        "Elon",    "Amy",     "Juan",    "Ana",     "Bob",     "Whitney", "Erika",   "Benito",
        "Ka",      "Sherrie", "Shaunda", "Ernesto", "Maria",   "Tj",      "Lucas",   "Priya",
        "Kenji",   "Fatima",  "Oscar",   "Leila",   "Mateo",   "Chloe",   "Dmitri",  "Ingrid",
        "Rafael",  "Sofia",   "Tobias",  "Yuki",    "Nadia",   "Pablo",   "Greta",   "Hamza",
        "Irene",   "Jamal",   "Kiera",   "Lorenzo", "Mina",    "Nikolai", "Olivia",  "Pedro",
        "Quinn",   "Rosa",    "Samir",   "Tessa",   "Umar",    "Vera",    "Wendell", "Ximena",
        "Yosef",   "Zara",    "Alvin",   "Bianca",  "Cedric",  "Daphne",  "Emmett",  "Freya",
        "Gideon",  "Hazel",   "Ivan",    "Josie",
    };
    return names;
}

namespace {

// Four distinct names drawn with mt19937_64, whose output sequence is fixed
// by the standard; modulo reduction keeps the draw portable.
std::vector<std::string_view> pick_names(std::mt19937_64& rng) {
    const auto& pool = name_pool();
    std::vector<std::string_view> picked;
    while (picked.size() < 4) {
        const auto name = pool[rng() % pool.size()];
        if (std::find(picked.begin(), picked.end(), name) == picked.end()) picked.push_back(name);
    }
    return picked;
}

std::string indexed_id(std::string_view dataset, std::size_t index) {
    return std::string(dataset) + "-" + std::to_string(index);
}

}  // namespace

std::vector<QuestionRecord> gen_coin_flip(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("gen_coin_flip: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<QuestionRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string text = "A coin is heads up.";
        int flips = 0;
        for (auto name : pick_names(rng)) {
            const bool flip = (rng() >> 63) != 0;
            flips += flip ? 1 : 0;
            text += " " + std::string(name) + (flip ? " flips the coin." : " does not flip the coin.");
        }
        text += " Is the coin still heads up? Note that \"flip\" here means \"reverse\".";
        QuestionRecord r;
        r.id = indexed_id("coin_flip", i);
        r.dataset_id = "coin_flip";
        r.question_text = std::move(text);
        r.format = AnswerFormat::yes_no;
        r.gold = {AnswerFormat::yes_no, flips % 2 == 0 ? YesNo::yes : YesNo::no};
        r.category = Category::symbolic;
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<QuestionRecord> gen_last_letters(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("gen_last_letters: n must be >= 1");
    if (name_pool().size() < 50) throw ConfigError("name pool needs at least 50 entries");
    std::mt19937_64 rng(seed);
    std::vector<QuestionRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string words;
        std::string gold;
        for (auto name : pick_names(rng)) {
            if (!words.empty()) words.push_back(' ');
            words += name;
            gold.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(name.back()))));
        }
        QuestionRecord r;
        r.id = indexed_id("last_letters", i);
        r.dataset_id = "last_letters";
        r.question_text = "Take the last letters of each words in \"" + words + "\" and concatenate them.";
        r.format = AnswerFormat::free_string;
        r.gold = {AnswerFormat::free_string, TextAnswer{gold}};
        r.category = Category::symbolic;
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace jh
