#include "jh/dataset_import.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "jh/errors.hpp"
#include "jh/text.hpp"

namespace jh {

using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json parse_document(const std::string& path) {
    try {
        return ordered_json::parse(read_file(path));
    } catch (const ordered_json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

std::vector<ordered_json> parse_lines(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<ordered_json> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            items.push_back(ordered_json::parse(line));
        } catch (const ordered_json::parse_error& e) {
            throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return items;
}

const ordered_json& array_field(const ordered_json& doc, const char* key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_array()) {
        throw SchemaError(path + ": expected an object with an array '" + key + "'");
    }
    return doc[key];
}

std::string scalar_text(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream out;
        out.precision(15);
        out << v.get<double>();
        return out.str();
    }
    throw SchemaError("unsupported answer value " + v.dump());
}

struct Draft {
    std::string id;
    std::string question;
    std::vector<Choice> choices;
    std::string gold;
};

using Items = std::vector<ordered_json>;

Items document_array(const std::string& path) {
    const auto doc = parse_document(path);
    if (!doc.is_array()) throw SchemaError(path + ": expected a JSON list");
    return Items(doc.begin(), doc.end());
}

Items examples_array(const std::string& path) {
    const auto doc = parse_document(path);
    const auto& examples = array_field(doc, "examples", path);
    return Items(examples.begin(), examples.end());
}

Draft convert_aqua(const ordered_json& j) {
    Draft d;
    d.question = j.at("question").get<std::string>();
    for (const auto& opt : j.at("options")) {
        const auto text = opt.get<std::string>();
        const auto paren = text.find(')');
        if (text.empty() || paren == std::string::npos) throw SchemaError("AQuA option without 'X)': " + text);
        d.choices.emplace_back(text[0], std::string(trim(std::string_view(text).substr(paren + 1))));
    }
    d.gold = j.at("correct").get<std::string>();
    return d;
}

Draft convert_gsm8k(const ordered_json& j) {
    Draft d;
    d.question = j.at("question").get<std::string>();
    const auto answer = j.at("answer").get<std::string>();
    const auto marker = answer.rfind("####");
    if (marker == std::string::npos) throw SchemaError("GSM8K answer without '####'");
    d.gold = std::string(trim(std::string_view(answer).substr(marker + 4)));
    return d;
}

Draft convert_svamp(const ordered_json& j) {
    Draft d;
    if (j.contains("ID")) d.id = scalar_text(j["ID"]);
    const auto body = std::string(trim(j.at("Body").get<std::string>()));
    const auto question = std::string(trim(j.at("Question").get<std::string>()));
    d.question = body.empty() ? question : body + " " + question;
    d.gold = scalar_text(j.at("Answer"));
    return d;
}

Draft convert_mawps(const ordered_json& j) {
    Draft d;
    if (j.contains("iIndex")) d.id = scalar_text(j["iIndex"]);
    d.question = std::string(trim(j.at("sQuestion").get<std::string>()));
    const auto& solutions = j.at("lSolutions");
    if (!solutions.is_array() || solutions.empty()) throw SchemaError("lSolutions is empty");
    d.gold = scalar_text(solutions[0]);
    return d;
}

Draft convert_csqa(const ordered_json& j) {
    Draft d;
    d.id = j.value("id", std::string());
    d.question = j.at("question").at("stem").get<std::string>();
    for (const auto& c : j.at("question").at("choices")) {
        const auto label = c.at("label").get<std::string>();
        if (label.size() != 1) throw SchemaError("choice label must be one letter: " + label);
        d.choices.emplace_back(label[0], c.at("text").get<std::string>());
    }
    d.gold = j.at("answerKey").get<std::string>();
    return d;
}

Draft convert_strategyqa(const ordered_json& j) {
    Draft d;
    d.id = j.value("qid", std::string());
    d.question = j.at("question").get<std::string>();
    d.gold = scalar_text(j.at("answer"));
    return d;
}

// BIG-bench multiple choice: options become letters in file order.
Draft convert_bigbench(const ordered_json& j) {
    Draft d;
    d.question = std::string(trim(j.at("input").get<std::string>()));
    char letter = 'A';
    for (const auto& [option, score] : j.at("target_scores").items()) {
        if (score.get<double>() > 0.5) d.gold = std::string(1, letter);
        d.choices.emplace_back(letter, option);
        ++letter;
    }
    if (d.gold.empty()) throw SchemaError("BIG-bench example without a positive target");
    return d;
}

Draft convert_examples(const ordered_json& j) {
    Draft d;
    d.question = j.at("question").get<std::string>();
    d.gold = scalar_text(j.at("answer"));
    return d;
}

struct Importer {
    Items (*read)(const std::string&);
    Draft (*convert)(const ordered_json&);
};

const std::map<std::string_view, Importer>& importers() {
    static const std::map<std::string_view, Importer> table = {
        {"aqua", {parse_lines, convert_aqua}},
        {"gsm8k", {parse_lines, convert_gsm8k}},
        {"svamp", {document_array, convert_svamp}},
        {"addsub", {document_array, convert_mawps}},
        {"singleeq", {document_array, convert_mawps}},
        {"multiarith", {document_array, convert_mawps}},
        {"commonsenseqa", {parse_lines, convert_csqa}},
        {"strategyqa", {document_array, convert_strategyqa}},
        {"date", {examples_array, convert_bigbench}},
        {"object", {examples_array, convert_bigbench}},
        {"last_letters", {examples_array, convert_examples}},
        {"coin_flip", {examples_array, convert_examples}},
    };
    return table;
}

}  // namespace

std::vector<std::string_view> importable_datasets() {
    std::vector<std::string_view> names;
    for (const auto& [name, importer] : importers()) names.push_back(name);
    return names;
}

std::vector<QuestionRecord> import_records(std::string_view name, const std::string& source_path) {
    const auto it = importers().find(name);
    const auto known = find_known_dataset(name);
    if (it == importers().end() || !known) {
        throw UnknownDataset("no importer for dataset '" + std::string(name) + "'");
    }
    const auto items = it->second.read(source_path);

    std::vector<QuestionRecord> records;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto item_error = [&](const char* what) {
            return SchemaError(source_path + ": item " + std::to_string(i + 1) + ": " + what, i + 1);
        };
        Draft d;
        try {
            d = it->second.convert(items[i]);
        } catch (const SchemaError& e) {
            throw item_error(e.what());
        } catch (const ordered_json::exception& e) {
            throw item_error(e.what());
        }
        QuestionRecord r;
        r.id = std::string(name) + "-" + (d.id.empty() ? std::to_string(i) : d.id);
        r.dataset_id = std::string(name);
        r.question_text = std::string(trim(d.question));
        r.choices = std::move(d.choices);
        r.format = known->format;
        r.category = known->category;
        r.gold = normalize(d.gold, r.format);
        try {
            validate(r);
        } catch (const SchemaError& e) {
            throw item_error(e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::size_t import_dataset(std::string_view name, const std::string& source_path,
                           const std::string& destination_path) {
    const auto records = import_records(name, source_path);
    save(records, destination_path);
    return records.size();
}

}  // namespace jh
