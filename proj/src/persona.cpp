#include "jh/persona.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jh/errors.hpp"
#include "jh/prompts.hpp"
#include "jh/sampling.hpp"
#include "jh/text.hpp"

namespace jh {

std::string_view to_string(PersonaOrigin origin) {
    return origin == PersonaOrigin::generated ? "generated" : "handcrafted";
}

namespace {

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xc0) != 0x80 ? 1 : 0;
    return n;
}

// End (one past '}') of the balanced object starting at `open`, or npos.
std::size_t match_object(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

Persona make_persona(std::string_view job, PersonaOrigin origin,
                     std::optional<std::string> generator_model) {
    std::string folded;
    for (const auto& word : split_whitespace(job)) {
        if (!folded.empty()) folded.push_back(' ');
        folded += word;
    }
    if (folded.empty()) throw PersonaParseError("persona job is empty");
    if (utf8_length(folded) > kMaxPersonaChars) {
        throw PersonaParseError("persona job longer than " + std::to_string(kMaxPersonaChars) +
                                " characters");
    }
    return Persona{std::move(folded), origin, std::move(generator_model)};
}

std::string parse_persona_json(std::string_view text) {
    for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        const auto end = match_object(text, open);
        if (end == std::string_view::npos) continue;
        nlohmann::json object;
        try {
            object = nlohmann::json::parse(text.substr(open, end - open));
        } catch (const nlohmann::json::parse_error&) {
            continue;
        }
        const auto it = object.find("job");
        if (it == object.end() || !it->is_string()) {
            throw PersonaParseError("JSON object has no string \"job\"");
        }
        const auto job = std::string(trim(it->get<std::string>()));
        if (job.empty()) throw PersonaParseError("\"job\" is empty");
        return job;
    }
    throw PersonaParseError("no JSON object in persona response");
}

Persona generate_persona(std::string_view question, const ModelEndpoint& generator,
                         const CallContext& calls, std::uint64_t slot_index) {
    const Messages messages = render_persona_gen(question);
    std::string last_error;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const auto response = calls.complete(
            make_request(generator, Stage::persona_gen, messages, with_reask(slot_index, attempt)));
        try {
            return make_persona(parse_persona_json(response.content), PersonaOrigin::generated,
                                generator.model);
        } catch (const PersonaParseError& e) {
            last_error = e.what();
        }
    }
    throw PersonaParseError("persona generation failed after 3 attempts: " + last_error);
}

HandcraftedRegistry::HandcraftedRegistry(std::map<std::string, std::vector<std::string>> personas)
    : personas_(std::move(personas)) {
    for (const auto& [dataset, list] : personas_) {
        if (list.empty()) throw ConfigError("handcrafted registry: '" + dataset + "' has no personas");
    }
}

HandcraftedRegistry HandcraftedRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open handcrafted persona registry: " + path);
    try {
        const auto j = nlohmann::json::parse(in);
        return HandcraftedRegistry(j.get<std::map<std::string, std::vector<std::string>>>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("handcrafted persona registry " + path + ": " + e.what());
    }
}

HandcraftedRegistry HandcraftedRegistry::defaults() {
    return HandcraftedRegistry({
        {"aqua", {"Math teacher", "Mathematician", "Math Tutor"}},
        {"object", {"Observer", "Recorder", "Logical Reasoner"}},
    });
}

bool HandcraftedRegistry::contains(const std::string& dataset_id) const {
    return personas_.count(dataset_id) != 0;
}

const std::vector<std::string>& HandcraftedRegistry::personas(const std::string& dataset_id) const {
    auto it = personas_.find(dataset_id);
    if (it == personas_.end()) throw UnknownDataset("no handcrafted personas for '" + dataset_id + "'");
    return it->second;
}

Persona handcrafted_persona(const std::string& dataset_id, std::uint64_t run_index,
                            const HandcraftedRegistry& registry) {
    const auto& list = registry.personas(dataset_id);
    return make_persona(list[run_index % list.size()], PersonaOrigin::handcrafted);
}

}  // namespace jh
