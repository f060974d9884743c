#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jh/gateway.hpp"

namespace jh {

enum class PersonaOrigin { generated, handcrafted };

std::string_view to_string(PersonaOrigin origin);

struct Persona {
    std::string job;
    PersonaOrigin origin = PersonaOrigin::generated;
    std::optional<std::string> generator_model;

    friend bool operator==(const Persona&, const Persona&) = default;
};

inline constexpr std::size_t kMaxPersonaChars = 80;

/// Trims, folds internal whitespace runs to one space and enforces the
/// length cap. Throws PersonaParseError when the result is unusable.
Persona make_persona(std::string_view job, PersonaOrigin origin,
                     std::optional<std::string> generator_model = std::nullopt);

/// "job" of the first top-level JSON object found in `text`. Surrounding
/// prose and code fences are tolerated.
std::string parse_persona_json(std::string_view text);

/// Asks the generator model for a persona; up to two re-asks on parse failure.
Persona generate_persona(std::string_view question, const ModelEndpoint& generator,
                         const CallContext& calls, std::uint64_t slot_index);

class HandcraftedRegistry {
public:
    HandcraftedRegistry() = default;
    explicit HandcraftedRegistry(std::map<std::string, std::vector<std::string>> personas);

    static HandcraftedRegistry load(const std::string& path);
    /// The shipped lists for "aqua" and "object".
    static HandcraftedRegistry defaults();

    bool contains(const std::string& dataset_id) const;
    const std::vector<std::string>& personas(const std::string& dataset_id) const;

private:
    std::map<std::string, std::vector<std::string>> personas_;
};

Persona handcrafted_persona(const std::string& dataset_id, std::uint64_t run_index,
                            const HandcraftedRegistry& registry);

}  // namespace jh
