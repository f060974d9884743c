#include "doctest.h"
#include "jh/errors.hpp"
#include "jh/persona.hpp"
#include "jh/sampling.hpp"
#include "transports.hpp"

using namespace jh;
using namespace jh::testing;

namespace {

ModelEndpoint generator() { return {"http://sim", "gen-model", 0.7, 32}; }

}  // namespace

TEST_CASE("persona json is found inside surrounding prose") {
    CHECK(parse_persona_json(R"({"job": "Math Teacher"})") == "Math Teacher");
    CHECK(parse_persona_json("Sure! Here you go:\n```json\n{\"job\": \"Chemist\"}\n```") == "Chemist");
    CHECK(parse_persona_json(R"(notes {broken {"job": "Judge"} tail)") == "Judge");
    CHECK(parse_persona_json(R"({"job": "Brace } Fan"})") == "Brace } Fan");
}

TEST_CASE("persona json without a usable job is rejected") {
    CHECK_THROWS_AS(parse_persona_json("A teacher would do."), PersonaParseError);
    CHECK_THROWS_AS(parse_persona_json(R"({"role": "Teacher"})"), PersonaParseError);
    CHECK_THROWS_AS(parse_persona_json(R"({"job": 3})"), PersonaParseError);
    CHECK_THROWS_AS(parse_persona_json(R"({"job": "   "})"), PersonaParseError);
}

TEST_CASE("persona jobs are folded and capped") {
    CHECK(make_persona("  Data \n  Scientist ", PersonaOrigin::generated).job == "Data Scientist");
    CHECK(make_persona(std::string(80, 'x'), PersonaOrigin::generated).job.size() == 80);
    CHECK_THROWS_AS(make_persona(std::string(81, 'x'), PersonaOrigin::generated), PersonaParseError);
    // The cap counts characters, not bytes.
    std::string accented;
    for (int i = 0; i < 80; ++i) accented += "é";
    CHECK_NOTHROW(make_persona(accented, PersonaOrigin::generated));
}

TEST_CASE("generation re-asks on unparseable replies with fresh sample indices") {
    auto t = std::make_shared<ScriptedTransport>(
        std::vector<ScriptedTransport::Step>{{200, "I would pick a chef."}, {200, R"({"job": "Chef"})"}});
    Harness h(t);
    const auto p = generate_persona("How long to boil an egg?", generator(), h.calls(), sample_slot(2, 0));
    CHECK(p.job == "Chef");
    CHECK(p.origin == PersonaOrigin::generated);
    CHECK(p.generator_model == "gen-model");
    const auto entries = h.ledger.entries();
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].stage == Stage::persona_gen);
    CHECK(entries[0].sample_index == with_reask(sample_slot(2, 0), 0));
    CHECK(entries[1].sample_index == with_reask(sample_slot(2, 0), 1));
}

TEST_CASE("generation gives up after three attempts") {
    auto t = std::make_shared<ScriptedTransport>(
        std::vector<ScriptedTransport::Step>{{200, "no"}, {200, "still no"}, {200, "never"}});
    Harness h(t);
    CHECK_THROWS_AS(generate_persona("Q?", generator(), h.calls(), 0), PersonaParseError);
    CHECK(h.ledger.size() == 3);
}

TEST_CASE("handcrafted personas rotate with the run index") {
    const auto registry = HandcraftedRegistry::load(JH_SOURCE_DIR "/config/handcrafted_personas.json");
    CHECK(handcrafted_persona("aqua", 0, registry).job == "Math teacher");
    CHECK(handcrafted_persona("aqua", 1, registry).job == "Mathematician");
    CHECK(handcrafted_persona("aqua", 2, registry).job == "Math Tutor");
    CHECK(handcrafted_persona("aqua", 3, registry).job == "Math teacher");
    CHECK(handcrafted_persona("object", 2, registry).job == "Logical Reasoner");
    CHECK(handcrafted_persona("object", 0, registry).origin == PersonaOrigin::handcrafted);
    CHECK_THROWS_AS(handcrafted_persona("gsm8k", 0, registry), UnknownDataset);
}

TEST_CASE("the shipped registry matches the built-in defaults") {
    const auto registry = HandcraftedRegistry::load(JH_SOURCE_DIR "/config/handcrafted_personas.json");
    const auto defaults = HandcraftedRegistry::defaults();
    for (const char* dataset : {"aqua", "object"}) {
        CHECK(registry.personas(dataset) == defaults.personas(dataset));
    }
}
