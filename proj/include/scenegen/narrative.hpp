#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace scenegen {

// Gameplay role of a narrative object / tile. Closed set of five values.
enum class Affordance {
    Terrain,
    EnvironmentalObject,
    InteractiveObject,
    ItemCollectible,
    CharacterCreature,
};

constexpr int kAffordanceCount = 5;

// Stable file label, e.g. "environmental_object".
std::string_view affordance_label(Affordance a);

// Human-readable words used on the embedding side, e.g. "environmental object".
std::string affordance_words(Affordance a);

// Tolerant reverse lookup: lowercases and folds ' ', '/' and '-' to '_' before
// matching, so "item/collectible" and "Item Collectible" both resolve.
std::optional<Affordance> affordance_from_label(std::string_view label);

struct PredicateTriple {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const PredicateTriple&) const = default;
};

struct NarrativeObject {
    std::string name;
    std::optional<Affordance> affordance;
    std::string suggested_terrain;  // free-text label, may be empty

    bool operator==(const NarrativeObject&) const = default;
};

struct SceneFrame {
    std::string name;
    bool scene_break = false;  // explicit location change before this frame
    std::vector<PredicateTriple> triples;
    std::vector<NarrativeObject> objects;

    bool operator==(const SceneFrame&) const = default;
};

struct StoryBundle {
    std::string title;
    std::string story_text;
    std::vector<SceneFrame> frames;

    bool operator==(const StoryBundle&) const = default;
};

struct ParseOptions {
    // Strict mode rejects triples whose entities are missing from the frame's
    // object list; permissive mode auto-creates them with no affordance.
    bool permissive = false;
};

// Canonical entity key: lowercased, '_'/'-' folded to spaces, whitespace
// collapsed, leading articles stripped. Idempotent. Throws
// EmptyAfterNormalization when nothing survives.
std::string normalize_entity_name(std::string_view raw);

using AliasMap = std::map<std::string, std::string>;

// Parse the story document. Raw entity names are preserved; alias
// normalization happens separately in apply_alias_map.
StoryBundle parse_story_bundle(const nlohmann::json& doc, const ParseOptions& opts = {});
StoryBundle parse_story_file(const std::filesystem::path& path, const ParseOptions& opts = {});

nlohmann::json story_to_json(const StoryBundle& bundle);

// Normalizes every entity name (normalize_entity_name, then a single alias
// lookup — no transitive chasing) across triples and objects. Objects that
// collapse onto the same canonical key are merged, keeping the first
// occurrence's metadata and filling gaps from later duplicates.
StoryBundle apply_alias_map(const StoryBundle& bundle, const AliasMap& aliases);

AliasMap load_alias_file(const std::filesystem::path& path);

}  // namespace scenegen
