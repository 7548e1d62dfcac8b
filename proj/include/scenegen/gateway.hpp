#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/narrative.hpp"
#include "scenegen/relations.hpp"

namespace scenegen {

struct PromptTemplate {
    std::string id;
    std::string template_text;  // placeholders in {braces}
};

// Registered templates: "prompt_1" (story generation) and "prompt_2" (frame
// extraction) carry the paper's wording verbatim; "classify_object" and
// "normalize_relation" are artifact additions.
const PromptTemplate& prompt_template(std::string_view id);

struct ClassificationResult {
    std::string object_name;  // canonical entity key
    Affordance affordance = Affordance::EnvironmentalObject;
    std::string suggested_terrain;  // may be empty

    bool operator==(const ClassificationResult&) const = default;
};

// Recorded request/response pairs for deterministic offline runs. Lookup is by
// fingerprint, not order, so the cassette survives call reordering.
class ReplayCassette {
public:
    ReplayCassette() = default;
    static ReplayCassette load(const std::filesystem::path& path);
    static ReplayCassette from_json(const nlohmann::json& doc);

    void add(const std::string& fingerprint, const std::string& response);
    std::optional<std::string> lookup(const std::string& fingerprint) const;
    size_t size() const { return records_.size(); }

private:
    std::map<std::string, std::string> records_;
};

enum class GatewayMode { Live, Replay, Fallback };

std::optional<GatewayMode> gateway_mode_from_name(std::string_view name);
std::string_view gateway_mode_name(GatewayMode mode);

struct GatewayConfig {
    GatewayMode mode = GatewayMode::Fallback;
    std::string endpoint;     // full URL of a chat-completion style endpoint
    std::string model;
    std::string api_key_env;  // name of the env var holding the bearer token
    std::filesystem::path cassette_path;
    Relation near_default = Relation::AtLeftOf;
    // Names containing one of these tokens become terrain patch candidates.
    std::vector<std::string> terrain_keywords = {
        "path", "road", "trail", "floor", "alley", "ground", "dune", "stairs"};
};

// Token-level keyword test with a trailing-'s' plural fold.
bool name_has_terrain_keyword(const std::string& name,
                              const std::vector<std::string>& keywords);

class LlmGateway {
public:
    explicit LlmGateway(GatewayConfig cfg);

    GatewayMode mode() const { return cfg_.mode; }

    // Prompt_1. Live/replay only; fallback mode has no story source.
    std::string generate_story(const std::string& seed_prompt);

    // Prompt_2. The response must be a story document; anything else raises
    // UnparseableResponse with the raw text preserved.
    StoryBundle extract_frames(const std::string& story);

    // Affordance + suggested terrain for one object. In fallback mode a
    // deterministic keyword table decides.
    ClassificationResult classify_object(const std::string& name, const std::string& context);

    // Relation normalization assistance for table misses. Total: live/replay
    // answers win, and the deterministic heuristic backs them up.
    std::optional<RelationMapping> suggest_relation(const std::string& phrase);

    // Stable request fingerprint over (template id, filled prompt text).
    static std::string fingerprint(const std::string& template_id, const std::string& filled);

    // The deterministic keyword heuristics, exposed for direct use and tests.
    static ClassificationResult classify_fallback(const std::string& name,
                                                  const std::vector<std::string>& terrain_keywords);
    static RelationMapping relation_heuristic(const std::string& phrase, Relation near_default);

private:
    std::string complete(const PromptTemplate& tmpl, const std::string& filled);
    std::string complete_live(const std::string& filled);

    GatewayConfig cfg_;
    ReplayCassette cassette_;
    mutable std::mutex mutex_;
};

}  // namespace scenegen
