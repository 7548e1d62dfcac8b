#include "scenegen/gateway.hpp"

#include <algorithm>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;

namespace {

const PromptTemplate kTemplates[] = {
    {"prompt_1", "Generate a short adventure story (about 100 words)."},
    {"prompt_2",
     "Extract three key time frames and describe each with [Object] [Relation] [Object] "
     "triplets.\n\nRespond as a JSON story document with fields title, story and frames.\n\n"
     "Story:\n{story}"},
    {"classify_object",
     "Classify the narrative object \"{name}\" for a 2D tile game scene. Affordance options: "
     "terrain, environmental_object, interactive_object, item_collectible, character_creature. "
     "Also suggest the implied terrain as a short lowercase label (empty if none). Respond as "
     "JSON: {\"affordance\":\"...\",\"suggested_terrain\":\"...\"}.\n\nStory context:\n{context}"},
    {"normalize_relation",
     "Map the relation phrase \"{phrase}\" to one of: above, below, at_left_of, at_right_of, "
     "on_top_of. Respond with the single canonical name."},
};

std::string fill(const std::string& tmpl, const std::string& key, const std::string& value) {
    std::string out = tmpl;
    const std::string needle = "{" + key + "}";
    size_t pos = out.find(needle);
    if (pos != std::string::npos) out.replace(pos, needle.size(), value);
    return out;
}

bool has_token(const std::vector<std::string>& tokens, const std::string& word) {
    for (const std::string& t : tokens) {
        if (t == word) return true;
        if (t.size() > 1 && t.back() == 's' && t.substr(0, t.size() - 1) == word) return true;
    }
    return false;
}

bool has_any_token(const std::vector<std::string>& tokens,
                   std::initializer_list<const char*> words) {
    for (const char* w : words) {
        if (has_token(tokens, w)) return true;
    }
    return false;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view id) {
    for (const PromptTemplate& t : kTemplates) {
        if (t.id == id) return t;
    }
    fail("InvalidArgument", "unknown prompt template \"" + std::string(id) + "\"");
}

ReplayCassette ReplayCassette::load(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", path.string() + ": " + e.what());
    }
    return from_json(doc);
}

ReplayCassette ReplayCassette::from_json(const nlohmann::json& doc) {
    const json* records = nullptr;
    if (doc.is_array()) {
        records = &doc;
    } else if (doc.is_object() && doc.contains("records") && doc["records"].is_array()) {
        records = &doc["records"];
    } else {
        fail("MalformedDocument", "cassette must be an array or an object with \"records\"");
    }

    ReplayCassette cassette;
    for (const json& rec : *records) {
        if (!rec.is_object() || !rec.contains("response") || !rec["response"].is_string()) {
            fail("MalformedDocument", "cassette record lacks a response string");
        }
        std::string fp;
        if (rec.contains("fingerprint") && rec["fingerprint"].is_string()) {
            fp = rec["fingerprint"].get<std::string>();
        } else if (rec.contains("template_id") && rec.contains("prompt")) {
            // Authoring convenience: fingerprint computed at load time.
            fp = LlmGateway::fingerprint(rec["template_id"].get<std::string>(),
                                         rec["prompt"].get<std::string>());
        } else {
            fail("MalformedDocument", "cassette record needs fingerprint or template_id+prompt");
        }
        cassette.add(fp, rec["response"].get<std::string>());
    }
    return cassette;
}

void ReplayCassette::add(const std::string& fingerprint, const std::string& response) {
    if (!records_.emplace(fingerprint, response).second) {
        fail("MalformedDocument", "duplicate cassette fingerprint " + fingerprint);
    }
}

std::optional<std::string> ReplayCassette::lookup(const std::string& fingerprint) const {
    auto it = records_.find(fingerprint);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::optional<GatewayMode> gateway_mode_from_name(std::string_view name) {
    if (name == "live") return GatewayMode::Live;
    if (name == "replay") return GatewayMode::Replay;
    if (name == "fallback") return GatewayMode::Fallback;
    return std::nullopt;
}

std::string_view gateway_mode_name(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Replay: return "replay";
        case GatewayMode::Fallback: return "fallback";
    }
    return "fallback";
}

bool name_has_terrain_keyword(const std::string& name,
                              const std::vector<std::string>& keywords) {
    std::vector<std::string> tokens = alnum_tokens(name);
    for (const std::string& kw : keywords) {
        if (has_token(tokens, kw)) return true;
    }
    return false;
}

LlmGateway::LlmGateway(GatewayConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.mode == GatewayMode::Replay) {
        if (cfg_.cassette_path.empty()) {
            fail("InvalidArgument", "replay mode requires a cassette path");
        }
        cassette_ = ReplayCassette::load(cfg_.cassette_path);
    }
    if (cfg_.mode == GatewayMode::Live && cfg_.endpoint.empty()) {
        fail("InvalidArgument", "live mode requires llm.endpoint");
    }
}

std::string LlmGateway::fingerprint(const std::string& template_id, const std::string& filled) {
    return to_hex(fnv1a64(filled, fnv1a64(template_id) ^ 0x5bd1e995u));
}

std::string LlmGateway::complete(const PromptTemplate& tmpl, const std::string& filled) {
    switch (cfg_.mode) {
        case GatewayMode::Replay: {
            std::lock_guard<std::mutex> lock(mutex_);
            std::string fp = fingerprint(tmpl.id, filled);
            if (auto hit = cassette_.lookup(fp)) return *hit;
            fail("ReplayMiss", "no cassette record for " + tmpl.id + " fingerprint " + fp);
        }
        case GatewayMode::Live:
            return complete_live(filled);
        case GatewayMode::Fallback:
            fail("GatewayUnavailable", "no LLM backend in fallback mode for " + tmpl.id);
    }
    fail("GatewayUnavailable", "unreachable");
}

std::string LlmGateway::complete_live(const std::string& filled) {
    // Endpoint is a full URL; split it into base ("scheme://host:port") and path.
    size_t scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        fail("InvalidArgument", "llm.endpoint must be a full URL: " + cfg_.endpoint);
    }
    size_t path_start = cfg_.endpoint.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? cfg_.endpoint
                                                       : cfg_.endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? std::string("/")
                                                       : cfg_.endpoint.substr(path_start);

    json body = {
        {"model", cfg_.model},
        {"temperature", 0},
        {"messages", json::array({{{"role", "user"}, {"content", filled}}})},
    };

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        fail("GatewayUnavailable", "no response from " + cfg_.endpoint);
    }
    if (res->status != 200) {
        fail("GatewayUnavailable",
             "endpoint returned status " + std::to_string(res->status));
    }
    try {
        json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        fail("UnparseableResponse", std::string("bad completion payload: ") + e.what());
    }
}

std::string LlmGateway::generate_story(const std::string& seed_prompt) {
    const PromptTemplate& tmpl = prompt_template("prompt_1");
    std::string filled = tmpl.template_text;
    if (!trim(seed_prompt).empty()) filled += "\nTheme: " + seed_prompt;
    std::string story = complete(tmpl, filled);
    if (trim(story).empty()) fail("UnparseableResponse", "empty story from gateway");
    return story;
}

StoryBundle LlmGateway::extract_frames(const std::string& story) {
    if (trim(story).empty()) fail("InvalidArgument", "story text is empty");
    const PromptTemplate& tmpl = prompt_template("prompt_2");
    std::string response = complete(tmpl, fill(tmpl.template_text, "story", story));
    json doc;
    try {
        doc = json::parse(response);
    } catch (const json::parse_error&) {
        fail("UnparseableResponse", "frame extraction output is not a story document; raw: " +
                                        response.substr(0, 400));
    }
    try {
        return parse_story_bundle(doc, ParseOptions{});
    } catch (const SceneError& e) {
        fail("UnparseableResponse", std::string("frame extraction output rejected (") +
                                        e.what() + "); raw: " + response.substr(0, 400));
    }
}

ClassificationResult LlmGateway::classify_fallback(
    const std::string& name, const std::vector<std::string>& terrain_keywords) {
    ClassificationResult out;
    out.object_name = name;
    std::vector<std::string> tokens = alnum_tokens(name);

    // Patch candidates: the name carries a terrain keyword; the remaining
    // tokens describe the terrain itself ("rocky path" -> "rocky").
    for (const std::string& kw : terrain_keywords) {
        if (!has_token(tokens, kw)) continue;
        out.affordance = Affordance::Terrain;
        std::vector<std::string> rest;
        for (const std::string& t : tokens) {
            std::string stem = (t.size() > 1 && t.back() == 's') ? t.substr(0, t.size() - 1) : t;
            bool is_kw = false;
            for (const std::string& k : terrain_keywords) {
                if (t == k || stem == k) { is_kw = true; break; }
            }
            if (!is_kw) rest.push_back(t);
        }
        out.suggested_terrain = rest.empty() ? join(tokens, " ") : join(rest, " ");
        return out;
    }

    if (has_any_token(tokens, {"grass", "forest", "desert", "sand", "snow", "water", "swamp",
                               "cave", "cavern", "mountain", "meadow", "beach", "wasteland",
                               "lava", "dirt", "mud", "ice"})) {
        out.affordance = Affordance::Terrain;
        out.suggested_terrain = join(tokens, " ");
        return out;
    }
    if (has_any_token(tokens, {"dragon", "creature", "beast", "wolf", "goblin", "guardian",
                               "knight", "hero", "girl", "boy", "villager", "traveler",
                               "monster", "spider", "snake", "guard", "wizard", "warrior"})) {
        out.affordance = Affordance::CharacterCreature;
        return out;
    }
    if (has_any_token(tokens, {"map", "scroll", "potion", "key", "amulet", "gem", "coin",
                               "treasure", "note", "book", "compass", "relic", "artifact",
                               "letter", "ring", "lantern", "sword", "shield"})) {
        out.affordance = Affordance::ItemCollectible;
        return out;
    }
    if (has_any_token(tokens, {"door", "lever", "chest", "gate", "switch", "throne", "portal",
                               "altar", "well", "ladder", "sign", "table", "entrance"})) {
        out.affordance = Affordance::InteractiveObject;
        return out;
    }
    out.affordance = Affordance::EnvironmentalObject;
    return out;
}

ClassificationResult LlmGateway::classify_object(const std::string& name,
                                                 const std::string& context) {
    if (trim(name).empty()) fail("InvalidArgument", "object name is empty");
    if (cfg_.mode == GatewayMode::Fallback) {
        return classify_fallback(name, cfg_.terrain_keywords);
    }

    const PromptTemplate& tmpl = prompt_template("classify_object");
    std::string filled = fill(fill(tmpl.template_text, "name", name), "context", context);
    std::string response = complete(tmpl, filled);

    json doc;
    try {
        doc = json::parse(response);
    } catch (const json::parse_error&) {
        fail("UnparseableResponse", "classification output is not JSON; raw: " +
                                        response.substr(0, 400));
    }
    if (!doc.is_object() || !doc.contains("affordance") || !doc["affordance"].is_string()) {
        fail("UnparseableResponse", "classification output lacks affordance; raw: " +
                                        response.substr(0, 400));
    }
    auto aff = affordance_from_label(doc["affordance"].get<std::string>());
    if (!aff) {
        fail("UnparseableResponse",
             "unknown affordance \"" + doc["affordance"].get<std::string>() + "\"");
    }
    ClassificationResult out;
    out.object_name = name;
    out.affordance = *aff;
    if (doc.contains("suggested_terrain") && doc["suggested_terrain"].is_string()) {
        out.suggested_terrain = trim(doc["suggested_terrain"].get<std::string>());
    }
    return out;
}

RelationMapping LlmGateway::relation_heuristic(const std::string& phrase, Relation near_default) {
    std::vector<std::string> tokens = alnum_tokens(phrase);
    if (has_any_token(tokens, {"above", "over"})) return {Relation::Above, false};
    if (has_any_token(tokens, {"below", "under", "beneath", "underneath", "down"})) {
        return {Relation::Below, false};
    }
    if (has_token(tokens, "left")) return {Relation::AtLeftOf, false};
    if (has_token(tokens, "right")) return {Relation::AtRightOf, false};
    if (has_any_token(tokens, {"contains", "contain", "holds", "hold", "holding"})) {
        return {Relation::OnTopOf, true};
    }
    if (has_any_token(tokens, {"on", "top", "atop", "upon", "in", "inside", "into", "within",
                               "along"})) {
        return {Relation::OnTopOf, false};
    }
    if (has_token(tokens, "behind")) return {Relation::AtRightOf, false};
    return {near_default, false};
}

std::optional<RelationMapping> LlmGateway::suggest_relation(const std::string& phrase) {
    if (cfg_.mode != GatewayMode::Fallback) {
        const PromptTemplate& tmpl = prompt_template("normalize_relation");
        try {
            std::string response = trim(complete(tmpl, fill(tmpl.template_text, "phrase", phrase)));
            if (auto rel = relation_from_name(response)) return RelationMapping{*rel, false};
        } catch (const SceneError&) {
            // Cassette miss / endpoint failure: the heuristic below decides.
        }
    }
    return relation_heuristic(phrase, cfg_.near_default);
}

}  // namespace scenegen
