#include "scenegen/narrative.hpp"

#include <algorithm>
#include <set>

#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;

std::string_view affordance_label(Affordance a) {
    switch (a) {
        case Affordance::Terrain: return "terrain";
        case Affordance::EnvironmentalObject: return "environmental_object";
        case Affordance::InteractiveObject: return "interactive_object";
        case Affordance::ItemCollectible: return "item_collectible";
        case Affordance::CharacterCreature: return "character_creature";
    }
    return "terrain";
}

std::string affordance_words(Affordance a) {
    std::string s(affordance_label(a));
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
}

std::optional<Affordance> affordance_from_label(std::string_view label) {
    std::string key = to_lower(label);
    for (char& c : key) {
        if (c == ' ' || c == '/' || c == '-') c = '_';
    }
    static const std::pair<std::string_view, Affordance> table[] = {
        {"terrain", Affordance::Terrain},
        {"environmental_object", Affordance::EnvironmentalObject},
        {"interactive_object", Affordance::InteractiveObject},
        {"item_collectible", Affordance::ItemCollectible},
        {"item_collectable", Affordance::ItemCollectible},
        {"character_creature", Affordance::CharacterCreature},
    };
    for (const auto& [name, value] : table) {
        if (key == name) return value;
    }
    return std::nullopt;
}

std::string normalize_entity_name(std::string_view raw) {
    if (trim(raw).empty()) fail("InvalidArgument", "entity name is empty");

    std::string folded;
    folded.reserve(raw.size());
    for (unsigned char c : raw) {
        if (c == '_' || c == '-') {
            folded.push_back(' ');
        } else {
            folded.push_back(static_cast<char>(std::tolower(c)));
        }
    }

    std::vector<std::string> tokens = split_ws(folded);
    // Strip *leading* articles only; repeat so the result is idempotent.
    while (!tokens.empty() &&
           (tokens.front() == "the" || tokens.front() == "a" || tokens.front() == "an")) {
        tokens.erase(tokens.begin());
    }
    if (tokens.empty()) {
        fail("EmptyAfterNormalization",
             "entity name \"" + std::string(raw) + "\" is only articles/punctuation");
    }
    return join(tokens, " ");
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
    fail("MalformedDocument", what);
}

std::string require_string(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j[field].is_string()) {
        malformed(where + ": missing or non-string field \"" + field + "\"");
    }
    return j[field].get<std::string>();
}

std::string require_nonempty(const json& j, const char* field, const std::string& where) {
    std::string v = trim(require_string(j, field, where));
    if (v.empty()) malformed(where + ": field \"" + field + "\" is empty");
    return v;
}

// Check that every triple endpoint resolves to some object, comparing through
// normalize_entity_name so raw-case differences do not trip strict mode.
void link_triples_to_objects(SceneFrame& frame, const ParseOptions& opts) {
    std::set<std::string> known;
    for (const NarrativeObject& obj : frame.objects) {
        known.insert(normalize_entity_name(obj.name));
    }
    for (const PredicateTriple& t : frame.triples) {
        for (const std::string* name : {&t.subject, &t.object}) {
            std::string key = normalize_entity_name(*name);
            if (known.count(key)) continue;
            if (!opts.permissive) {
                fail("DanglingEntity", "frame \"" + frame.name + "\": triple entity \"" +
                                           *name + "\" is not in the objects list");
            }
            frame.objects.push_back(NarrativeObject{*name, std::nullopt, ""});
            known.insert(key);
        }
    }
}

}  // namespace

StoryBundle parse_story_bundle(const nlohmann::json& doc, const ParseOptions& opts) {
    if (!doc.is_object()) malformed("story document root must be an object");

    StoryBundle bundle;
    bundle.title = require_nonempty(doc, "title", "story");
    bundle.story_text = require_string(doc, "story", "story");

    if (!doc.contains("frames") || !doc["frames"].is_array()) {
        malformed("story: missing or non-array field \"frames\"");
    }
    if (doc["frames"].empty()) fail("EmptyFrames", "story has no frames");

    std::set<std::string> frame_names;
    for (const json& jf : doc["frames"]) {
        if (!jf.is_object()) malformed("frame entries must be objects");
        SceneFrame frame;
        frame.name = require_nonempty(jf, "name", "frame");
        if (!frame_names.insert(frame.name).second) {
            malformed("duplicate frame name \"" + frame.name + "\"");
        }
        if (jf.contains("scene_break")) {
            if (!jf["scene_break"].is_boolean()) {
                malformed("frame \"" + frame.name + "\": scene_break must be boolean");
            }
            frame.scene_break = jf["scene_break"].get<bool>();
        }

        if (!jf.contains("triples") || !jf["triples"].is_array()) {
            malformed("frame \"" + frame.name + "\": missing triples array");
        }
        if (jf["triples"].empty()) {
            fail("EmptyFrames", "frame \"" + frame.name + "\" has an empty triples list");
        }
        for (const json& jt : jf["triples"]) {
            if (!jt.is_object()) malformed("triple entries must be objects");
            PredicateTriple t;
            const std::string where = "frame \"" + frame.name + "\" triple";
            t.subject = require_nonempty(jt, "subject", where);
            t.relation = require_nonempty(jt, "relation", where);
            t.object = require_nonempty(jt, "object", where);
            frame.triples.push_back(std::move(t));
        }

        if (jf.contains("objects")) {
            if (!jf["objects"].is_array()) {
                malformed("frame \"" + frame.name + "\": objects must be an array");
            }
            for (const json& jo : jf["objects"]) {
                if (!jo.is_object()) malformed("object entries must be objects");
                NarrativeObject obj;
                obj.name = require_nonempty(jo, "name", "frame \"" + frame.name + "\" object");
                if (jo.contains("affordance") && !jo["affordance"].is_null()) {
                    std::string label = require_string(jo, "affordance", "object");
                    auto aff = affordance_from_label(label);
                    if (!aff) {
                        malformed("object \"" + obj.name + "\": unknown affordance \"" +
                                  label + "\"");
                    }
                    obj.affordance = aff;
                }
                if (jo.contains("suggested_terrain") && !jo["suggested_terrain"].is_null()) {
                    obj.suggested_terrain =
                        trim(require_string(jo, "suggested_terrain", "object"));
                }
                frame.objects.push_back(std::move(obj));
            }
        }

        link_triples_to_objects(frame, opts);
        bundle.frames.push_back(std::move(frame));
    }
    return bundle;
}

StoryBundle parse_story_file(const std::filesystem::path& path, const ParseOptions& opts) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", path.string() + ": " + e.what());
    }
    return parse_story_bundle(doc, opts);
}

nlohmann::json story_to_json(const StoryBundle& bundle) {
    json doc;
    doc["title"] = bundle.title;
    doc["story"] = bundle.story_text;
    doc["frames"] = json::array();
    for (const SceneFrame& frame : bundle.frames) {
        json jf;
        jf["name"] = frame.name;
        jf["scene_break"] = frame.scene_break;
        jf["triples"] = json::array();
        for (const PredicateTriple& t : frame.triples) {
            jf["triples"].push_back(
                {{"subject", t.subject}, {"relation", t.relation}, {"object", t.object}});
        }
        jf["objects"] = json::array();
        for (const NarrativeObject& obj : frame.objects) {
            json jo;
            jo["name"] = obj.name;
            if (obj.affordance) jo["affordance"] = std::string(affordance_label(*obj.affordance));
            if (!obj.suggested_terrain.empty()) jo["suggested_terrain"] = obj.suggested_terrain;
            jf["objects"].push_back(std::move(jo));
        }
        doc["frames"].push_back(std::move(jf));
    }
    return doc;
}

StoryBundle apply_alias_map(const StoryBundle& bundle, const AliasMap& aliases) {
    for (const auto& [key, value] : aliases) {
        if (normalize_entity_name(value) != value) {
            fail("InvalidArgument",
                 "alias value \"" + value + "\" is not a canonical entity key");
        }
        (void)key;
    }

    auto canon = [&](const std::string& raw) {
        std::string key = normalize_entity_name(raw);
        auto it = aliases.find(key);
        return it == aliases.end() ? key : it->second;  // single hop only
    };

    StoryBundle out;
    out.title = bundle.title;
    out.story_text = bundle.story_text;
    for (const SceneFrame& frame : bundle.frames) {
        SceneFrame nf;
        nf.name = frame.name;
        nf.scene_break = frame.scene_break;
        for (const PredicateTriple& t : frame.triples) {
            nf.triples.push_back(PredicateTriple{canon(t.subject), t.relation, canon(t.object)});
        }
        // Merge objects that collapse to the same canonical key.
        std::map<std::string, size_t> index;
        for (const NarrativeObject& obj : frame.objects) {
            std::string key = canon(obj.name);
            auto it = index.find(key);
            if (it == index.end()) {
                index[key] = nf.objects.size();
                nf.objects.push_back(NarrativeObject{key, obj.affordance, obj.suggested_terrain});
            } else {
                NarrativeObject& kept = nf.objects[it->second];
                if (!kept.affordance && obj.affordance) kept.affordance = obj.affordance;
                if (kept.suggested_terrain.empty()) kept.suggested_terrain = obj.suggested_terrain;
            }
        }
        for (const PredicateTriple& t : nf.triples) {
            for (const std::string* name : {&t.subject, &t.object}) {
                if (!index.count(*name)) {
                    fail("DanglingEntity", "frame \"" + nf.name + "\": aliasing broke linkage for \"" +
                                               *name + "\"");
                }
            }
        }
        out.frames.push_back(std::move(nf));
    }
    return out;
}

AliasMap load_alias_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", path.string() + ": " + e.what());
    }
    if (!doc.is_object()) fail("MalformedDocument", path.string() + ": alias map must be an object");
    AliasMap out;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!it.value().is_string()) {
            fail("MalformedDocument", path.string() + ": alias values must be strings");
        }
        out[normalize_entity_name(it.key())] = it.value().get<std::string>();
    }
    return out;
}

}  // namespace scenegen
