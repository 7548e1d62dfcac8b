#include "scenegen/pipeline.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/placement.hpp"
#include "scenegen/rng.hpp"
#include "scenegen/scene_kg.hpp"
#include "scenegen/tile_index.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json load_json(const fs::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", path.string() + ": " + e.what());
    }
}

json require_artifact(const fs::path& run_dir, const char* name) {
    fs::path path = run_dir / name;
    if (!fs::exists(path)) {
        fail("MissingArtifacts", "run dir " + run_dir.string() + " lacks " + name);
    }
    return load_json(path);
}

void dump_json(const json& doc, const fs::path& path) {
    write_text_file(path, doc.dump(2) + "\n");
}

GatewayConfig gateway_config(const PipelineConfig& cfg) {
    GatewayConfig gw;
    gw.mode = cfg.llm_mode;
    gw.endpoint = cfg.llm_endpoint;
    gw.model = cfg.llm_model;
    gw.api_key_env = cfg.llm_api_key_env;
    gw.cassette_path = cfg.cassette_path;
    auto near = relation_from_name(cfg.near_default);
    if (!near) fail("InvalidArgument", "relations.near_default must be a canonical name");
    gw.near_default = *near;
    return gw;
}

RelationMapTable relation_table(const PipelineConfig& cfg) {
    auto near = relation_from_name(cfg.near_default);
    RelationMapTable table = RelationMapTable::builtin(*near);
    if (!cfg.relation_table_path.empty()) {
        table.merge(RelationMapTable::load(cfg.relation_table_path));
    }
    return table;
}

RelationFallback relation_fallback(const std::shared_ptr<LlmGateway>& gateway) {
    return [gateway](const std::string& phrase) { return gateway->suggest_relation(phrase); };
}

StoryBundle load_run_story(const fs::path& run_dir) {
    return parse_story_bundle(require_artifact(run_dir, "story.json"), ParseOptions{});
}

struct EntityMatchInfo {
    ClassificationResult classification;
    std::string classified_by;  // "inline", "gateway" or "fallback"
    std::vector<MatchResult> top;
    Affordance top_tile_affordance = Affordance::EnvironmentalObject;
};

std::map<std::string, EntityMatchInfo> load_matches(const fs::path& run_dir) {
    json doc = require_artifact(run_dir, "matches.json");
    std::map<std::string, EntityMatchInfo> out;
    for (const json& jo : doc.at("objects")) {
        EntityMatchInfo info;
        std::string entity = jo.at("entity").get<std::string>();
        info.classification.object_name = entity;
        auto aff = affordance_from_label(jo.at("affordance").get<std::string>());
        if (!aff) fail("MalformedDocument", "matches.json: bad affordance for " + entity);
        info.classification.affordance = *aff;
        info.classification.suggested_terrain = jo.value("suggested_terrain", std::string());
        info.classified_by = jo.value("classified_by", std::string("inline"));
        for (const json& jm : jo.at("top")) {
            MatchResult m;
            m.tile_id = jm.at("tile_id").get<std::string>();
            m.cosine = jm.at("cosine").get<double>();
            m.boosted_score = jm.at("boosted").get<double>();
            m.affordance_matched = jm.at("affordance_matched").get<bool>();
            info.top.push_back(std::move(m));
        }
        if (!jo.at("top").empty()) {
            auto tile_aff =
                affordance_from_label(jo.at("top").at(0).at("tile_affordance").get<std::string>());
            if (tile_aff) info.top_tile_affordance = *tile_aff;
        }
        out[entity] = std::move(info);
    }
    return out;
}

// Frame copy with object affordances/terrain filled from the classifications.
SceneFrame classified_frame(const SceneFrame& frame,
                            const std::map<std::string, EntityMatchInfo>& matches) {
    SceneFrame out = frame;
    for (NarrativeObject& obj : out.objects) {
        auto it = matches.find(obj.name);
        if (it == matches.end()) {
            fail("MissingArtifacts", "matches.json lacks entity \"" + obj.name + "\"");
        }
        obj.affordance = it->second.classification.affordance;
        if (obj.suggested_terrain.empty()) {
            obj.suggested_terrain = it->second.classification.suggested_terrain;
        }
    }
    return out;
}

std::map<std::string, MatchResult> top1_map(const SceneFrame& frame,
                                            const std::map<std::string, EntityMatchInfo>& matches) {
    std::map<std::string, MatchResult> out;
    for (const NarrativeObject& obj : frame.objects) {
        auto it = matches.find(obj.name);
        if (it != matches.end() && !it->second.top.empty()) {
            out[obj.name] = it->second.top.front();
        }
    }
    return out;
}

std::vector<fs::path> frame_layer_files(const fs::path& run_dir) {
    std::vector<fs::path> files;
    for (int k = 1;; ++k) {
        fs::path path = run_dir / ("frame_" + std::to_string(k) + ".layers");
        if (!fs::exists(path)) break;
        files.push_back(path);
    }
    return files;
}

}  // namespace

PipelineConfig load_config_file(const fs::path& path) {
    PipelineConfig cfg;
    std::istringstream stream(read_text_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        size_t eq = text.find('=');
        if (eq == std::string::npos) {
            fail("MalformedDocument",
                 path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (!set_config_value(cfg, key, value)) {
            fail("MalformedDocument",
                 path.string() + ":" + std::to_string(line_no) + ": unknown key \"" + key + "\"");
        }
    }
    return cfg;
}

bool set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&](const std::string& v) { return std::stoi(v); };
    auto as_double = [&](const std::string& v) { return std::stod(v); };

    if (key == "seed") {
        cfg.seed = std::stoull(value);
        cfg.seed_set = true;
    } else if (key == "story") {
        cfg.story_path = value;
    } else if (key == "prompt") {
        cfg.prompt = value;
    } else if (key == "tileset") {
        cfg.tileset_path = value;
    } else if (key == "tileset.embeddings") {
        cfg.embedding_manifest = value;
    } else if (key == "sprites") {
        cfg.sprites_dir = value;
    } else if (key == "aliases") {
        cfg.aliases_path = value;
    } else if (key == "relation_table") {
        cfg.relation_table_path = value;
    } else if (key == "cassette") {
        cfg.cassette_path = value;
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "llm.mode") {
        auto mode = gateway_mode_from_name(value);
        if (!mode) fail("InvalidArgument", "llm.mode must be live, replay or fallback");
        cfg.llm_mode = *mode;
    } else if (key == "llm.endpoint") {
        cfg.llm_endpoint = value;
    } else if (key == "llm.model") {
        cfg.llm_model = value;
    } else if (key == "llm.api_key_env") {
        cfg.llm_api_key_env = value;
    } else if (key == "terrain.width") {
        cfg.terrain.width = as_int(value);
    } else if (key == "terrain.height") {
        cfg.terrain.height = as_int(value);
    } else if (key == "terrain.p_init") {
        cfg.terrain.initial_walkable_prob = as_double(value);
    } else if (key == "terrain.iterations") {
        cfg.terrain.iterations = as_int(value);
    } else if (key == "terrain.birth") {
        cfg.terrain.birth_threshold = as_int(value);
    } else if (key == "terrain.max_retries") {
        cfg.terrain.max_retries = as_int(value);
    } else if (key == "terrain.patch_fraction") {
        cfg.patch_fraction = as_double(value);
    } else if (key == "terrain.default_base") {
        cfg.default_base = value;
    } else if (key == "match.lambda") {
        cfg.lambda = as_double(value);
    } else if (key == "match.top_k") {
        cfg.top_k = as_int(value);
    } else if (key == "match.dimension") {
        cfg.embed_dim = as_int(value);
    } else if (key == "render.tile_px") {
        cfg.render.tile_px = as_int(value);
    } else if (key == "render.object_scale") {
        cfg.render.object_scale = as_double(value);
    } else if (key == "relations.near_default") {
        cfg.near_default = value;
    } else if (key == "permissive") {
        cfg.permissive = value == "true" || value == "1";
    } else {
        return false;
    }
    return true;
}

std::filesystem::path prepare_story(const PipelineConfig& cfg) {
    if (cfg.out_dir.empty()) fail("InvalidArgument", "no output directory configured");

    StoryBundle bundle;
    if (!cfg.story_path.empty()) {
        if (!fs::exists(cfg.story_path)) {
            fail("InvalidArgument", "story file not found: " + cfg.story_path.string());
        }
        bundle = parse_story_file(cfg.story_path, ParseOptions{cfg.permissive});
    } else if (!cfg.prompt.empty()) {
        LlmGateway gateway(gateway_config(cfg));
        std::string story = gateway.generate_story(cfg.prompt);
        bundle = gateway.extract_frames(story);
    } else {
        fail("InvalidArgument", "need a story file or a prompt");
    }

    AliasMap aliases;
    if (!cfg.aliases_path.empty()) aliases = load_alias_file(cfg.aliases_path);
    bundle = apply_alias_map(bundle, aliases);

    fs::path run_dir = cfg.out_dir / slugify(bundle.title);
    fs::create_directories(run_dir);
    dump_json(story_to_json(bundle), run_dir / "story.json");
    return run_dir;
}

StageOutcome run_match(const PipelineConfig& cfg, const fs::path& run_dir) {
    StageOutcome outcome;
    StoryBundle bundle = load_run_story(run_dir);

    if (cfg.tileset_path.empty() || !fs::exists(cfg.tileset_path)) {
        fail("InvalidArgument", "tileset not found: " + cfg.tileset_path.string());
    }
    std::vector<TileRecord> tiles = load_tileset_jsonl(cfg.tileset_path);
    if (!cfg.embedding_manifest.empty()) {
        load_embedding_sidecar(tiles, cfg.embedding_manifest);
    }
    HashEmbeddingProvider provider(cfg.embed_dim);
    TileIndex index = TileIndex::build(std::move(tiles), provider);

    LlmGateway gateway(gateway_config(cfg));

    // First-seen inline metadata wins; everything else goes to the gateway.
    std::map<std::string, NarrativeObject> distinct;
    for (const SceneFrame& frame : bundle.frames) {
        for (const NarrativeObject& obj : frame.objects) {
            auto it = distinct.find(obj.name);
            if (it == distinct.end()) {
                distinct[obj.name] = obj;
            } else {
                if (!it->second.affordance && obj.affordance) {
                    it->second.affordance = obj.affordance;
                }
                if (it->second.suggested_terrain.empty()) {
                    it->second.suggested_terrain = obj.suggested_terrain;
                }
            }
        }
    }

    const int k = std::min<int>(cfg.top_k, static_cast<int>(index.records().size()));
    json objects = json::array();
    for (auto& [name, obj] : distinct) {
        std::string classified_by = "inline";
        if (!obj.affordance) {
            ClassificationResult cls = gateway.classify_object(name, bundle.story_text);
            obj.affordance = cls.affordance;
            if (obj.suggested_terrain.empty()) obj.suggested_terrain = cls.suggested_terrain;
            classified_by =
                gateway.mode() == GatewayMode::Fallback ? "fallback" : "gateway";
        }
        std::vector<MatchResult> top = index.query(obj, k, cfg.lambda, provider);

        json jtop = json::array();
        for (const MatchResult& m : top) {
            const TileRecord* tile = index.find(m.tile_id);
            jtop.push_back({{"tile_id", m.tile_id},
                            {"cosine", m.cosine},
                            {"boosted", m.boosted_score},
                            {"affordance_matched", m.affordance_matched},
                            {"tile_affordance",
                             std::string(affordance_label(tile->affordance))}});
        }
        objects.push_back({{"entity", name},
                           {"affordance", std::string(affordance_label(*obj.affordance))},
                           {"suggested_terrain", obj.suggested_terrain},
                           {"classified_by", classified_by},
                           {"top", std::move(jtop)}});
    }

    json doc;
    doc["story"] = bundle.title;
    doc["provider"] = provider.id();
    doc["dimension"] = cfg.embed_dim;
    doc["lambda"] = cfg.lambda;
    doc["top_k"] = k;
    doc["objects"] = std::move(objects);
    dump_json(doc, run_dir / "matches.json");
    return outcome;
}

StageOutcome run_layout(const PipelineConfig& cfg, const fs::path& run_dir) {
    StageOutcome outcome;
    if (!cfg.seed_set) fail("InvalidArgument", "layout requires --seed");

    StoryBundle bundle = load_run_story(run_dir);
    auto matches = load_matches(run_dir);

    std::map<std::string, ClassificationResult> classifications;
    for (const auto& [entity, info] : matches) classifications[entity] = info.classification;

    auto gateway_ptr = std::make_shared<LlmGateway>(gateway_config(cfg));
    RelationMapTable table = relation_table(cfg);
    RelationFallback fallback = relation_fallback(gateway_ptr);

    GatewayConfig gw = gateway_config(cfg);
    TerrainPlan plan =
        infer_terrain_plan(bundle, classifications, gw.terrain_keywords, cfg.default_base);
    for (const std::string& w : plan.warnings) outcome.warnings.push_back(w);

    json report;
    report["story"] = bundle.title;
    report["seed"] = cfg.seed;
    report["grid"] = {{"width", cfg.terrain.width}, {"height", cfg.terrain.height}};
    json frames = json::array();
    json review = json::array();

    int pooled_total = 0, pooled_satisfied = 0;
    for (size_t i = 0; i < bundle.frames.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        const ScenePlan& scene_plan = plan.scenes[i];
        SceneFrame frame = classified_frame(bundle.frames[i], matches);

        uint64_t mask_seed = derive_seed(cfg.seed, "terrain") + static_cast<uint64_t>(k);
        BaseMask mask = generate_base_mask(cfg.terrain, mask_seed);

        std::vector<PatchRegion> patches;
        for (size_t p = 0; p < scene_plan.patch_labels.size(); ++p) {
            uint64_t patch_seed = derive_seed(cfg.seed, "patch") +
                                  static_cast<uint64_t>(k) * 8191 + static_cast<uint64_t>(p);
            PatchRegion region =
                insert_patch(mask, scene_plan.patch_labels[p], cfg.patch_fraction, patch_seed);
            if (region.truncated) {
                outcome.warnings.push_back("frame " + std::to_string(k) + ": patch \"" +
                                           region.label + "\" truncated before size target");
            }
            patches.push_back(std::move(region));
        }

        uint64_t place_seed = derive_seed(cfg.seed, "placement") + static_cast<uint64_t>(k);
        SceneGrid grid = initial_place(frame, top1_map(frame, matches), mask, place_seed,
                                       std::move(patches));
        PlacementReport placement = apply_spatial_relations(grid, frame, table, fallback);
        std::vector<bool> final_sat = satisfied_triples(grid, frame, table, fallback);
        double rate = satisfaction_rate(grid, frame, table, fallback);

        if (frame.triples.empty()) {
            outcome.warnings.push_back("frame " + std::to_string(k) +
                                       " has no triples; satisfaction reported as 0");
        }

        write_text_file(run_dir / ("frame_" + std::to_string(k) + ".layers"),
                        layers_to_json(grid).dump(2) + "\n");

        json jtriples = json::array();
        for (size_t t = 0; t < placement.triples.size(); ++t) {
            const TripleReport& rec = placement.triples[t];
            json jt;
            jt["subject"] = rec.triple.subject;
            jt["relation_raw"] = rec.triple.relation;
            jt["object"] = rec.triple.object;
            jt["relation_canonical"] =
                rec.canonical ? std::string(relation_name(*rec.canonical)) : "";
            jt["swapped"] = rec.swapped;
            jt["action"] = std::string(triple_action_name(rec.action));
            jt["satisfied_before"] = rec.satisfied_before;
            jt["satisfied_after"] = rec.satisfied_after;
            jt["satisfied_final"] = static_cast<bool>(final_sat[t]);
            if (!rec.note.empty()) jt["note"] = rec.note;
            jtriples.push_back(std::move(jt));

            NormalizedRelation norm = normalize_relation(rec.triple.relation, table, fallback);
            review.push_back({{"frame", frame.name},
                              {"subject", rec.triple.subject},
                              {"relation_raw", rec.triple.relation},
                              {"canonical", std::string(relation_name(norm.canonical))},
                              {"swapped", norm.swap_args},
                              {"object", rec.triple.object},
                              {"source", norm.source}});
        }

        int satisfied = 0;
        for (bool b : final_sat) satisfied += b;
        pooled_total += static_cast<int>(final_sat.size());
        pooled_satisfied += satisfied;

        json jframe;
        jframe["name"] = frame.name;
        jframe["group_id"] = scene_plan.group_id;
        jframe["base_terrain"] = scene_plan.base_terrain;
        jframe["base_defaulted"] = scene_plan.defaulted;
        jframe["patch_labels"] = scene_plan.patch_labels;
        jframe["mask_seed"] = mask.seed;
        jframe["triples_total"] = static_cast<int>(final_sat.size());
        jframe["triples_satisfied"] = satisfied;
        jframe["satisfaction"] = rate;
        jframe["triples"] = std::move(jtriples);
        frames.push_back(std::move(jframe));
    }

    report["frames"] = std::move(frames);
    report["warnings"] = outcome.warnings;
    report["predicates_total"] = pooled_total;
    report["predicates_satisfied"] = pooled_satisfied;
    report["satisfaction_story"] =
        pooled_total == 0 ? 0.0 : static_cast<double>(pooled_satisfied) / pooled_total;
    dump_json(report, run_dir / "layout_report.json");
    dump_json(review, run_dir / "report.relations.json");
    return outcome;
}

StageOutcome run_kg(const PipelineConfig& cfg, const fs::path& run_dir) {
    StageOutcome outcome;
    StoryBundle bundle = load_run_story(run_dir);
    auto matches = load_matches(run_dir);

    auto gateway_ptr = std::make_shared<LlmGateway>(gateway_config(cfg));
    RelationMapTable table = relation_table(cfg);
    RelationFallback fallback = relation_fallback(gateway_ptr);

    std::vector<SceneKG> kgs;
    for (size_t i = 0; i < bundle.frames.size(); ++i) {
        SceneFrame frame = classified_frame(bundle.frames[i], matches);
        SceneKG kg = build_scene_kg(frame, top1_map(frame, matches), table, fallback);
        write_text_file(run_dir / ("frame_" + std::to_string(i + 1) + ".kg"),
                        scene_kg_to_json(kg).dump(2) + "\n");
        kgs.push_back(std::move(kg));
    }
    MergedKG merged = merge_kgs(kgs);
    dump_json(merged_kg_to_json(merged), run_dir / "merged.kg");
    write_text_file(run_dir / "merged.dot", merged_kg_to_dot(merged));
    return outcome;
}

StageOutcome run_render(const PipelineConfig& cfg, const fs::path& run_dir) {
    StageOutcome outcome;

    SpriteTable sprites = SpriteTable::load_directory(cfg.sprites_dir);
    if (!cfg.tileset_path.empty() && fs::exists(cfg.tileset_path)) {
        // Tile records may point at sprite files relative to the tileset.
        for (const TileRecord& tile : load_tileset_jsonl(cfg.tileset_path)) {
            if (tile.sprite_path.empty() || sprites.find(tile.id)) continue;
            fs::path path = cfg.tileset_path.parent_path() / tile.sprite_path;
            if (fs::exists(path)) sprites.insert(tile.id, read_png(path));
        }
    }

    std::vector<fs::path> layer_files = frame_layer_files(run_dir);
    if (layer_files.empty()) {
        fail("MissingArtifacts", "no frame_<k>.layers files in " + run_dir.string());
    }
    std::set<std::string> missing;
    for (size_t i = 0; i < layer_files.size(); ++i) {
        SceneGrid grid = import_layer_bundle(layer_files[i]);
        for (const PlacedObject& obj : grid.objects()) {
            if (!obj.tile_id.empty() && !sprites.find(obj.tile_id)) missing.insert(obj.tile_id);
        }
        export_layer_bundle(grid, sprites, cfg.render, run_dir, static_cast<int>(i) + 1);
    }
    for (const std::string& id : missing) {
        outcome.warnings.push_back("no sprite for tile " + id + "; placeholder rendered");
    }
    return outcome;
}

StageOutcome run_evaluate(const std::vector<fs::path>& run_dirs, const fs::path& report_dir) {
    StageOutcome outcome;
    if (run_dirs.empty()) fail("MissingArtifacts", "no run directories to evaluate");

    std::vector<StoryMetrics> stories;
    for (const fs::path& run_dir : run_dirs) {
        StoryBundle bundle = load_run_story(run_dir);
        auto matches = load_matches(run_dir);
        json layout = require_artifact(run_dir, "layout_report.json");
        if (layout.at("frames").size() != bundle.frames.size()) {
            fail("MissingArtifacts", run_dir.string() + ": layout report is stale");
        }

        std::vector<FrameEvaluation> frames;
        for (size_t i = 0; i < bundle.frames.size(); ++i) {
            FrameEvaluation fe;
            fe.frame_name = bundle.frames[i].name;
            for (const NarrativeObject& obj : bundle.frames[i].objects) {
                auto it = matches.find(obj.name);
                if (it == matches.end() || it->second.top.empty()) continue;
                ObjectMatchEval eval;
                eval.entity = obj.name;
                eval.object_affordance = it->second.classification.affordance;
                eval.tile_id = it->second.top.front().tile_id;
                eval.tile_affordance = it->second.top_tile_affordance;
                eval.cosine = it->second.top.front().cosine;
                fe.matched_objects.push_back(std::move(eval));
            }
            const json& jframe = layout.at("frames").at(i);
            fe.triples_total = jframe.at("triples_total").get<int>();
            fe.triples_satisfied = jframe.at("triples_satisfied").get<int>();
            frames.push_back(std::move(fe));
        }
        stories.push_back(score_story(bundle.title, frames));
    }

    std::sort(stories.begin(), stories.end(),
              [](const StoryMetrics& a, const StoryMetrics& b) { return a.story_id < b.story_id; });
    AggregateMetrics overall = aggregate(stories);
    fs::create_directories(report_dir);
    emit_report(stories, overall, ReportFormat::Markdown, report_dir / "report.md");
    emit_report(stories, overall, ReportFormat::Csv, report_dir / "report.csv");
    return outcome;
}

GenerateResult run_generate(const PipelineConfig& cfg) {
    GenerateResult result;
    result.run_dir = prepare_story(cfg);

    std::vector<StageOutcome> outcomes;
    outcomes.push_back(run_match(cfg, result.run_dir));
    outcomes.push_back(run_layout(cfg, result.run_dir));
    outcomes.push_back(run_kg(cfg, result.run_dir));
    outcomes.push_back(run_render(cfg, result.run_dir));
    outcomes.push_back(run_evaluate({result.run_dir}, result.run_dir));

    for (const StageOutcome& o : outcomes) {
        result.warning_count += static_cast<int>(o.warnings.size());
    }
    return result;
}

}  // namespace scenegen
