#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenegen/evaluator.hpp"
#include "scenegen/gateway.hpp"
#include "scenegen/render.hpp"
#include "scenegen/terrain.hpp"

namespace scenegen {

// Everything the CLI can configure. Flags override file values; all randomness
// flows from `seed` through labeled substreams.
struct PipelineConfig {
    uint64_t seed = 0;
    bool seed_set = false;

    std::filesystem::path story_path;  // parse this story document, or ...
    std::string prompt;                // ... generate one from this theme

    std::filesystem::path tileset_path;
    std::filesystem::path embedding_manifest;  // optional sidecar
    std::filesystem::path sprites_dir;
    std::filesystem::path aliases_path;
    std::filesystem::path relation_table_path;
    std::filesystem::path cassette_path;
    std::filesystem::path out_dir;

    GatewayMode llm_mode = GatewayMode::Fallback;
    std::string llm_endpoint;
    std::string llm_model = "gpt-4o";
    std::string llm_api_key_env = "SCENEGEN_API_KEY";

    CAParams terrain;
    double patch_fraction = 0.15;
    std::string default_base = "grass";

    double lambda = 0.1;  // affordance boost
    int top_k = 5;
    int embed_dim = 384;

    RenderConfig render;
    std::string near_default = "at_left_of";
    bool permissive = false;
};

// Simple declarative key=value file ('#' comments). Keys match the CLI flags:
// seed, tileset, sprites, aliases, relation_table, cassette, out, llm.mode,
// llm.endpoint, llm.model, llm.api_key_env, terrain.width, terrain.height,
// terrain.p_init, terrain.iterations, terrain.birth, terrain.patch_fraction,
// terrain.default_base, match.lambda, match.top_k, match.dimension,
// render.tile_px, render.object_scale, relations.near_default.
PipelineConfig load_config_file(const std::filesystem::path& path);
bool set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

struct StageOutcome {
    std::vector<std::string> warnings;
};

// Parses (or generates + extracts) the story, applies alias normalization and
// writes <out>/<story-slug>/story.json. Returns the run directory.
std::filesystem::path prepare_story(const PipelineConfig& cfg);

// story.json -> matches.json (classification + top-k retrieval per entity).
StageOutcome run_match(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

// story.json + matches.json -> frame_<k>.layers, layout_report.json,
// report.relations.json (terrain plan, CA masks, placement, refinement).
StageOutcome run_layout(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

// story.json + matches.json -> frame_<k>.kg, merged.kg, merged.dot.
StageOutcome run_kg(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

// frame_<k>.layers -> frame_<k>.png (+ .png.meta).
StageOutcome run_render(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

// Scores one or more run directories and writes report.md / report.csv into
// report_dir.
StageOutcome run_evaluate(const std::vector<std::filesystem::path>& run_dirs,
                          const std::filesystem::path& report_dir);

struct GenerateResult {
    std::filesystem::path run_dir;
    int warning_count = 0;
};

// The fused pipeline: prepare, match, layout, kg, render, evaluate — each
// stage reading the previous stage's on-disk artifacts, so stage-wise runs
// produce byte-identical output.
GenerateResult run_generate(const PipelineConfig& cfg);

}  // namespace scenegen
