// scenegen: narrative text -> layered 2D tile scenes, plus the metrics report.
//
// Subcommands mirror the pipeline stages so each step can be run and inspected
// separately; `generate` chains them over the same on-disk artifacts.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/pipeline.hpp"
#include "scenegen/scene_kg.hpp"
#include "scenegen/util.hpp"

namespace {

using scenegen::PipelineConfig;

struct CommonFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key = value configuration file");

    auto capture = [&flags](const std::string& key) {
        return [&flags, key](const std::string& value) {
            flags.overrides.emplace_back(key, value);
            return true;
        };
    };
    cmd->add_option_function<std::string>("--seed", capture("seed"), "master RNG seed");
    cmd->add_option_function<std::string>("--story", capture("story"), "story document to parse");
    cmd->add_option_function<std::string>("--prompt", capture("prompt"),
                                          "theme for LLM story generation");
    cmd->add_option_function<std::string>("--tileset", capture("tileset"),
                                          "tileset JSONL file");
    cmd->add_option_function<std::string>("--embeddings", capture("tileset.embeddings"),
                                          "embedding sidecar manifest");
    cmd->add_option_function<std::string>("--sprites", capture("sprites"),
                                          "directory of <tile_id>.png sprites");
    cmd->add_option_function<std::string>("--aliases", capture("aliases"),
                                          "entity alias map (JSON)");
    cmd->add_option_function<std::string>("--relation-table", capture("relation_table"),
                                          "extra relation mappings (JSON)");
    cmd->add_option_function<std::string>("--llm-mode", capture("llm.mode"),
                                          "live, replay or fallback");
    cmd->add_option_function<std::string>("--cassette", capture("cassette"),
                                          "replay cassette file");
    cmd->add_option_function<std::string>("--out", capture("out"), "output directory");
    cmd->add_option_function<std::string>("--lambda", capture("match.lambda"),
                                          "affordance boost");
    cmd->add_option_function<std::string>("--top-k", capture("match.top_k"),
                                          "matches kept per object");
    cmd->add_option_function<std::string>("--grid", capture("grid"),
                                          "terrain grid size, e.g. 20x20");
    cmd->add_option_function<std::string>("--tile-px", capture("render.tile_px"),
                                          "tile size in pixels");
    cmd->add_flag_function("--permissive",
                           [&flags](int64_t) { flags.overrides.emplace_back("permissive", "true"); },
                           "auto-create objects missing from frame object lists");
}

PipelineConfig build_config(const CommonFlags& flags) {
    PipelineConfig cfg;
    if (!flags.config_path.empty()) cfg = scenegen::load_config_file(flags.config_path);
    for (const auto& [key, value] : flags.overrides) {
        if (key == "grid") {
            size_t x = value.find('x');
            if (x == std::string::npos) {
                scenegen::fail("InvalidArgument", "--grid expects WxH, got " + value);
            }
            scenegen::set_config_value(cfg, "terrain.width", value.substr(0, x));
            scenegen::set_config_value(cfg, "terrain.height", value.substr(x + 1));
            continue;
        }
        if (!scenegen::set_config_value(cfg, key, value)) {
            scenegen::fail("InvalidArgument", "unknown config key " + key);
        }
    }
    return cfg;
}

int finish(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    return warnings.empty() ? 0 : 2;
}

std::filesystem::path require_run_dir(const std::string& run) {
    if (run.empty()) scenegen::fail("InvalidArgument", "missing --run directory");
    return run;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"narrative-to-scene generation pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string run_dir_arg;
    std::vector<std::string> eval_dirs;
    std::string eval_batch;
    std::string report_dir;
    std::string timeline_entity;

    CLI::App* generate = app.add_subcommand("generate", "run the full pipeline");
    add_common_flags(generate, flags);

    CLI::App* match = app.add_subcommand("match", "classify objects and retrieve tiles");
    add_common_flags(match, flags);
    match->add_option("--run", run_dir_arg, "run directory (created by generate/match)");

    CLI::App* layout = app.add_subcommand("layout", "terrain + placement from match artifacts");
    add_common_flags(layout, flags);
    layout->add_option("--run", run_dir_arg, "run directory")->required();

    CLI::App* kg = app.add_subcommand("kg", "build scene and merged knowledge graphs");
    add_common_flags(kg, flags);
    kg->add_option("--run", run_dir_arg, "run directory")->required();
    kg->add_option("--timeline", timeline_entity, "print the frames an entity appears in");

    CLI::App* render = app.add_subcommand("render", "render PNGs from exported layers");
    add_common_flags(render, flags);
    render->add_option("--run", run_dir_arg, "run directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "score run directories into a report");
    add_common_flags(evaluate, flags);
    evaluate->add_option("runs", eval_dirs, "run directories");
    evaluate->add_option("--batch", eval_batch, "directory whose subdirectories are runs");
    evaluate->add_option("--report-dir", report_dir, "where report.md/report.csv go");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        PipelineConfig cfg = build_config(flags);

        if (generate->parsed()) {
            scenegen::GenerateResult result = scenegen::run_generate(cfg);
            std::cout << "run: " << result.run_dir.string() << "\n";
            return result.warning_count == 0 ? 0 : 2;
        }
        if (match->parsed()) {
            std::filesystem::path run = run_dir_arg.empty()
                                            ? scenegen::prepare_story(cfg)
                                            : std::filesystem::path(run_dir_arg);
            auto outcome = scenegen::run_match(cfg, run);
            std::cout << "run: " << run.string() << "\n";
            return finish(outcome.warnings);
        }
        if (layout->parsed()) {
            return finish(scenegen::run_layout(cfg, require_run_dir(run_dir_arg)).warnings);
        }
        if (kg->parsed()) {
            auto run = require_run_dir(run_dir_arg);
            auto outcome = scenegen::run_kg(cfg, run);
            if (!timeline_entity.empty()) {
                auto merged = scenegen::merged_kg_from_json(
                    nlohmann::json::parse(scenegen::read_text_file(run / "merged.kg")));
                for (const auto& entry :
                     scenegen::query_entity_timeline(merged, timeline_entity)) {
                    std::cout << "frame " << entry.frame_index << " (" << entry.frame_name
                              << "): " << entry.incident.size() << " incident edges\n";
                }
            }
            return finish(outcome.warnings);
        }
        if (render->parsed()) {
            return finish(scenegen::run_render(cfg, require_run_dir(run_dir_arg)).warnings);
        }
        if (evaluate->parsed()) {
            std::vector<std::filesystem::path> runs(eval_dirs.begin(), eval_dirs.end());
            if (!eval_batch.empty()) {
                std::vector<std::filesystem::path> found;
                if (std::filesystem::is_directory(eval_batch)) {
                    for (const auto& entry : std::filesystem::directory_iterator(eval_batch)) {
                        if (entry.is_directory() &&
                            std::filesystem::exists(entry.path() / "matches.json")) {
                            found.push_back(entry.path());
                        }
                    }
                }
                std::sort(found.begin(), found.end());
                runs.insert(runs.end(), found.begin(), found.end());
            }
            std::filesystem::path report =
                !report_dir.empty() ? std::filesystem::path(report_dir)
                : runs.size() == 1  ? runs.front()
                                    : std::filesystem::path(eval_batch.empty() ? "." : eval_batch);
            return finish(scenegen::run_evaluate(runs, report).warnings);
        }
    } catch (const scenegen::SceneError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
