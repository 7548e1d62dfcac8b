#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenegen/placement.hpp"
#include "scenegen/png_codec.hpp"

namespace scenegen {

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;

    bool operator==(const Rgb&) const = default;
};

struct RenderConfig {
    int tile_px = 32;
    double object_scale = 1.5;
    Rgb base_walkable{118, 172, 98};
    Rgb base_blocked{46, 50, 60};
    Rgb patch_tint{182, 156, 92};
    // Placeholder colors for unmatched sprites, keyed by entity hash.
    std::vector<Rgb> placeholder_palette = {
        {204, 84, 84},  {84, 128, 204}, {220, 180, 70}, {150, 90, 190},
        {80, 190, 170}, {230, 130, 60}, {120, 120, 128}, {190, 100, 150},
    };

    bool operator==(const RenderConfig&) const = default;
};

// Read-only sprite lookup; ids without a sprite fall through to placeholder
// rendering.
class SpriteTable {
public:
    SpriteTable() = default;

    void insert(const std::string& tile_id, Image sprite);
    const Image* find(const std::string& tile_id) const;
    size_t size() const { return sprites_.size(); }

    // Loads every "<tile_id>.png" in the directory; missing directory is fine.
    static SpriteTable load_directory(const std::filesystem::path& dir);

private:
    std::map<std::string, Image> sprites_;
};

// Base mask first, patch cells tinted, then object layers composited
// background to foreground. Sprites are scaled by object_scale, centered on
// their cell, clipped at the canvas edge; unmatched objects render as solid
// palette squares.
Image render_scene(const SceneGrid& grid, const SpriteTable& sprites, const RenderConfig& cfg);

// Machine-readable layer bundle: grid dims, base mask bitrows, patch cell
// lists, per-layer sparse object lists.
nlohmann::json layers_to_json(const SceneGrid& grid);
SceneGrid scene_grid_from_json(const nlohmann::json& doc);

struct ExportPaths {
    std::filesystem::path layers;
    std::filesystem::path png;
    std::filesystem::path meta;
};

// Writes frame_<k>.layers, frame_<k>.png and frame_<k>.png.meta into dir.
ExportPaths export_layer_bundle(const SceneGrid& grid, const SpriteTable& sprites,
                                const RenderConfig& cfg, const std::filesystem::path& dir,
                                int frame_index);

SceneGrid import_layer_bundle(const std::filesystem::path& layers_path);

}  // namespace scenegen
