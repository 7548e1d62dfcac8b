#include "scenegen/render.hpp"

#include <algorithm>
#include <cmath>

#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;

void SpriteTable::insert(const std::string& tile_id, Image sprite) {
    sprites_[tile_id] = std::move(sprite);
}

const Image* SpriteTable::find(const std::string& tile_id) const {
    auto it = sprites_.find(tile_id);
    return it == sprites_.end() ? nullptr : &it->second;
}

SpriteTable SpriteTable::load_directory(const std::filesystem::path& dir) {
    SpriteTable table;
    if (dir.empty() || !std::filesystem::is_directory(dir)) return table;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        table.insert(path.stem().string(), read_png(path));
    }
    return table;
}

namespace {

void fill_rect(Image& canvas, int x0, int y0, int w, int h, Rgb color) {
    int x1 = std::min(canvas.width, x0 + w);
    int y1 = std::min(canvas.height, y0 + h);
    for (int y = std::max(0, y0); y < y1; ++y) {
        for (int x = std::max(0, x0); x < x1; ++x) {
            uint8_t* px = canvas.pixel(x, y);
            px[0] = color.r;
            px[1] = color.g;
            px[2] = color.b;
            px[3] = 255;
        }
    }
}

// 40% tint over whatever is already on the canvas.
void tint_rect(Image& canvas, int x0, int y0, int w, int h, Rgb color) {
    constexpr int alpha = 102;  // 0.4 * 255
    int x1 = std::min(canvas.width, x0 + w);
    int y1 = std::min(canvas.height, y0 + h);
    for (int y = std::max(0, y0); y < y1; ++y) {
        for (int x = std::max(0, x0); x < x1; ++x) {
            uint8_t* px = canvas.pixel(x, y);
            px[0] = static_cast<uint8_t>((color.r * alpha + px[0] * (255 - alpha) + 127) / 255);
            px[1] = static_cast<uint8_t>((color.g * alpha + px[1] * (255 - alpha) + 127) / 255);
            px[2] = static_cast<uint8_t>((color.b * alpha + px[2] * (255 - alpha) + 127) / 255);
        }
    }
}

// Nearest-neighbor scale into a dst_size square whose top-left is (x0, y0);
// source-over alpha blend, integer arithmetic throughout.
void blit_scaled(Image& canvas, const Image& sprite, int x0, int y0, int dst_size) {
    for (int dy = 0; dy < dst_size; ++dy) {
        int cy = y0 + dy;
        if (cy < 0 || cy >= canvas.height) continue;
        int sy = static_cast<int>((static_cast<int64_t>(2 * dy + 1) * sprite.height) /
                                  (2 * dst_size));
        for (int dx = 0; dx < dst_size; ++dx) {
            int cx = x0 + dx;
            if (cx < 0 || cx >= canvas.width) continue;
            int sx = static_cast<int>((static_cast<int64_t>(2 * dx + 1) * sprite.width) /
                                      (2 * dst_size));
            const uint8_t* src = sprite.pixel(sx, sy);
            uint8_t* dst = canvas.pixel(cx, cy);
            int a = src[3];
            if (a == 0) continue;
            dst[0] = static_cast<uint8_t>((src[0] * a + dst[0] * (255 - a) + 127) / 255);
            dst[1] = static_cast<uint8_t>((src[1] * a + dst[1] * (255 - a) + 127) / 255);
            dst[2] = static_cast<uint8_t>((src[2] * a + dst[2] * (255 - a) + 127) / 255);
            dst[3] = 255;
        }
    }
}

}  // namespace

Image render_scene(const SceneGrid& grid, const SpriteTable& sprites, const RenderConfig& cfg) {
    if (cfg.tile_px < 8) fail("InvalidArgument", "tile_px must be at least 8");
    if (cfg.object_scale <= 0.0) fail("InvalidArgument", "object_scale must be positive");

    const int tile = cfg.tile_px;
    Image canvas = Image::solid(grid.width() * tile, grid.height() * tile, 255, 255, 255);

    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            fill_rect(canvas, x * tile, y * tile, tile, tile,
                      grid.base().at(x, y) ? cfg.base_walkable : cfg.base_blocked);
        }
    }
    for (const PatchRegion& patch : grid.patches()) {
        for (const Cell& c : patch.cells) {
            tint_rect(canvas, c.x * tile, c.y * tile, tile, tile, cfg.patch_tint);
        }
    }

    const int sprite_size = static_cast<int>(std::llround(tile * cfg.object_scale));
    for (int layer = 1; layer <= kCharacterLayer; ++layer) {
        // Layers composite background to foreground; within a layer, slot order.
        std::vector<const PlacedObject*> members;
        for (const PlacedObject& obj : grid.objects()) {
            if (obj.layer == layer) members.push_back(&obj);
        }
        std::sort(members.begin(), members.end(),
                  [](const PlacedObject* a, const PlacedObject* b) { return a->slot < b->slot; });
        for (const PlacedObject* obj : members) {
            int center_x = obj->x * tile + tile / 2;
            int center_y = obj->y * tile + tile / 2;
            int x0 = center_x - sprite_size / 2;
            int y0 = center_y - sprite_size / 2;
            const Image* sprite = obj->tile_id.empty() ? nullptr : sprites.find(obj->tile_id);
            if (sprite) {
                blit_scaled(canvas, *sprite, x0, y0, sprite_size);
            } else {
                const auto& palette = cfg.placeholder_palette;
                Rgb color = palette[fnv1a64(obj->entity) % palette.size()];
                fill_rect(canvas, x0, y0, sprite_size, sprite_size, color);
            }
        }
    }
    return canvas;
}

nlohmann::json layers_to_json(const SceneGrid& grid) {
    json doc;
    doc["width"] = grid.width();
    doc["height"] = grid.height();

    json rows = json::array();
    for (int y = 0; y < grid.height(); ++y) {
        std::string row(static_cast<size_t>(grid.width()), '0');
        for (int x = 0; x < grid.width(); ++x) {
            if (grid.base().at(x, y)) row[static_cast<size_t>(x)] = '1';
        }
        rows.push_back(row);
    }
    doc["base"] = std::move(rows);

    json patches = json::array();
    for (const PatchRegion& patch : grid.patches()) {
        json cells = json::array();
        for (const Cell& c : patch.cells) cells.push_back(json::array({c.x, c.y}));
        patches.push_back({{"label", patch.label}, {"cells", std::move(cells)}});
    }
    doc["patches"] = std::move(patches);

    json layers = json::object();
    for (int layer = 1; layer <= kCharacterLayer; ++layer) {
        json entries = json::array();
        std::vector<const PlacedObject*> members;
        for (const PlacedObject& obj : grid.objects()) {
            if (obj.layer == layer) members.push_back(&obj);
        }
        std::sort(members.begin(), members.end(),
                  [](const PlacedObject* a, const PlacedObject* b) { return a->slot < b->slot; });
        for (const PlacedObject* obj : members) {
            entries.push_back({{"slot", obj->slot},
                               {"entity", obj->entity},
                               {"tile_id", obj->tile_id},
                               {"affordance", std::string(affordance_label(obj->affordance))},
                               {"x", obj->x},
                               {"y", obj->y}});
        }
        layers[std::string(layer_label(layer))] = std::move(entries);
    }
    doc["layers"] = std::move(layers);
    return doc;
}

SceneGrid scene_grid_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("width") || !doc.contains("height") ||
        !doc.contains("base") || !doc.contains("layers")) {
        fail("MalformedDocument", "layer bundle needs width, height, base, layers");
    }
    BaseMask mask;
    mask.width = doc["width"].get<int>();
    mask.height = doc["height"].get<int>();
    if (mask.width <= 0 || mask.height <= 0) fail("MalformedDocument", "bad layer bundle dims");
    mask.walkable.assign(static_cast<size_t>(mask.width) * mask.height, 0);
    const auto& rows = doc["base"];
    if (static_cast<int>(rows.size()) != mask.height) {
        fail("MalformedDocument", "base row count != height");
    }
    for (int y = 0; y < mask.height; ++y) {
        std::string row = rows[static_cast<size_t>(y)].get<std::string>();
        if (static_cast<int>(row.size()) != mask.width) {
            fail("MalformedDocument", "base row length != width");
        }
        for (int x = 0; x < mask.width; ++x) mask.set(x, y, row[static_cast<size_t>(x)] == '1');
    }

    std::vector<PatchRegion> patches;
    if (doc.contains("patches")) {
        for (const json& jp : doc["patches"]) {
            PatchRegion patch;
            patch.label = jp.at("label").get<std::string>();
            for (const json& jc : jp.at("cells")) {
                patch.cells.push_back(Cell{jc.at(0).get<int>(), jc.at(1).get<int>()});
            }
            patches.push_back(std::move(patch));
        }
    }

    SceneGrid grid(std::move(mask), std::move(patches));

    // Rebuild objects in slot order so ids match the exporting grid.
    struct Pending {
        int slot;
        std::string entity, tile_id;
        Affordance affordance;
        int layer, x, y;
    };
    std::vector<Pending> pending;
    for (int layer = 1; layer <= kCharacterLayer; ++layer) {
        std::string key(layer_label(layer));
        if (!doc["layers"].contains(key)) continue;
        for (const json& je : doc["layers"][key]) {
            auto aff = affordance_from_label(je.at("affordance").get<std::string>());
            if (!aff) fail("MalformedDocument", "layer entry with unknown affordance");
            pending.push_back(Pending{je.at("slot").get<int>(), je.at("entity").get<std::string>(),
                                      je.at("tile_id").get<std::string>(), *aff, layer,
                                      je.at("x").get<int>(), je.at("y").get<int>()});
        }
    }
    std::sort(pending.begin(), pending.end(),
              [](const Pending& a, const Pending& b) { return a.slot < b.slot; });
    for (size_t i = 0; i < pending.size(); ++i) {
        if (pending[i].slot != static_cast<int>(i) + 1) {
            fail("MalformedDocument", "layer bundle slot ids are not contiguous");
        }
        grid.place(pending[i].entity, pending[i].tile_id, pending[i].affordance,
                   pending[i].layer, pending[i].x, pending[i].y);
    }
    grid.validate(false);
    return grid;
}

ExportPaths export_layer_bundle(const SceneGrid& grid, const SpriteTable& sprites,
                                const RenderConfig& cfg, const std::filesystem::path& dir,
                                int frame_index) {
    std::filesystem::create_directories(dir);
    const std::string stem = "frame_" + std::to_string(frame_index);
    ExportPaths paths;
    paths.layers = dir / (stem + ".layers");
    paths.png = dir / (stem + ".png");
    paths.meta = dir / (stem + ".png.meta");

    write_text_file(paths.layers, layers_to_json(grid).dump(2) + "\n");

    Image canvas = render_scene(grid, sprites, cfg);
    write_png(canvas, paths.png, /*opaque_rgb=*/true);

    json meta;
    meta["width_px"] = canvas.width;
    meta["height_px"] = canvas.height;
    meta["tile_px"] = cfg.tile_px;
    meta["placed_objects"] = static_cast<int>(grid.objects().size());
    write_text_file(paths.meta, meta.dump(2) + "\n");
    return paths;
}

SceneGrid import_layer_bundle(const std::filesystem::path& layers_path) {
    json doc;
    try {
        doc = json::parse(read_text_file(layers_path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", layers_path.string() + ": " + e.what());
    }
    return scene_grid_from_json(doc);
}

}  // namespace scenegen
