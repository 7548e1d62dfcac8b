#include "scenegen/terrain.hpp"

#include <algorithm>
#include <queue>

#include "scenegen/errors.hpp"
#include "scenegen/rng.hpp"

namespace scenegen {

namespace {
constexpr int kDx4[] = {0, 1, 0, -1};
constexpr int kDy4[] = {-1, 0, 1, 0};
}

int BaseMask::walkable_count() const {
    int n = 0;
    for (uint8_t v : walkable) n += v != 0;
    return n;
}

std::vector<Cell> BaseMask::walkable_cells() const {
    std::vector<Cell> out;
    out.reserve(walkable.size());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(x, y)) out.push_back(Cell{x, y});
        }
    }
    return out;
}

double BaseMask::walkable_fraction() const {
    return static_cast<double>(walkable_count()) /
           (static_cast<double>(width) * height);
}

void BaseMask::validate() const {
    int total = walkable_count();
    if (total == 0) fail("GenerationFailed", "base mask has no walkable cells");

    // Flood fill from the first walkable cell; 4-connectivity.
    std::vector<uint8_t> seen(walkable.size(), 0);
    std::queue<Cell> q;
    for (int y = 0; y < height && q.empty(); ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(x, y)) {
                q.push(Cell{x, y});
                seen[static_cast<size_t>(y) * width + x] = 1;
                break;
            }
        }
    }
    int reached = 0;
    while (!q.empty()) {
        Cell c = q.front();
        q.pop();
        ++reached;
        for (int d = 0; d < 4; ++d) {
            int nx = c.x + kDx4[d], ny = c.y + kDy4[d];
            if (!in_bounds(nx, ny) || !at(nx, ny)) continue;
            size_t idx = static_cast<size_t>(ny) * width + nx;
            if (!seen[idx]) {
                seen[idx] = 1;
                q.push(Cell{nx, ny});
            }
        }
    }
    if (reached != total) {
        fail("GenerationFailed", "walkable cells are not a single 4-connected component");
    }
    double frac = walkable_fraction();
    if (frac < 0.35 || frac > 0.90) {
        fail("GenerationFailed", "walkable fraction " + std::to_string(frac) + " out of range");
    }
}

namespace {

std::string dominant_terrain_of_frame(
    const SceneFrame& frame,
    const std::map<std::string, ClassificationResult>& classifications) {
    std::map<std::string, int> votes;
    for (const NarrativeObject& obj : frame.objects) {
        auto it = classifications.find(obj.name);
        if (it == classifications.end()) {
            fail("InvalidArgument", "object \"" + obj.name + "\" has no classification");
        }
        if (it->second.affordance == Affordance::Terrain &&
            !it->second.suggested_terrain.empty()) {
            votes[it->second.suggested_terrain] += 1;
        }
    }
    std::string best;
    int best_count = 0;
    for (const auto& [label, count] : votes) {
        // std::map iterates keys ascending, so ties keep the lexicographically
        // smallest label.
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

TerrainPlan infer_terrain_plan(const StoryBundle& bundle,
                               const std::map<std::string, ClassificationResult>& classifications,
                               const std::vector<std::string>& terrain_keywords,
                               const std::string& default_base) {
    TerrainPlan plan;
    const size_t frame_count = bundle.frames.size();
    plan.scenes.resize(frame_count);

    // Group frames. A frame with no terrain evidence inherits continuity and
    // never splits the group on its own.
    std::vector<std::string> dominant(frame_count);
    for (size_t i = 0; i < frame_count; ++i) {
        dominant[i] = dominant_terrain_of_frame(bundle.frames[i], classifications);
    }

    std::vector<std::vector<size_t>> groups;
    std::string group_dominant;
    for (size_t i = 0; i < frame_count; ++i) {
        bool start_new = groups.empty() || bundle.frames[i].scene_break ||
                         (!dominant[i].empty() && !group_dominant.empty() &&
                          dominant[i] != group_dominant);
        if (start_new) {
            groups.emplace_back();
            group_dominant.clear();
        }
        groups.back().push_back(i);
        if (group_dominant.empty()) group_dominant = dominant[i];
    }

    for (size_t g = 0; g < groups.size(); ++g) {
        std::map<std::string, int> votes;
        std::vector<std::string> patches;
        for (size_t i : groups[g]) {
            for (const NarrativeObject& obj : bundle.frames[i].objects) {
                const ClassificationResult& cls = classifications.at(obj.name);
                if (cls.affordance == Affordance::Terrain && !cls.suggested_terrain.empty()) {
                    votes[cls.suggested_terrain] += 1;
                }
                if (name_has_terrain_keyword(obj.name, terrain_keywords)) {
                    std::string label =
                        cls.suggested_terrain.empty() ? obj.name : cls.suggested_terrain;
                    if (std::find(patches.begin(), patches.end(), label) == patches.end()) {
                        patches.push_back(label);
                    }
                }
            }
        }

        std::string base;
        int best_count = 0;
        for (const auto& [label, count] : votes) {
            if (count > best_count) {
                base = label;
                best_count = count;
            }
        }
        bool defaulted = false;
        if (base.empty()) {
            base = default_base;
            defaulted = true;
            plan.warnings.push_back("NoTerrainEvidence: group " + std::to_string(g) +
                                    " has no terrain votes; using default base \"" +
                                    default_base + "\"");
        }

        for (size_t i : groups[g]) {
            plan.scenes[i] = ScenePlan{static_cast<int>(g), base, patches, defaulted};
        }
    }
    return plan;
}

namespace {

// One synchronous smoothing pass. The count covers the full 3x3 Moore block
// including the cell itself (the classic cave-CA rule); out-of-bounds
// neighbors count as blocked.
void smooth(BaseMask& mask, int birth_threshold) {
    std::vector<uint8_t> next(mask.walkable.size(), 0);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            int count = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (mask.in_bounds(nx, ny) && mask.at(nx, ny)) ++count;
                }
            }
            next[static_cast<size_t>(y) * mask.width + x] = count >= birth_threshold ? 1 : 0;
        }
    }
    mask.walkable = std::move(next);
}

// Blocks everything outside the largest 4-connected walkable component.
void keep_largest_component(BaseMask& mask) {
    std::vector<int> label(mask.walkable.size(), -1);
    int best_label = -1, best_size = 0, next_label = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            size_t idx = static_cast<size_t>(y) * mask.width + x;
            if (!mask.walkable[idx] || label[idx] != -1) continue;
            int size = 0;
            std::queue<Cell> q;
            q.push(Cell{x, y});
            label[idx] = next_label;
            while (!q.empty()) {
                Cell c = q.front();
                q.pop();
                ++size;
                for (int d = 0; d < 4; ++d) {
                    int nx = c.x + kDx4[d], ny = c.y + kDy4[d];
                    if (!mask.in_bounds(nx, ny)) continue;
                    size_t nidx = static_cast<size_t>(ny) * mask.width + nx;
                    if (mask.walkable[nidx] && label[nidx] == -1) {
                        label[nidx] = next_label;
                        q.push(Cell{nx, ny});
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_label = next_label;
            }
            ++next_label;
        }
    }
    for (size_t i = 0; i < mask.walkable.size(); ++i) {
        mask.walkable[i] = (label[i] == best_label) ? 1 : 0;
    }
}

}  // namespace

BaseMask generate_base_mask(const CAParams& params, uint64_t seed) {
    if (params.width < 8 || params.height < 8) {
        fail("InvalidArgument", "CA grid must be at least 8x8");
    }
    if (params.initial_walkable_prob <= 0.0 || params.initial_walkable_prob >= 1.0) {
        // p = 1.0 can never reach a fraction <= 0.9, and p = 0 never connects;
        // both exhaust retries.
    }
    for (int attempt = 0; attempt < std::max(1, params.max_retries); ++attempt) {
        uint64_t attempt_seed = seed + static_cast<uint64_t>(attempt);
        BaseMask mask;
        mask.width = params.width;
        mask.height = params.height;
        mask.seed = attempt_seed;
        mask.params = params;
        mask.walkable.assign(static_cast<size_t>(params.width) * params.height, 0);

        Rng rng(derive_seed(attempt_seed, "ca-fill"));
        for (int y = 0; y < params.height; ++y) {
            for (int x = 0; x < params.width; ++x) {
                mask.set(x, y, rng.chance(params.initial_walkable_prob));
            }
        }
        for (int i = 0; i < params.iterations; ++i) smooth(mask, params.birth_threshold);
        if (mask.walkable_count() == 0) continue;
        keep_largest_component(mask);

        double frac = mask.walkable_fraction();
        if (frac < 0.35 || frac > 0.90) continue;
        mask.validate();
        return mask;
    }
    fail("GenerationFailed", "no acceptable base mask after " +
                                 std::to_string(params.max_retries) + " attempts (seed " +
                                 std::to_string(seed) + ")");
}

PatchRegion insert_patch(const BaseMask& mask, const std::string& label, double target_fraction,
                         uint64_t seed) {
    if (target_fraction <= 0.0 || target_fraction >= 1.0) {
        fail("InvalidArgument", "patch target fraction must be in (0, 1)");
    }
    std::vector<Cell> cells = mask.walkable_cells();
    if (cells.empty()) fail("InvalidArgument", "cannot grow a patch on an empty mask");

    const double target = target_fraction * static_cast<double>(cells.size());

    Rng rng(derive_seed(seed, "patch-grow"));
    Cell start = cells[rng.below(cells.size())];

    std::vector<uint8_t> visited(mask.walkable.size(), 0);
    std::queue<Cell> frontier;
    frontier.push(start);
    visited[static_cast<size_t>(start.y) * mask.width + start.x] = 1;

    PatchRegion region;
    region.label = label;
    while (!frontier.empty() && static_cast<double>(region.cells.size()) < target) {
        Cell c = frontier.front();
        frontier.pop();
        region.cells.push_back(c);
        for (int d = 0; d < 4; ++d) {
            int nx = c.x + kDx4[d], ny = c.y + kDy4[d];
            if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) continue;
            size_t idx = static_cast<size_t>(ny) * mask.width + nx;
            if (!visited[idx]) {
                visited[idx] = 1;
                frontier.push(Cell{nx, ny});
            }
        }
    }
    region.truncated = static_cast<double>(region.cells.size()) < target;
    std::sort(region.cells.begin(), region.cells.end(), [](const Cell& a, const Cell& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return region;
}

}  // namespace scenegen
