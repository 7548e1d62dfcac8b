#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scenegen/gateway.hpp"
#include "scenegen/narrative.hpp"
#include "scenegen/relations.hpp"

namespace scenegen {

struct CAParams {
    int width = 20;
    int height = 20;
    double initial_walkable_prob = 0.55;
    int iterations = 4;
    int birth_threshold = 5;  // Moore-neighborhood walkable count required
    int max_retries = 10;

    bool operator==(const CAParams&) const = default;
};

// Binary walkable/blocked grid. Generated masks are kept to their largest
// 4-connected walkable component with walkable fraction in [0.35, 0.90].
struct BaseMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> walkable;  // row-major, 1 = walkable
    uint64_t seed = 0;
    CAParams params;

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
    bool at(int x, int y) const {
        return walkable[static_cast<size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool value) {
        walkable[static_cast<size_t>(y) * width + x] = value ? 1 : 0;
    }
    int walkable_count() const;
    std::vector<Cell> walkable_cells() const;  // row-major order
    double walkable_fraction() const;

    // Throws unless walkable cells form exactly one 4-connected component and
    // the fraction is in range.
    void validate() const;

    bool operator==(const BaseMask&) const = default;
};

struct PatchRegion {
    std::string label;
    std::vector<Cell> cells;  // sorted by (y, x); always within the base mask
    bool truncated = false;   // frontier exhausted before the size target
};

struct ScenePlan {
    int group_id = 0;
    std::string base_terrain;
    std::vector<std::string> patch_labels;
    bool defaulted = false;  // no terrain evidence, base fell back to the default
};

struct TerrainPlan {
    std::vector<ScenePlan> scenes;  // one per frame, in frame order
    std::vector<std::string> warnings;
};

// Algorithm: group consecutive frames (split on scene_break or a dominant
// terrain mismatch; frames without terrain evidence never split a group), vote
// the group base terrain from Terrain-affordance objects (ties break
// lexicographically), and collect terrain-keyword objects as patches that
// propagate across the whole group.
TerrainPlan infer_terrain_plan(const StoryBundle& bundle,
                               const std::map<std::string, ClassificationResult>& classifications,
                               const std::vector<std::string>& terrain_keywords,
                               const std::string& default_base = "grass");

// CA synthesis: random fill, `iterations` synchronous smoothing passes (cell
// walkable iff >= birth_threshold cells of its 3x3 Moore block are walkable;
// out-of-bounds neighbors count as blocked), largest component kept, retried
// with seed+1 while the walkable fraction is out of range.
BaseMask generate_base_mask(const CAParams& params, uint64_t seed);

// BFS blob grown from a random walkable cell until it reaches
// target_fraction * walkable_count cells or the frontier is exhausted.
PatchRegion insert_patch(const BaseMask& mask, const std::string& label, double target_fraction,
                         uint64_t seed);

}  // namespace scenegen
