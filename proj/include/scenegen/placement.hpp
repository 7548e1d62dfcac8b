#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/narrative.hpp"
#include "scenegen/relations.hpp"
#include "scenegen/terrain.hpp"
#include "scenegen/tile_index.hpp"

namespace scenegen {

// Layer order used for OnTopOf stacking: terrain(0) < environment(1) <
// interactive(2) < item(3) < character(4). Terrain objects never occupy an
// object layer.
constexpr int kTerrainLayer = 0;
constexpr int kCharacterLayer = 4;

int layer_for(Affordance a);
std::string_view layer_label(int layer);  // affordance label of the layer

struct PlacedObject {
    int slot = 0;  // 1-based id stored in the layer matrices
    std::string entity;
    std::string tile_id;  // empty when no tile matched
    Affordance affordance = Affordance::EnvironmentalObject;
    int layer = 0;  // current occupancy layer (may exceed the natural layer)
    int x = 0;
    int y = 0;

    bool operator==(const PlacedObject&) const = default;
};

// Layered occupancy model over a base mask: four object-layer matrices of slot
// ids (0 = empty) plus the placed-object table they index into.
class SceneGrid {
public:
    SceneGrid() = default;
    SceneGrid(BaseMask base, std::vector<PatchRegion> patches);

    int width() const { return base_.width; }
    int height() const { return base_.height; }
    bool in_bounds(int x, int y) const { return base_.in_bounds(x, y); }

    const BaseMask& base() const { return base_; }
    const std::vector<PatchRegion>& patches() const { return patches_; }
    const std::vector<PlacedObject>& objects() const { return objects_; }

    int occupant(int layer, int x, int y) const;  // slot id or 0
    const PlacedObject* find_entity(const std::string& entity) const;

    int place(const std::string& entity, const std::string& tile_id, Affordance affordance,
              int layer, int x, int y);
    void move_slot(int slot, int x, int y, int layer);

    std::map<std::string, PlacedPos> object_positions() const;

    // Bijection between nonzero matrix cells and placed objects, per-layer
    // exclusivity, bounds; optionally walkability (holds after initial
    // placement, not necessarily after refinement).
    void validate(bool require_walkable) const;

    bool operator==(const SceneGrid&) const;

private:
    size_t cell_index(int x, int y) const {
        return static_cast<size_t>(y) * base_.width + x;
    }

    BaseMask base_;
    std::vector<PatchRegion> patches_;
    std::array<std::vector<int>, kCharacterLayer + 1> layers_;  // [0] unused
    std::vector<PlacedObject> objects_;
};

enum class TripleAction {
    Placed,          // OnTopOf commit (layer stack)
    Moved,           // directional commit
    SkippedOob,      // offset target out of bounds
    SkippedOverlap,  // target cell occupied in the layer, or stack impossible
    EntityMissing,   // subject or object has no position
};

std::string_view triple_action_name(TripleAction a);

struct TripleReport {
    PredicateTriple triple;
    std::optional<Relation> canonical;
    bool swapped = false;
    TripleAction action = TripleAction::EntityMissing;
    bool satisfied_before = false;  // checked when the triple is processed
    bool satisfied_after = false;   // checked right after processing
    std::string note;
};

struct PlacementReport {
    std::vector<TripleReport> triples;  // one record per frame triple
};

// Uniform random placement of every non-Terrain object onto a distinct
// walkable cell of its affordance layer. Objects must be classified; missing
// match entries yield placeholder (empty) tile ids.
SceneGrid initial_place(const SceneFrame& frame, const std::map<std::string, MatchResult>& matches,
                        const BaseMask& mask, uint64_t seed,
                        std::vector<PatchRegion> patches = {});

// Single-pass symbolic refinement: triples in listed order; each subject is
// offset from the object's current position and the move commits only when the
// target is in bounds, the cell is free in the subject's layer, and the moved
// position satisfies the triple. OnTopOf stacks the subject onto the anchor
// cell in a strictly higher layer (promoted to anchor layer + 1 when needed,
// capped at the character layer).
PlacementReport apply_spatial_relations(SceneGrid& grid, const SceneFrame& frame,
                                        const RelationMapTable& table,
                                        const RelationFallback& fallback = {});

// Fraction of the frame's triples satisfied by the grid's final positions.
// Missing entities count as unsatisfied; a frame with zero triples scores 0.
double satisfaction_rate(const SceneGrid& grid, const SceneFrame& frame,
                         const RelationMapTable& table, const RelationFallback& fallback = {});

// Per-triple final-state satisfaction, in frame triple order.
std::vector<bool> satisfied_triples(const SceneGrid& grid, const SceneFrame& frame,
                                    const RelationMapTable& table,
                                    const RelationFallback& fallback = {});

}  // namespace scenegen
