#include "scenegen/placement.hpp"

#include <algorithm>

#include "scenegen/errors.hpp"
#include "scenegen/rng.hpp"

namespace scenegen {

int layer_for(Affordance a) {
    switch (a) {
        case Affordance::Terrain: return kTerrainLayer;
        case Affordance::EnvironmentalObject: return 1;
        case Affordance::InteractiveObject: return 2;
        case Affordance::ItemCollectible: return 3;
        case Affordance::CharacterCreature: return kCharacterLayer;
    }
    return kTerrainLayer;
}

std::string_view layer_label(int layer) {
    switch (layer) {
        case 1: return affordance_label(Affordance::EnvironmentalObject);
        case 2: return affordance_label(Affordance::InteractiveObject);
        case 3: return affordance_label(Affordance::ItemCollectible);
        case 4: return affordance_label(Affordance::CharacterCreature);
        default: return affordance_label(Affordance::Terrain);
    }
}

std::string_view triple_action_name(TripleAction a) {
    switch (a) {
        case TripleAction::Placed: return "placed";
        case TripleAction::Moved: return "moved";
        case TripleAction::SkippedOob: return "skipped_oob";
        case TripleAction::SkippedOverlap: return "skipped_overlap";
        case TripleAction::EntityMissing: return "entity_missing";
    }
    return "entity_missing";
}

SceneGrid::SceneGrid(BaseMask base, std::vector<PatchRegion> patches)
    : base_(std::move(base)), patches_(std::move(patches)) {
    const size_t cells = static_cast<size_t>(base_.width) * base_.height;
    for (int layer = 1; layer <= kCharacterLayer; ++layer) {
        layers_[static_cast<size_t>(layer)].assign(cells, 0);
    }
    for (const PatchRegion& patch : patches_) {
        for (const Cell& c : patch.cells) {
            if (!base_.in_bounds(c.x, c.y) || !base_.at(c.x, c.y)) {
                fail("InvalidArgument", "patch \"" + patch.label + "\" leaves the walkable mask");
            }
        }
    }
}

int SceneGrid::occupant(int layer, int x, int y) const {
    if (layer < 1 || layer > kCharacterLayer) return 0;
    return layers_[static_cast<size_t>(layer)][cell_index(x, y)];
}

const PlacedObject* SceneGrid::find_entity(const std::string& entity) const {
    for (const PlacedObject& obj : objects_) {
        if (obj.entity == entity) return &obj;
    }
    return nullptr;
}

int SceneGrid::place(const std::string& entity, const std::string& tile_id, Affordance affordance,
                     int layer, int x, int y) {
    if (layer < 1 || layer > kCharacterLayer) fail("InvalidArgument", "bad object layer");
    if (!in_bounds(x, y)) fail("InvalidArgument", "placement out of bounds");
    if (occupant(layer, x, y) != 0) fail("InvalidArgument", "cell already occupied in layer");
    if (find_entity(entity)) fail("InvalidArgument", "entity already placed: " + entity);

    PlacedObject obj;
    obj.slot = static_cast<int>(objects_.size()) + 1;
    obj.entity = entity;
    obj.tile_id = tile_id;
    obj.affordance = affordance;
    obj.layer = layer;
    obj.x = x;
    obj.y = y;
    layers_[static_cast<size_t>(layer)][cell_index(x, y)] = obj.slot;
    objects_.push_back(std::move(obj));
    return static_cast<int>(objects_.size());
}

void SceneGrid::move_slot(int slot, int x, int y, int layer) {
    if (slot < 1 || slot > static_cast<int>(objects_.size())) {
        fail("InvalidArgument", "bad slot id");
    }
    if (layer < 1 || layer > kCharacterLayer) fail("InvalidArgument", "bad object layer");
    if (!in_bounds(x, y)) fail("InvalidArgument", "move out of bounds");
    int existing = occupant(layer, x, y);
    if (existing != 0 && existing != slot) {
        fail("InvalidArgument", "move onto an occupied cell");
    }
    PlacedObject& obj = objects_[static_cast<size_t>(slot) - 1];
    layers_[static_cast<size_t>(obj.layer)][cell_index(obj.x, obj.y)] = 0;
    obj.x = x;
    obj.y = y;
    obj.layer = layer;
    layers_[static_cast<size_t>(layer)][cell_index(x, y)] = slot;
}

std::map<std::string, PlacedPos> SceneGrid::object_positions() const {
    std::map<std::string, PlacedPos> out;
    for (const PlacedObject& obj : objects_) {
        out[obj.entity] = PlacedPos{obj.x, obj.y, obj.layer};
    }
    return out;
}

void SceneGrid::validate(bool require_walkable) const {
    size_t nonzero = 0;
    for (int layer = 1; layer <= kCharacterLayer; ++layer) {
        const std::vector<int>& matrix = layers_[static_cast<size_t>(layer)];
        for (size_t i = 0; i < matrix.size(); ++i) {
            if (matrix[i] == 0) continue;
            ++nonzero;
            int slot = matrix[i];
            if (slot < 1 || slot > static_cast<int>(objects_.size())) {
                fail("InvalidArgument", "matrix references unknown slot");
            }
            const PlacedObject& obj = objects_[static_cast<size_t>(slot) - 1];
            if (obj.layer != layer || cell_index(obj.x, obj.y) != i) {
                fail("InvalidArgument", "matrix cell and object position disagree");
            }
        }
    }
    if (nonzero != objects_.size()) {
        fail("InvalidArgument", "matrix occupancy count != placed object count");
    }
    for (const PlacedObject& obj : objects_) {
        if (!in_bounds(obj.x, obj.y)) fail("InvalidArgument", "object out of bounds");
        if (require_walkable && !base_.at(obj.x, obj.y)) {
            fail("InvalidArgument", "object \"" + obj.entity + "\" on a blocked cell");
        }
    }
}

bool SceneGrid::operator==(const SceneGrid& other) const {
    // Generator provenance (mask seed/params) is not grid state and is not
    // persisted by the layer bundle, so equality ignores it.
    if (base_.width != other.base_.width || base_.height != other.base_.height ||
        base_.walkable != other.base_.walkable) {
        return false;
    }
    if (objects_ != other.objects_ || layers_ != other.layers_) return false;
    if (patches_.size() != other.patches_.size()) return false;
    for (size_t i = 0; i < patches_.size(); ++i) {
        if (patches_[i].label != other.patches_[i].label ||
            patches_[i].cells != other.patches_[i].cells) {
            return false;
        }
    }
    return true;
}

SceneGrid initial_place(const SceneFrame& frame, const std::map<std::string, MatchResult>& matches,
                        const BaseMask& mask, uint64_t seed,
                        std::vector<PatchRegion> patches) {
    SceneGrid grid(mask, std::move(patches));
    std::vector<Cell> cells = mask.walkable_cells();
    if (cells.empty()) fail("GridFull", "no walkable cells to place on");

    Rng rng(derive_seed(seed, "initial-place"));
    for (const NarrativeObject& obj : frame.objects) {
        if (!obj.affordance) {
            fail("InvalidArgument", "object \"" + obj.name + "\" is not classified");
        }
        if (*obj.affordance == Affordance::Terrain) continue;
        int layer = layer_for(*obj.affordance);

        auto match_it = matches.find(obj.name);
        std::string tile_id = match_it == matches.end() ? "" : match_it->second.tile_id;

        // Rejection sampling stays uniform over free cells; fall back to an
        // explicit free list if the layer is crowded.
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            Cell c = cells[rng.below(cells.size())];
            if (grid.occupant(layer, c.x, c.y) == 0) {
                grid.place(obj.name, tile_id, *obj.affordance, layer, c.x, c.y);
                placed = true;
            }
        }
        if (!placed) {
            std::vector<Cell> free;
            for (const Cell& c : cells) {
                if (grid.occupant(layer, c.x, c.y) == 0) free.push_back(c);
            }
            if (free.empty()) {
                fail("GridFull", "layer " + std::string(layer_label(layer)) +
                                     " has no free walkable cell for \"" + obj.name + "\"");
            }
            Cell c = free[rng.below(free.size())];
            grid.place(obj.name, tile_id, *obj.affordance, layer, c.x, c.y);
        }
    }
    grid.validate(true);
    return grid;
}

namespace {

struct ResolvedTriple {
    PredicateTriple raw;
    std::string moved;   // canonical key of the entity the offset applies to
    std::string anchor;  // canonical key of the reference entity
    Relation relation;
    bool swapped = false;
    std::string source;
};

std::vector<ResolvedTriple> resolve_triples(const SceneFrame& frame, const RelationMapTable& table,
                                            const RelationFallback& fallback) {
    std::vector<ResolvedTriple> out;
    out.reserve(frame.triples.size());
    for (const PredicateTriple& t : frame.triples) {
        NormalizedRelation norm = normalize_relation(t.relation, table, fallback);
        ResolvedTriple rt;
        rt.raw = t;
        rt.moved = normalize_entity_name(t.subject);
        rt.anchor = normalize_entity_name(t.object);
        if (norm.swap_args) std::swap(rt.moved, rt.anchor);
        rt.relation = norm.canonical;
        rt.swapped = norm.swap_args;
        rt.source = norm.source;
        out.push_back(std::move(rt));
    }
    return out;
}

bool triple_holds(const SceneGrid& grid, const ResolvedTriple& rt) {
    const PlacedObject* a = grid.find_entity(rt.moved);
    const PlacedObject* b = grid.find_entity(rt.anchor);
    if (!a || !b) return false;
    return check_predicate(PlacedPos{a->x, a->y, a->layer}, PlacedPos{b->x, b->y, b->layer},
                           rt.relation);
}

}  // namespace

PlacementReport apply_spatial_relations(SceneGrid& grid, const SceneFrame& frame,
                                        const RelationMapTable& table,
                                        const RelationFallback& fallback) {
    PlacementReport report;
    for (const ResolvedTriple& rt : resolve_triples(frame, table, fallback)) {
        TripleReport rec;
        rec.triple = rt.raw;
        rec.canonical = rt.relation;
        rec.swapped = rt.swapped;

        const PlacedObject* a = grid.find_entity(rt.moved);
        const PlacedObject* b = grid.find_entity(rt.anchor);
        if (!a || !b) {
            rec.action = TripleAction::EntityMissing;
            rec.note = std::string("missing ") + (!a ? rt.moved : rt.anchor);
            report.triples.push_back(std::move(rec));
            continue;
        }
        rec.satisfied_before = triple_holds(grid, rt);

        const int slot = a->slot;
        if (rt.relation == Relation::OnTopOf) {
            // Keep the natural layer when it already stacks above the anchor;
            // otherwise promote to anchor layer + 1, capped at the top layer.
            int target_layer =
                a->layer > b->layer ? a->layer : std::min(b->layer + 1, kCharacterLayer);
            PlacedPos would{b->x, b->y, target_layer};
            PlacedPos anchor_pos{b->x, b->y, b->layer};
            bool self = rt.moved == rt.anchor;
            if (self) anchor_pos = would;
            if (target_layer <= b->layer || self ||
                !check_predicate(would, anchor_pos, Relation::OnTopOf)) {
                rec.action = TripleAction::SkippedOverlap;
                rec.note = "layer stack impossible";
            } else {
                int existing = grid.occupant(target_layer, b->x, b->y);
                if (existing != 0 && existing != slot) {
                    rec.action = TripleAction::SkippedOverlap;
                } else {
                    grid.move_slot(slot, b->x, b->y, target_layer);
                    rec.action = TripleAction::Placed;
                }
            }
        } else {
            OffsetTarget target = apply_offset(Cell{b->x, b->y}, rt.relation);
            if (!grid.in_bounds(target.x, target.y)) {
                rec.action = TripleAction::SkippedOob;
            } else {
                // Moving an entity relative to itself can never satisfy a
                // directional relation, so that move is not committed.
                PlacedPos would{target.x, target.y, a->layer};
                PlacedPos anchor_pos = rt.moved == rt.anchor
                                           ? would
                                           : PlacedPos{b->x, b->y, b->layer};
                if (!check_predicate(would, anchor_pos, rt.relation)) {
                    rec.action = TripleAction::SkippedOverlap;
                    rec.note = "move would not satisfy the relation";
                } else {
                    int existing = grid.occupant(a->layer, target.x, target.y);
                    if (existing != 0 && existing != slot) {
                        rec.action = TripleAction::SkippedOverlap;
                    } else {
                        grid.move_slot(slot, target.x, target.y, a->layer);
                        rec.action = TripleAction::Moved;
                    }
                }
            }
        }
        rec.satisfied_after = triple_holds(grid, rt);
        report.triples.push_back(std::move(rec));
    }
    grid.validate(false);
    return report;
}

std::vector<bool> satisfied_triples(const SceneGrid& grid, const SceneFrame& frame,
                                    const RelationMapTable& table,
                                    const RelationFallback& fallback) {
    std::vector<bool> out;
    for (const ResolvedTriple& rt : resolve_triples(frame, table, fallback)) {
        out.push_back(triple_holds(grid, rt));
    }
    return out;
}

double satisfaction_rate(const SceneGrid& grid, const SceneFrame& frame,
                         const RelationMapTable& table, const RelationFallback& fallback) {
    std::vector<bool> results = satisfied_triples(grid, frame, table, fallback);
    if (results.empty()) return 0.0;  // zero-triple frames never score 1.0
    int satisfied = 0;
    for (bool b : results) satisfied += b;
    return static_cast<double>(satisfied) / static_cast<double>(results.size());
}

}  // namespace scenegen
