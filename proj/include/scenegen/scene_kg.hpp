#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenegen/narrative.hpp"
#include "scenegen/relations.hpp"
#include "scenegen/tile_index.hpp"

namespace scenegen {

struct KGNode {
    std::string id;  // canonical entity key
    std::optional<Affordance> affordance;
    std::string tile_id;  // empty when unmatched

    bool operator==(const KGNode&) const = default;
};

struct KGEdge {
    std::string subject;
    std::string object;
    std::string relation_raw;
    std::optional<Relation> relation_canonical;
    bool swapped = false;

    bool operator==(const KGEdge&) const = default;
};

// Directed symbolic graph for one frame: one node per distinct entity, one
// edge per triple (self-loops preserved when a triple repeats an entity).
struct SceneKG {
    std::string frame_name;
    std::vector<KGNode> nodes;  // sorted by id
    std::vector<KGEdge> edges;  // frame triple order

    bool operator==(const SceneKG&) const = default;
};

enum class MergedEdgeType { Predicate, Precedes, SameEntity };

std::string_view merged_edge_type_name(MergedEdgeType t);

struct MergedNode {
    std::string id;  // "f<k>:<entity>" or the frame anchor "frame:<k>"
    int frame_index = 0;  // 1-based
    std::string entity;  // empty for anchors

    bool operator==(const MergedNode&) const = default;
};

struct MergedEdge {
    MergedEdgeType type = MergedEdgeType::Predicate;
    std::string from;
    std::string to;
    std::string label;

    bool operator==(const MergedEdge&) const = default;
};

// Union of frame graphs under frame-scoped node ids, one anchor node per
// frame, F-1 `precedes` edges chaining the anchors, and same-entity annotation
// edges linking consecutive appearances of an entity.
struct MergedKG {
    std::vector<SceneKG> scenes;  // per-frame subgraphs, preserved verbatim
    std::vector<MergedNode> nodes;
    std::vector<MergedEdge> edges;

    int precedes_edge_count() const;
};

SceneKG build_scene_kg(const SceneFrame& frame, const std::map<std::string, MatchResult>& matches,
                       const RelationMapTable& table, const RelationFallback& fallback = {});

MergedKG merge_kgs(const std::vector<SceneKG>& kgs);

struct TimelineEntry {
    int frame_index = 0;  // 1-based, in precedes order
    std::string frame_name;
    std::vector<KGEdge> incident;  // edges naming the entity, frame order
};

std::vector<TimelineEntry> query_entity_timeline(const MergedKG& merged,
                                                 const std::string& entity);

// Byte-stable exports (sorted emission).
nlohmann::json scene_kg_to_json(const SceneKG& kg);
SceneKG scene_kg_from_json(const nlohmann::json& doc);
nlohmann::json merged_kg_to_json(const MergedKG& merged);
MergedKG merged_kg_from_json(const nlohmann::json& doc);
std::string merged_kg_to_dot(const MergedKG& merged);

}  // namespace scenegen
