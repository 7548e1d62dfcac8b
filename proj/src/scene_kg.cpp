#include "scenegen/scene_kg.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "scenegen/errors.hpp"

namespace scenegen {

using nlohmann::json;

std::string_view merged_edge_type_name(MergedEdgeType t) {
    switch (t) {
        case MergedEdgeType::Predicate: return "predicate";
        case MergedEdgeType::Precedes: return "precedes";
        case MergedEdgeType::SameEntity: return "same_entity";
    }
    return "predicate";
}

int MergedKG::precedes_edge_count() const {
    int n = 0;
    for (const MergedEdge& e : edges) n += e.type == MergedEdgeType::Precedes;
    return n;
}

SceneKG build_scene_kg(const SceneFrame& frame, const std::map<std::string, MatchResult>& matches,
                       const RelationMapTable& table, const RelationFallback& fallback) {
    SceneKG kg;
    kg.frame_name = frame.name;

    std::set<std::string> seen;
    for (const NarrativeObject& obj : frame.objects) {
        std::string key = normalize_entity_name(obj.name);
        if (!seen.insert(key).second) continue;
        KGNode node;
        node.id = key;
        node.affordance = obj.affordance;
        auto it = matches.find(key);
        if (it != matches.end()) node.tile_id = it->second.tile_id;
        kg.nodes.push_back(std::move(node));
    }
    std::sort(kg.nodes.begin(), kg.nodes.end(),
              [](const KGNode& a, const KGNode& b) { return a.id < b.id; });

    for (const PredicateTriple& t : frame.triples) {
        KGEdge edge;
        edge.subject = normalize_entity_name(t.subject);
        edge.object = normalize_entity_name(t.object);
        edge.relation_raw = t.relation;
        try {
            NormalizedRelation norm = normalize_relation(t.relation, table, fallback);
            edge.relation_canonical = norm.canonical;
            edge.swapped = norm.swap_args;
        } catch (const SceneError&) {
            // Unmapped relation phrases keep only their raw label.
        }
        kg.edges.push_back(std::move(edge));
    }
    return kg;
}

namespace {

std::string scoped_id(int frame_index, const std::string& entity) {
    return "f" + std::to_string(frame_index) + ":" + entity;
}

std::string anchor_id(int frame_index) { return "frame:" + std::to_string(frame_index); }

}  // namespace

MergedKG merge_kgs(const std::vector<SceneKG>& kgs) {
    if (kgs.empty()) fail("InvalidArgument", "merge_kgs needs at least one graph");

    MergedKG merged;
    merged.scenes = kgs;

    for (size_t i = 0; i < kgs.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        merged.nodes.push_back(MergedNode{anchor_id(k), k, ""});
        for (const KGNode& node : kgs[i].nodes) {
            merged.nodes.push_back(MergedNode{scoped_id(k, node.id), k, node.id});
        }
        for (const KGEdge& edge : kgs[i].edges) {
            std::string label = edge.relation_raw;
            if (edge.relation_canonical) {
                label += " (" + std::string(relation_name(*edge.relation_canonical)) + ")";
            }
            merged.edges.push_back(MergedEdge{MergedEdgeType::Predicate,
                                              scoped_id(k, edge.subject),
                                              scoped_id(k, edge.object), label});
        }
    }

    // Chronological chain over the frame anchors.
    for (size_t i = 0; i + 1 < kgs.size(); ++i) {
        merged.edges.push_back(MergedEdge{MergedEdgeType::Precedes,
                                          anchor_id(static_cast<int>(i) + 1),
                                          anchor_id(static_cast<int>(i) + 2), "precedes"});
    }

    // Same-entity annotations: link consecutive appearances of each entity.
    std::map<std::string, int> last_seen;  // entity -> frame index
    for (size_t i = 0; i < kgs.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        for (const KGNode& node : kgs[i].nodes) {
            auto it = last_seen.find(node.id);
            if (it != last_seen.end()) {
                merged.edges.push_back(MergedEdge{MergedEdgeType::SameEntity,
                                                  scoped_id(it->second, node.id),
                                                  scoped_id(k, node.id), "same_entity"});
            }
            last_seen[node.id] = k;
        }
    }
    return merged;
}

std::vector<TimelineEntry> query_entity_timeline(const MergedKG& merged,
                                                 const std::string& entity) {
    std::vector<TimelineEntry> out;
    for (size_t i = 0; i < merged.scenes.size(); ++i) {
        const SceneKG& kg = merged.scenes[i];
        bool present = std::any_of(kg.nodes.begin(), kg.nodes.end(),
                                   [&](const KGNode& n) { return n.id == entity; });
        if (!present) continue;
        TimelineEntry entry;
        entry.frame_index = static_cast<int>(i) + 1;
        entry.frame_name = kg.frame_name;
        for (const KGEdge& e : kg.edges) {
            if (e.subject == entity || e.object == entity) entry.incident.push_back(e);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

nlohmann::json scene_kg_to_json(const SceneKG& kg) {
    json doc;
    doc["frame"] = kg.frame_name;
    doc["nodes"] = json::array();
    for (const KGNode& node : kg.nodes) {
        json jn;
        jn["id"] = node.id;
        if (node.affordance) jn["affordance"] = std::string(affordance_label(*node.affordance));
        if (!node.tile_id.empty()) jn["tile_id"] = node.tile_id;
        doc["nodes"].push_back(std::move(jn));
    }
    doc["triples"] = json::array();
    for (const KGEdge& edge : kg.edges) {
        json je;
        je["frame"] = kg.frame_name;
        je["subject"] = edge.subject;
        je["relation_raw"] = edge.relation_raw;
        je["relation_canonical"] = edge.relation_canonical
                                       ? std::string(relation_name(*edge.relation_canonical))
                                       : "";
        je["object"] = edge.object;
        if (edge.swapped) je["swapped"] = true;
        doc["triples"].push_back(std::move(je));
    }
    return doc;
}

SceneKG scene_kg_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("frame") || !doc.contains("nodes") ||
        !doc.contains("triples")) {
        fail("MalformedDocument", "scene KG document needs frame, nodes, triples");
    }
    SceneKG kg;
    kg.frame_name = doc["frame"].get<std::string>();
    for (const json& jn : doc["nodes"]) {
        KGNode node;
        node.id = jn.at("id").get<std::string>();
        if (jn.contains("affordance")) {
            node.affordance = affordance_from_label(jn["affordance"].get<std::string>());
        }
        if (jn.contains("tile_id")) node.tile_id = jn["tile_id"].get<std::string>();
        kg.nodes.push_back(std::move(node));
    }
    for (const json& je : doc["triples"]) {
        KGEdge edge;
        edge.subject = je.at("subject").get<std::string>();
        edge.object = je.at("object").get<std::string>();
        edge.relation_raw = je.at("relation_raw").get<std::string>();
        std::string canonical = je.value("relation_canonical", std::string());
        if (!canonical.empty()) edge.relation_canonical = relation_from_name(canonical);
        edge.swapped = je.value("swapped", false);
        kg.edges.push_back(std::move(edge));
    }
    return kg;
}

nlohmann::json merged_kg_to_json(const MergedKG& merged) {
    json doc;
    doc["frames"] = json::array();
    for (const SceneKG& kg : merged.scenes) doc["frames"].push_back(scene_kg_to_json(kg));

    json edges = json::array();
    std::vector<MergedEdge> sorted = merged.edges;
    std::sort(sorted.begin(), sorted.end(), [](const MergedEdge& a, const MergedEdge& b) {
        auto ka = std::tuple(static_cast<int>(a.type), a.from, a.to, a.label);
        auto kb = std::tuple(static_cast<int>(b.type), b.from, b.to, b.label);
        return ka < kb;
    });
    for (const MergedEdge& e : sorted) {
        edges.push_back({{"type", std::string(merged_edge_type_name(e.type))},
                         {"from", e.from},
                         {"to", e.to},
                         {"label", e.label}});
    }
    doc["edges"] = std::move(edges);
    return doc;
}

MergedKG merged_kg_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("frames")) {
        fail("MalformedDocument", "merged KG document needs frames");
    }
    std::vector<SceneKG> scenes;
    for (const json& jf : doc["frames"]) scenes.push_back(scene_kg_from_json(jf));
    return merge_kgs(scenes);
}

std::string merged_kg_to_dot(const MergedKG& merged) {
    std::ostringstream out;
    out << "digraph merged_story {\n";
    out << "  rankdir=LR;\n";
    for (size_t i = 0; i < merged.scenes.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        out << "  subgraph cluster_f" << k << " {\n";
        out << "    label=\"frame " << k << ": " << merged.scenes[i].frame_name << "\";\n";
        out << "    \"" << anchor_id(k) << "\" [shape=box];\n";
        for (const KGNode& node : merged.scenes[i].nodes) {
            out << "    \"" << scoped_id(k, node.id) << "\" [label=\"" << node.id << "\"];\n";
        }
        out << "  }\n";
    }
    std::vector<MergedEdge> sorted = merged.edges;
    std::sort(sorted.begin(), sorted.end(), [](const MergedEdge& a, const MergedEdge& b) {
        auto ka = std::tuple(static_cast<int>(a.type), a.from, a.to, a.label);
        auto kb = std::tuple(static_cast<int>(b.type), b.from, b.to, b.label);
        return ka < kb;
    });
    for (const MergedEdge& e : sorted) {
        out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"" << e.label << "\"";
        if (e.type == MergedEdgeType::SameEntity) out << ", style=dashed";
        if (e.type == MergedEdgeType::Precedes) out << ", penwidth=2";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace scenegen
