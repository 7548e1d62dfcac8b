#include "scenegen/relations.hpp"

#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;

std::string_view relation_name(Relation r) {
    switch (r) {
        case Relation::Above: return "above";
        case Relation::Below: return "below";
        case Relation::AtLeftOf: return "at_left_of";
        case Relation::AtRightOf: return "at_right_of";
        case Relation::OnTopOf: return "on_top_of";
    }
    return "on_top_of";
}

std::optional<Relation> relation_from_name(std::string_view name) {
    for (Relation r : kAllRelations) {
        if (relation_name(r) == name) return r;
    }
    return std::nullopt;
}

GridOffset offset_for(Relation r) {
    switch (r) {
        case Relation::AtLeftOf: return {-3, 0, false};
        case Relation::AtRightOf: return {+3, 0, false};
        case Relation::Above: return {0, -3, false};
        case Relation::Below: return {0, +3, false};
        case Relation::OnTopOf: return {0, 0, true};
    }
    return {0, 0, true};
}

OffsetTarget apply_offset(Cell anchor, Relation r) {
    GridOffset off = offset_for(r);
    return OffsetTarget{anchor.x + off.dx, anchor.y + off.dy, off.overlap};
}

bool check_predicate(const PlacedPos& a, const PlacedPos& b, Relation r) {
    switch (r) {
        case Relation::AtLeftOf: return a.x < b.x;
        case Relation::AtRightOf: return a.x > b.x;
        case Relation::Above: return a.y < b.y;
        case Relation::Below: return a.y > b.y;
        case Relation::OnTopOf: return a.x == b.x && a.y == b.y && a.layer > b.layer;
    }
    return false;
}

std::string normalize_relation_phrase(std::string_view phrase) {
    std::string folded;
    folded.reserve(phrase.size());
    for (unsigned char c : phrase) {
        if (c == '_' || c == '-') {
            folded.push_back(' ');
        } else {
            folded.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return join(split_ws(folded), " ");
}

RelationMapTable RelationMapTable::builtin(Relation near_default) {
    RelationMapTable t;
    auto add = [&](std::string_view phrase, Relation r, bool swap = false) {
        t.set(phrase, RelationMapping{r, swap});
    };

    // Identity names, with and without articles.
    add("above", Relation::Above);
    add("below", Relation::Below);
    add("at left of", Relation::AtLeftOf);
    add("at the left of", Relation::AtLeftOf);
    add("to the left of", Relation::AtLeftOf);
    add("left of", Relation::AtLeftOf);
    add("at right of", Relation::AtRightOf);
    add("at the right of", Relation::AtRightOf);
    add("to the right of", Relation::AtRightOf);
    add("right of", Relation::AtRightOf);
    add("on top of", Relation::OnTopOf);

    // Common prose variants.
    add("over", Relation::Above);
    add("under", Relation::Below);
    add("beneath", Relation::Below);
    add("underneath", Relation::Below);
    add("atop", Relation::OnTopOf);
    add("inside", Relation::OnTopOf);

    // "X contains Y" puts Y on top of X, so the arguments swap.
    add("contains", Relation::OnTopOf, true);
    add("contain", Relation::OnTopOf, true);

    add("sits atop", Relation::OnTopOf);
    add("sit atop", Relation::OnTopOf);
    add("on", Relation::OnTopOf);
    add("stands near", near_default);
    add("stand near", near_default);
    add("next to", Relation::AtRightOf);
    add("walks along", Relation::OnTopOf);
    add("walk along", Relation::OnTopOf);
    add("stands before", Relation::AtLeftOf);
    add("stand before", Relation::AtLeftOf);
    add("leads to", Relation::AtRightOf);
    add("lead to", Relation::AtRightOf);
    add("hide behind", Relation::AtRightOf);
    add("hides behind", Relation::AtRightOf);
    add("glows with", Relation::OnTopOf);
    add("glow with", Relation::OnTopOf);
    add("filters through", Relation::Above);
    add("filter through", Relation::Above);
    return t;
}

RelationMapTable RelationMapTable::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail("MalformedDocument", "relation table root must be an object");
    RelationMapTable t;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        RelationMapping m;
        std::string canonical;
        if (it.value().is_string()) {
            canonical = it.value().get<std::string>();
        } else if (it.value().is_object()) {
            if (!it.value().contains("canonical") || !it.value()["canonical"].is_string()) {
                fail("MalformedDocument", "relation entry \"" + it.key() + "\" lacks canonical");
            }
            canonical = it.value()["canonical"].get<std::string>();
            if (it.value().contains("swap")) m.swap_args = it.value()["swap"].get<bool>();
        } else {
            fail("MalformedDocument", "relation entry \"" + it.key() + "\" must be string or object");
        }
        auto rel = relation_from_name(canonical);
        if (!rel) {
            fail("MalformedDocument", "relation entry \"" + it.key() +
                                          "\": unknown canonical name \"" + canonical + "\"");
        }
        m.canonical = *rel;
        t.set(it.key(), m);
    }
    return t;
}

RelationMapTable RelationMapTable::load(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", path.string() + ": " + e.what());
    }
    return from_json(doc);
}

void RelationMapTable::set(std::string_view phrase, RelationMapping mapping) {
    entries_[normalize_relation_phrase(phrase)] = mapping;
}

std::optional<RelationMapping> RelationMapTable::find(std::string_view phrase) const {
    auto it = entries_.find(normalize_relation_phrase(phrase));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void RelationMapTable::merge(const RelationMapTable& overrides) {
    for (const auto& [phrase, mapping] : overrides.entries_) {
        entries_[phrase] = mapping;
    }
}

nlohmann::json RelationMapTable::to_json() const {
    json doc = json::object();
    for (const auto& [phrase, mapping] : entries_) {
        if (mapping.swap_args) {
            doc[phrase] = {{"canonical", std::string(relation_name(mapping.canonical))},
                           {"swap", true}};
        } else {
            doc[phrase] = std::string(relation_name(mapping.canonical));
        }
    }
    return doc;
}

NormalizedRelation normalize_relation(std::string_view phrase, const RelationMapTable& table,
                                      const RelationFallback& fallback) {
    if (trim(phrase).empty()) fail("InvalidArgument", "relation phrase is empty");
    if (auto hit = table.find(phrase)) {
        return NormalizedRelation{hit->canonical, hit->swap_args, "table"};
    }
    if (fallback) {
        if (auto suggestion = fallback(normalize_relation_phrase(phrase))) {
            return NormalizedRelation{suggestion->canonical, suggestion->swap_args, "gateway"};
        }
    }
    fail("NonCanonicalRelation",
         "relation phrase \"" + std::string(phrase) + "\" has no canonical mapping");
}

}  // namespace scenegen
