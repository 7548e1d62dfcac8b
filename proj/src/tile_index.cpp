#include "scenegen/tile_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

using nlohmann::json;

namespace {
constexpr uint64_t kSignSeed = 0x9e3779b97f4a7c15ULL;
}

HashEmbeddingProvider::HashEmbeddingProvider(int dimension) : dim_(dimension) {
    if (dimension <= 0) fail("InvalidArgument", "embedding dimension must be positive");
}

std::string HashEmbeddingProvider::id() const {
    return "hash-v1-d" + std::to_string(dim_);
}

std::vector<float> HashEmbeddingProvider::embed(const std::string& text) const {
    if (trim(text).empty()) fail("InvalidArgument", "cannot embed empty text");
    std::vector<std::string> tokens = alnum_tokens(text);
    if (tokens.empty()) fail("InvalidArgument", "no embeddable tokens in \"" + text + "\"");

    std::vector<double> acc(static_cast<size_t>(dim_), 0.0);
    for (const std::string& t : tokens) {
        size_t bucket = static_cast<size_t>(fnv1a64(t) % static_cast<uint64_t>(dim_));
        double sign = (fnv1a64(t, kSignSeed) & 1) ? 1.0 : -1.0;
        acc[bucket] += sign;
    }
    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) {
        // Signed tokens cancelled each other out; fall back to a single spike.
        acc[static_cast<size_t>(fnv1a64(text) % static_cast<uint64_t>(dim_))] = 1.0;
        norm_sq = 1.0;
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    std::vector<float> out(static_cast<size_t>(dim_));
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
    return out;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) fail("DimensionMismatch", "cosine over mismatched dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) fail("InvalidArgument", "cosine over zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string tile_embedding_text(const TileRecord& tile) {
    return tile.name + ". " + tile.group_label + ". " + tile.supercategory + ". " +
           affordance_words(tile.affordance);
}

std::string object_query_text(const NarrativeObject& object) {
    if (object.affordance) {
        return object.name + ". " + affordance_words(*object.affordance);
    }
    return object.name;
}

TileIndex TileIndex::build(std::vector<TileRecord> tiles, const EmbeddingProvider& provider) {
    TileIndex index;
    index.dim_ = provider.dimension();
    index.provider_id_ = provider.id();

    std::set<std::string> seen;
    for (TileRecord& tile : tiles) {
        if (tile.id.empty()) fail("MalformedDocument", "tile record with empty id");
        if (!seen.insert(tile.id).second) fail("DuplicateId", "duplicate tile id " + tile.id);
        if (tile.embedding.empty()) {
            tile.embedding = provider.embed(tile_embedding_text(tile));
        } else {
            if (static_cast<int>(tile.embedding.size()) != index.dim_) {
                fail("DimensionMismatch",
                     "tile " + tile.id + ": embedding length " +
                         std::to_string(tile.embedding.size()) + " != index dimension " +
                         std::to_string(index.dim_));
            }
            double norm_sq = 0.0;
            for (float v : tile.embedding) norm_sq += static_cast<double>(v) * v;
            if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-3) {
                fail("InvalidArgument", "tile " + tile.id + ": embedding is not unit norm");
            }
        }
    }
    std::sort(tiles.begin(), tiles.end(),
              [](const TileRecord& a, const TileRecord& b) { return a.id < b.id; });
    index.records_ = std::move(tiles);
    return index;
}

const TileRecord* TileIndex::find(const std::string& id) const {
    auto it = std::lower_bound(
        records_.begin(), records_.end(), id,
        [](const TileRecord& rec, const std::string& key) { return rec.id < key; });
    if (it == records_.end() || it->id != id) return nullptr;
    return &*it;
}

std::vector<MatchResult> TileIndex::query(const NarrativeObject& object, int k,
                                          double affordance_boost,
                                          const EmbeddingProvider& provider) const {
    if (records_.empty()) fail("EmptyIndex", "query against an empty tile index");
    if (k <= 0 || static_cast<size_t>(k) > records_.size()) {
        fail("InvalidArgument", "k must be in [1, index size]");
    }
    if (provider.dimension() != dim_) {
        fail("DimensionMismatch", "query provider dimension != index dimension");
    }

    std::vector<float> qv = provider.embed(object_query_text(object));
    std::vector<MatchResult> all;
    all.reserve(records_.size());
    for (const TileRecord& tile : records_) {
        MatchResult m;
        m.tile_id = tile.id;
        m.cosine = cosine_similarity(qv, tile.embedding);
        m.affordance_matched = object.affordance && *object.affordance == tile.affordance;
        m.boosted_score = m.cosine + (m.affordance_matched ? affordance_boost : 0.0);
        all.push_back(std::move(m));
    }
    std::sort(all.begin(), all.end(), [](const MatchResult& a, const MatchResult& b) {
        if (a.boosted_score != b.boosted_score) return a.boosted_score > b.boosted_score;
        return a.tile_id < b.tile_id;
    });
    all.resize(static_cast<size_t>(k));
    return all;
}

std::vector<TileRecord> load_tileset_jsonl(const std::filesystem::path& path) {
    std::istringstream stream(read_text_file(path));
    std::vector<TileRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail("MalformedDocument",
                 path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        TileRecord tile;
        for (const char* field : {"id", "name", "group", "supercategory", "affordance"}) {
            if (!rec.contains(field) || !rec[field].is_string()) {
                fail("MalformedDocument", path.string() + ":" + std::to_string(line_no) +
                                              ": missing field \"" + field + "\"");
            }
        }
        tile.id = rec["id"].get<std::string>();
        tile.name = rec["name"].get<std::string>();
        tile.group_label = rec["group"].get<std::string>();
        tile.supercategory = rec["supercategory"].get<std::string>();
        auto aff = affordance_from_label(rec["affordance"].get<std::string>());
        if (!aff) {
            fail("MalformedDocument", path.string() + ":" + std::to_string(line_no) +
                                          ": unknown affordance \"" +
                                          rec["affordance"].get<std::string>() + "\"");
        }
        tile.affordance = *aff;
        if (rec.contains("sprite_path") && rec["sprite_path"].is_string()) {
            tile.sprite_path = rec["sprite_path"].get<std::string>();
        }
        if (rec.contains("embedding") && rec["embedding"].is_array()) {
            for (const json& v : rec["embedding"]) {
                tile.embedding.push_back(v.get<float>());
            }
        }
        out.push_back(std::move(tile));
    }
    return out;
}

void load_embedding_sidecar(std::vector<TileRecord>& records,
                            const std::filesystem::path& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        fail("MalformedDocument", manifest_path.string() + ": " + e.what());
    }
    if (!manifest.is_object() || !manifest.contains("dimension") || !manifest.contains("ids") ||
        !manifest.contains("data")) {
        fail("MalformedDocument", manifest_path.string() + ": need dimension, ids, data");
    }
    const int dim = manifest["dimension"].get<int>();
    if (dim <= 0) fail("MalformedDocument", "sidecar dimension must be positive");
    std::filesystem::path data_path =
        manifest_path.parent_path() / manifest["data"].get<std::string>();
    std::vector<uint8_t> bytes = read_binary_file(data_path);

    const auto& ids = manifest["ids"];
    const size_t row_bytes = static_cast<size_t>(dim) * sizeof(float);
    if (bytes.size() != ids.size() * row_bytes) {
        fail("DimensionMismatch", data_path.string() + ": size does not match ids x dimension");
    }
    std::map<std::string, size_t> row_of;
    for (size_t i = 0; i < ids.size(); ++i) row_of[ids[i].get<std::string>()] = i;

    for (TileRecord& tile : records) {
        if (!tile.embedding.empty()) continue;
        auto it = row_of.find(tile.id);
        if (it == row_of.end()) continue;
        tile.embedding.resize(static_cast<size_t>(dim));
        // Rows are little-endian float32; this loader assumes a little-endian host.
        std::memcpy(tile.embedding.data(), bytes.data() + it->second * row_bytes, row_bytes);
    }
}

}  // namespace scenegen
