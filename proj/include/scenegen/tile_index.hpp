#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scenegen/narrative.hpp"

namespace scenegen {

struct TileRecord {
    std::string id;
    std::string name;
    std::string group_label;
    std::string supercategory;
    Affordance affordance = Affordance::EnvironmentalObject;
    std::string sprite_path;           // optional
    std::vector<float> embedding;      // unit vector when present

    bool operator==(const TileRecord&) const = default;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dimension() const = 0;
    // Returns an L2-normalized vector. Deterministic for a fixed provider.
    virtual std::vector<float> embed(const std::string& text) const = 0;
};

// Offline deterministic provider: signed token hashing. Each lowercase
// alphanumeric token lands in one bucket (FNV hash mod D) with a sign from a
// second hash; the bucket sums are L2-normalized.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(int dimension = 384);
    std::string id() const override;
    int dimension() const override { return dim_; }
    std::vector<float> embed(const std::string& text) const override;

private:
    int dim_;
};

struct MatchResult {
    std::string tile_id;
    double cosine = 0.0;         // raw similarity, in [-1, 1]
    double boosted_score = 0.0;  // cosine + lambda * [affordance matched]
    bool affordance_matched = false;
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Embedding-side text recipes. Tiles concatenate all four metadata fields;
// narrative objects use "name. affordance words" when the affordance is known.
std::string tile_embedding_text(const TileRecord& tile);
std::string object_query_text(const NarrativeObject& object);

class TileIndex {
public:
    // Embeds every tile lacking a precomputed vector and validates the rest.
    // Records are stored sorted by id, so build order cannot affect queries.
    static TileIndex build(std::vector<TileRecord> tiles, const EmbeddingProvider& provider);

    const std::vector<TileRecord>& records() const { return records_; }
    int dimension() const { return dim_; }
    const std::string& provider_id() const { return provider_id_; }
    const TileRecord* find(const std::string& id) const;

    // Exhaustive scan over every record; results sorted by boosted score
    // descending, ties broken by tile id ascending.
    std::vector<MatchResult> query(const NarrativeObject& object, int k, double affordance_boost,
                                   const EmbeddingProvider& provider) const;

private:
    std::vector<TileRecord> records_;
    int dim_ = 0;
    std::string provider_id_;
};

// Tileset file: one JSON record per line with fields id, name, group,
// supercategory, affordance, sprite_path?, embedding?.
std::vector<TileRecord> load_tileset_jsonl(const std::filesystem::path& path);

// Optional sidecar: manifest JSON {dimension, data, ids:[...]} next to a raw
// little-endian float32 matrix, one row per id. Fills records that have no
// inline embedding.
void load_embedding_sidecar(std::vector<TileRecord>& records,
                            const std::filesystem::path& manifest_path);

}  // namespace scenegen
