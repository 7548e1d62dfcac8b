#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/narrative.hpp"

namespace scenegen {

struct ObjectMatchEval {
    std::string entity;
    Affordance object_affordance = Affordance::EnvironmentalObject;
    std::string tile_id;
    Affordance tile_affordance = Affordance::EnvironmentalObject;
    double cosine = 0.0;  // raw top-1 similarity
};

struct FrameEvaluation {
    std::string frame_name;
    std::vector<ObjectMatchEval> matched_objects;
    int triples_total = 0;
    int triples_satisfied = 0;
};

struct StoryMetrics {
    std::string story_id;
    double cos_sim = 0.0;       // mean top-1 cosine over matched objects
    double afford = 0.0;        // affordance match rate
    std::optional<double> div;  // unique tile ids / matched objects; absent when none matched
    double sat = 0.0;           // satisfied predicates / total predicates (pooled)
    int matched_objects = 0;
    int predicates_total = 0;
    int predicates_satisfied = 0;
};

// Story-level scoring. Entities recurring across frames count once (first
// appearance wins); predicates pool across the whole story rather than
// averaging per-frame rates. Throws NoMatches when nothing matched.
StoryMetrics score_story(const std::string& story_id, const std::vector<FrameEvaluation>& frames);

struct MetricAggregate {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct AggregateMetrics {
    MetricAggregate cos_sim;
    MetricAggregate afford;
    MetricAggregate div;  // over stories where div is defined
    MetricAggregate sat;
    int stories = 0;
};

AggregateMetrics aggregate(const std::vector<StoryMetrics>& stories);

// Fixed-point decimal formatting with round-half-away-from-zero in decimal
// space (0.415 -> "0.42"), as read off the printed tables.
std::string format_fixed(double value, int decimals);
std::string format_percent(double ratio);  // integer percent of a [0,1] ratio

enum class ReportFormat { Markdown, Csv };

std::string render_report(const std::vector<StoryMetrics>& stories,
                          const AggregateMetrics& overall, ReportFormat format);

void emit_report(const std::vector<StoryMetrics>& stories, const AggregateMetrics& overall,
                 ReportFormat format, const std::filesystem::path& path);

}  // namespace scenegen
