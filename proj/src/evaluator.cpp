#include "scenegen/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

StoryMetrics score_story(const std::string& story_id, const std::vector<FrameEvaluation>& frames) {
    StoryMetrics m;
    m.story_id = story_id;

    std::set<std::string> seen_entities;
    std::set<std::string> tile_ids;
    double cosine_sum = 0.0;
    int afford_hits = 0;
    for (const FrameEvaluation& frame : frames) {
        for (const ObjectMatchEval& obj : frame.matched_objects) {
            if (!seen_entities.insert(obj.entity).second) continue;
            ++m.matched_objects;
            cosine_sum += obj.cosine;
            afford_hits += obj.object_affordance == obj.tile_affordance;
            tile_ids.insert(obj.tile_id);
        }
        m.predicates_total += frame.triples_total;
        m.predicates_satisfied += frame.triples_satisfied;
    }
    if (m.matched_objects == 0) {
        fail("NoMatches", "story \"" + story_id + "\" has no matched objects");
    }
    m.cos_sim = cosine_sum / m.matched_objects;
    m.afford = static_cast<double>(afford_hits) / m.matched_objects;
    m.div = static_cast<double>(tile_ids.size()) / m.matched_objects;
    m.sat = m.predicates_total == 0
                ? 0.0
                : static_cast<double>(m.predicates_satisfied) / m.predicates_total;
    return m;
}

namespace {

MetricAggregate aggregate_values(const std::vector<double>& values) {
    MetricAggregate agg;
    if (values.empty()) return agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return agg;
}

}  // namespace

AggregateMetrics aggregate(const std::vector<StoryMetrics>& stories) {
    if (stories.empty()) fail("InvalidArgument", "aggregate needs at least one story");
    std::vector<double> cos_sim, afford, div, sat;
    for (const StoryMetrics& m : stories) {
        cos_sim.push_back(m.cos_sim);
        afford.push_back(m.afford);
        if (m.div) div.push_back(*m.div);
        sat.push_back(m.sat);
    }
    AggregateMetrics out;
    out.cos_sim = aggregate_values(cos_sim);
    out.afford = aggregate_values(afford);
    out.div = aggregate_values(div);
    out.sat = aggregate_values(sat);
    out.stories = static_cast<int>(stories.size());
    return out;
}

std::string format_fixed(double value, int decimals) {
    if (decimals < 0 || decimals > 6) fail("InvalidArgument", "bad decimal count");
    // Print with spare precision, then round in decimal space (half away from
    // zero) so values like 0.415 behave as a reader of the table expects.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", std::abs(value));
    std::string digits(buf);

    size_t dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    std::string frac = digits.substr(dot + 1);

    std::string kept = frac.substr(0, static_cast<size_t>(decimals));
    bool round_up = frac[static_cast<size_t>(decimals)] >= '5';
    if (round_up) {
        std::string combined = whole + kept;
        for (int i = static_cast<int>(combined.size()) - 1; i >= 0; --i) {
            if (combined[static_cast<size_t>(i)] == '9') {
                combined[static_cast<size_t>(i)] = '0';
            } else {
                ++combined[static_cast<size_t>(i)];
                break;
            }
            if (i == 0) combined.insert(combined.begin(), '1');
        }
        whole = combined.substr(0, combined.size() - kept.size());
        kept = combined.substr(combined.size() - kept.size());
    }
    // Strip leading zeros of the whole part (keep one digit).
    size_t first = whole.find_first_not_of('0');
    whole = first == std::string::npos ? "0" : whole.substr(first);

    std::string out = whole;
    if (decimals > 0) out += "." + kept;
    bool nonzero = out.find_first_of("123456789") != std::string::npos;
    if (value < 0 && nonzero) out.insert(out.begin(), '-');
    return out;
}

std::string format_percent(double ratio) { return format_fixed(ratio * 100.0, 0); }

namespace {

struct Row {
    std::string story, cos_sim, afford, div, sat;
};

std::vector<Row> build_rows(const std::vector<StoryMetrics>& stories,
                            const AggregateMetrics& overall) {
    std::vector<Row> rows;
    for (const StoryMetrics& m : stories) {
        rows.push_back(Row{m.story_id, format_fixed(m.cos_sim, 2), format_fixed(m.afford, 2),
                           m.div ? format_fixed(*m.div, 2) : "-", format_percent(m.sat)});
    }
    rows.push_back(Row{"Overall", format_fixed(overall.cos_sim.mean, 2),
                       format_fixed(overall.afford.mean, 2), format_fixed(overall.div.mean, 2),
                       format_percent(overall.sat.mean)});
    return rows;
}

}  // namespace

std::string render_report(const std::vector<StoryMetrics>& stories,
                          const AggregateMetrics& overall, ReportFormat format) {
    std::vector<Row> rows = build_rows(stories, overall);
    std::ostringstream out;
    if (format == ReportFormat::Markdown) {
        out << "| Story | CosSim | Afford | Div | Sat (%) |\n";
        out << "|-------|--------|--------|-----|---------|\n";
        for (const Row& r : rows) {
            out << "| " << r.story << " | " << r.cos_sim << " | " << r.afford << " | " << r.div
                << " | " << r.sat << " |\n";
        }
    } else {
        out << "Story,CosSim,Afford,Div,Sat\n";
        for (const Row& r : rows) {
            out << r.story << "," << r.cos_sim << "," << r.afford << ","
                << (r.div == "-" ? "" : r.div) << "," << r.sat << "\n";
        }
    }
    return out.str();
}

void emit_report(const std::vector<StoryMetrics>& stories, const AggregateMetrics& overall,
                 ReportFormat format, const std::filesystem::path& path) {
    write_text_file(path, render_report(stories, overall, format));
}

}  // namespace scenegen
