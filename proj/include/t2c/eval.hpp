#pragma once

#include "t2c/corpus.hpp"
#include "t2c/search.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace t2c {

/// Same type and grouping, y equal as a multiset, x equal as an ordered list.
bool charts_match(const ChartSequence& a, const ChartSequence& b);

/// Sorted fields a chart uses.
std::vector<std::size_t> chart_field_set(const ChartSequence& chart);

using RankedCharts = std::vector<ChartSequence>;

/// Share of tables where some top-k rec uses exactly the field set of some truth.
double recall_data_queries(std::span<const RankedCharts> recs, std::span<const RankedCharts> truths, std::size_t k);
/// Share of tables where some top-k rec matches some truth.
double recall_overall(std::span<const RankedCharts> recs, std::span<const RankedCharts> truths, std::size_t k);

/// One user-created field set of a table with the truths that use it.
struct FieldSetCase {
    TablePtr table;
    std::vector<std::size_t> fields;
    std::vector<ChartSequence> truths;
};

/// Recommends under each field set as a required-field constraint; share where a top-k rec
/// matches a truth. Unsatisfiable cases count as not recalled.
double recall_design_choices(const Scorer& scorer, std::span<const FieldSetCase> cases, std::size_t k,
                             const SearchConfig& search);

struct StageRecall {
    double r1 = 0, r3 = 0;
    std::size_t hit1 = 0, hit3 = 0, total = 0;
};

struct EvalOptions {
    SearchConfig search;        // seed types select the task (empty: the four major types)
    bool design_choices = true;
};

struct EvalReport {
    StageRecall data_queries, design_choices, overall;
    std::map<ChartType, StageRecall> overall_by_type;
    std::size_t tables = 0, field_sets = 0, skipped_tables = 0;
    double mean_latency_ms = 0;
    std::vector<double> latencies_ms;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Truths are the charts whose type is among the seed types; tables without any are skipped.
EvalReport evaluate(const Scorer& scorer, const Corpus& corpus, const EvalOptions& options);

}  // namespace t2c
