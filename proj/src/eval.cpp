#include "t2c/eval.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace t2c {

namespace {

std::vector<ChartType> task_types(const SearchConfig& s) {
    if (!s.seed_types.empty()) return s.seed_types;
    return {kMajorChartTypes.begin(), kMajorChartTypes.end()};
}

template <class Hit>
double recall(std::span<const RankedCharts> recs, std::span<const RankedCharts> truths, std::size_t k, Hit hit) {
    if (recs.size() != truths.size()) throw Error(ErrorCode::KeyMismatch, "recommendations and truths differ in length");
    if (truths.empty()) throw Error(ErrorCode::EmptyTruth, "no tables to evaluate");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i].empty()) throw Error(ErrorCode::EmptyTruth, "table without truth charts");
        const std::size_t top = std::min(k, recs[i].size());
        bool ok = false;
        for (std::size_t r = 0; r < top && !ok; ++r)
            for (const auto& t : truths[i])
                if (hit(recs[i][r], t)) ok = true;
        hits += ok;
    }
    return static_cast<double>(hits) / static_cast<double>(truths.size());
}

bool same_fields(const ChartSequence& a, const ChartSequence& b) { return chart_field_set(a) == chart_field_set(b); }

void finish(StageRecall& s) {
    s.r1 = s.total ? static_cast<double>(s.hit1) / static_cast<double>(s.total) : 0.0;
    s.r3 = s.total ? static_cast<double>(s.hit3) / static_cast<double>(s.total) : 0.0;
}

// Rank of the first top-k entry satisfying `hit` against any truth, or SIZE_MAX.
template <class Hit>
std::size_t first_hit(const RankedCharts& recs, const std::vector<ChartSequence>& truths, Hit hit) {
    for (std::size_t r = 0; r < recs.size(); ++r)
        for (const auto& t : truths)
            if (hit(recs[r], t)) return r;
    return SIZE_MAX;
}

void count(StageRecall& s, std::size_t rank) {
    ++s.total;
    s.hit1 += rank < 1;
    s.hit3 += rank < 3;
}

nlohmann::json stage_json(const StageRecall& s) {
    return {{"R@1", s.r1}, {"R@3", s.r3}, {"hits@1", s.hit1}, {"hits@3", s.hit3}, {"total", s.total}};
}

}  // namespace

bool charts_match(const ChartSequence& a, const ChartSequence& b) {
    const ChartParts p = decompose(a), q = decompose(b);
    if (p.type != q.type || p.terminator != q.terminator || p.x != q.x) return false;
    auto ya = p.y, yb = q.y;
    std::sort(ya.begin(), ya.end());
    std::sort(yb.begin(), yb.end());
    return ya == yb;
}

std::vector<std::size_t> chart_field_set(const ChartSequence& chart) { return decompose(chart).field_set(); }

double recall_data_queries(std::span<const RankedCharts> recs, std::span<const RankedCharts> truths, std::size_t k) {
    return recall(recs, truths, k, same_fields);
}

double recall_overall(std::span<const RankedCharts> recs, std::span<const RankedCharts> truths, std::size_t k) {
    return recall(recs, truths, k, charts_match);
}

double recall_design_choices(const Scorer& scorer, std::span<const FieldSetCase> cases, std::size_t k,
                             const SearchConfig& search) {
    if (cases.empty()) throw Error(ErrorCode::EmptyTruth, "no field sets to evaluate");
    std::size_t hits = 0;
    for (const FieldSetCase& c : cases) {
        SearchConfig cfg = search;
        cfg.constraints.required_fields = c.fields;
        RankedCharts recs;
        try {
            for (const auto& e : beam_search(scorer, *c.table, cfg).entries) recs.push_back(e.state);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoLegalSeed && e.code() != ErrorCode::UnsatisfiableConstraints) throw;
        }
        if (first_hit(recs, c.truths, charts_match) < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cases.size());
}

EvalReport evaluate(const Scorer& scorer, const Corpus& corpus, const EvalOptions& options) {
    const auto types = task_types(options.search);
    EvalReport rep;
    for (const CorpusEntry& e : corpus) {
        std::vector<ChartSequence> truths;
        for (const auto& c : e.charts)
            if (std::find(types.begin(), types.end(), c.front().chart_type()) != types.end() &&
                is_legal_prefix(*e.table, c, options.search.constraints))
                truths.push_back(c);
        if (truths.empty()) {
            ++rep.skipped_tables;
            continue;
        }
        ++rep.tables;

        const auto t0 = std::chrono::steady_clock::now();
        RankedCharts recs;
        try {
            for (const auto& r : beam_search(scorer, *e.table, options.search).entries) recs.push_back(r.state);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NoLegalSeed) throw;
        }
        const auto t1 = std::chrono::steady_clock::now();
        rep.latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

        count(rep.data_queries, first_hit(recs, truths, same_fields));
        count(rep.overall, first_hit(recs, truths, charts_match));
        std::set<ChartType> present;
        for (const auto& t : truths) present.insert(t.front().chart_type());
        for (ChartType ty : present) {
            std::vector<ChartSequence> of_type;
            for (const auto& t : truths)
                if (t.front().chart_type() == ty) of_type.push_back(t);
            count(rep.overall_by_type[ty], first_hit(recs, of_type, charts_match));
        }

        if (!options.design_choices) continue;
        std::map<std::vector<std::size_t>, std::vector<ChartSequence>> sets;
        for (const auto& t : truths) sets[chart_field_set(t)].push_back(t);
        for (const auto& [fields, ts] : sets) {
            ++rep.field_sets;
            SearchConfig cfg = options.search;
            cfg.constraints.required_fields = fields;
            RankedCharts constrained;
            try {
                for (const auto& r : beam_search(scorer, *e.table, cfg).entries) constrained.push_back(r.state);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::NoLegalSeed) throw;
            }
            count(rep.design_choices, first_hit(constrained, ts, charts_match));
        }
    }
    finish(rep.data_queries);
    finish(rep.design_choices);
    finish(rep.overall);
    for (auto& [t, s] : rep.overall_by_type) finish(s);
    if (!rep.latencies_ms.empty())
        rep.mean_latency_ms = std::accumulate(rep.latencies_ms.begin(), rep.latencies_ms.end(), 0.0) /
                              static_cast<double>(rep.latencies_ms.size());
    return rep;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json by_type = nlohmann::json::object();
    for (const auto& [t, s] : overall_by_type) by_type[std::string(to_string(t))] = stage_json(s);
    return {{"data_queries", stage_json(data_queries)},
            {"design_choices", stage_json(design_choices)},
            {"overall", stage_json(overall)},
            {"overall_by_type", by_type},
            {"tables", tables},
            {"field_sets", field_sets},
            {"skipped_tables", skipped_tables},
            {"mean_latency_ms", mean_latency_ms}};
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    char buf[160];
    out << "stage            R@1     R@3     n\n";
    auto row = [&](const char* name, const StageRecall& s) {
        std::snprintf(buf, sizeof buf, "%-14s %6.4f  %6.4f  %zu\n", name, s.r1, s.r3, s.total);
        out << buf;
    };
    row("data queries", data_queries);
    row("design choices", design_choices);
    row("overall", overall);
    for (const auto& [t, s] : overall_by_type) row(("  " + std::string(to_string(t))).c_str(), s);
    std::snprintf(buf, sizeof buf, "tables %zu (skipped %zu), field sets %zu, mean latency %.2f ms\n", tables,
                  skipped_tables, field_sets, mean_latency_ms);
    out << buf;
    return out.str();
}

}  // namespace t2c
