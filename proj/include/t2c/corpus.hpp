#pragma once

#include "t2c/grammar.hpp"
#include "t2c/table.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace t2c {

/// A table with its user-created charts (sorted, unique).
struct CorpusEntry {
    TablePtr table;
    std::vector<ChartSequence> charts;
};

using Corpus = std::vector<CorpusEntry>;

nlohmann::json table_to_json(const Table& table);
/// Missing types are inferred from the values and missing roles get the defaults.
Table table_from_json(const nlohmann::json& j);

nlohmann::json entry_to_json(const CorpusEntry& entry);
/// Charts must parse, be complete and satisfy the grammar on the table.
CorpusEntry entry_from_json(const nlohmann::json& j);

/// Newline-delimited JSON, one entry per line. Errors name the offending line.
Corpus read_corpus(std::istream& in);
Corpus read_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::string& path, const Corpus& corpus);

/// Merges entries whose tables share a schema and identical values; chart sets are unioned.
/// Output keeps first-occurrence order.
Corpus dedup(const Corpus& corpus);

/// Chart type plus the field-type multiset of each segment, plus the terminator.
std::string chart_shape(const Table& table, const ChartSequence& chart);

/// Keeps at most k tables per (schema, chart shape); entries left without charts are dropped.
Corpus down_sample(const Corpus& corpus, std::size_t k = 10, std::uint64_t seed = 0);

struct SplitSpec {
    std::array<double, 3> ratios{7, 1, 2};  // train, valid, test
    std::uint64_t seed = 0;
};

struct CorpusSplits {
    Corpus train, valid, test;
};

/// Schema-level random allocation (largest remainder, every split non-empty).
CorpusSplits split(const Corpus& corpus, const SplitSpec& spec);

struct SynthSpec {
    std::size_t size = 5000;
    std::array<double, 6> mix{0.42, 0.25, 0.24, 0.07, 0.01, 0.01};  // kAllChartTypes order
    std::uint64_t seed = 1;
};

/// Rule-based tables with deterministic ground-truth charts, one archetype per chart type.
Corpus synth_corpus(const SynthSpec& spec);

/// Number of charts of each type (kAllChartTypes order).
std::array<std::size_t, 6> chart_type_counts(const Corpus& corpus);

/// Largest-remainder apportionment of `total` over non-negative weights.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights);

}  // namespace t2c
