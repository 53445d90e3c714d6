#pragma once

#include "t2c/grammar.hpp"

#include "json.hpp"

namespace t2c {

inline constexpr std::string_view kVegaLiteSchemaUrl = "https://vega.github.io/schema/vega-lite/v5.json";

/// Vega-Lite document for a complete chart with the table's rows inlined.
/// Columns are keyed f0, f1, ... (headers become axis titles); several y fields are folded
/// into (series, value). Radar has no native mark and falls back to a line over the folded attributes.
/// Throws IllegalState for incomplete sequences and UnknownField for out-of-range indices.
nlohmann::json export_vegalite(const Table& table, std::span<const ActionToken> chart);

}  // namespace t2c
