#pragma once

// Request handling shared by the command line and the HTTP service, so both
// produce identical output for the same model, table and constraints.

#include "t2c/dqn_scorer.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace t2c {

struct RecommendQuery {
    std::vector<std::size_t> fields;  // required field set; empty means unconstrained
    std::vector<ChartType> types;     // allowed chart types; empty means the major types
    std::size_t top = 3;
    bool with_spec = true;            // attach the Vega-Lite export
    std::size_t beam_size = 4;
    std::size_t expand_limit = 100;
};

/// Throws UnknownField for an index outside the table, InvalidArgument for top == 0.
HardConstraints query_constraints(const RecommendQuery& query, const Table& table);

/// Reads {"fields":[int], "chartTypes":[string]} (both optional) into `query`.
void parse_constraints(const nlohmann::json& j, RecommendQuery& query);

/// {"recommendations":[{"sequence","score","vegalite"?}]}
nlohmann::json recommend_json(const Model& model, const Table& table, const RecommendQuery& query);

/// Encoder memory vector per field (forward and backward GRU states concatenated).
std::vector<std::vector<float>> field_embeddings(const Model& model, const Table& table);

/// {"tableId", "fields":[{"index","name","type"}]}
nlohmann::json table_summary_json(const std::string& table_id, const Table& table);

/// Body of a table upload: a table or corpus-entry JSON object, otherwise CSV text.
Table parse_table_body(const std::string& body, const std::string& table_id);

}  // namespace t2c
