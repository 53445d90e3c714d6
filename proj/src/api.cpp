#include "t2c/api.hpp"

#include "t2c/corpus.hpp"
#include "t2c/error.hpp"
#include "t2c/vegalite.hpp"

#include <algorithm>
#include <sstream>

namespace t2c {

using nlohmann::json;

HardConstraints query_constraints(const RecommendQuery& query, const Table& table) {
    if (query.top == 0) throw Error(ErrorCode::InvalidArgument, "top must be >= 1");
    HardConstraints c;
    if (!query.fields.empty()) {
        std::vector<std::size_t> f = query.fields;
        for (std::size_t i : f)
            if (i >= table.n_fields())
                throw Error(ErrorCode::UnknownField, "field index " + std::to_string(i) + " out of range (table has " +
                                                         std::to_string(table.n_fields()) + " fields)");
        std::sort(f.begin(), f.end());
        f.erase(std::unique(f.begin(), f.end()), f.end());
        c.required_fields = std::move(f);
    }
    if (!query.types.empty()) c.allowed_types = query.types;
    return c;
}

void parse_constraints(const json& j, RecommendQuery& query) {
    if (j.is_null()) return;
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "constraints must be an object");
    if (const auto f = j.find("fields"); f != j.end() && !f->is_null()) {
        if (!f->is_array()) throw Error(ErrorCode::InvalidArgument, "constraints.fields must be an array");
        for (const json& v : *f) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw Error(ErrorCode::InvalidArgument, "constraints.fields must hold non-negative integers");
            query.fields.push_back(v.get<std::size_t>());
        }
    }
    if (const auto t = j.find("chartTypes"); t != j.end() && !t->is_null()) {
        if (!t->is_array()) throw Error(ErrorCode::InvalidArgument, "constraints.chartTypes must be an array");
        for (const json& v : *t) {
            const auto parsed = v.is_string() ? parse_chart_type(v.get<std::string>()) : std::nullopt;
            if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown chart type " + v.dump());
            query.types.push_back(*parsed);
        }
    }
}

json recommend_json(const Model& model, const Table& table, const RecommendQuery& query) {
    const HardConstraints c = query_constraints(query, table);
    const DqnScorer scorer(ModelPtr(ModelPtr(), &model));
    const RecommendationList list = recommend(scorer, table, c, query.beam_size, query.expand_limit);
    json recs = json::array();
    for (std::size_t i = 0; i < list.entries.size() && i < query.top; ++i) {
        const ScoredState& e = list.entries[i];
        json r = {{"sequence", serialize_sequence(e.state)}, {"score", e.score}};
        if (query.with_spec) r["vegalite"] = export_vegalite(table, e.state);
        recs.push_back(std::move(r));
    }
    return {{"recommendations", recs}};
}

std::vector<std::vector<float>> field_embeddings(const Model& model, const Table& table) {
    const TableFeatures tf = model.features().table_features(table);
    nn::Tape<float> tape(model.params());
    const auto enc = model.encode(tape, table, tf);
    std::vector<std::vector<float>> out;
    out.reserve(enc.memory.size());
    for (nn::Var h : enc.memory) {
        const auto v = tape.value(h);
        out.emplace_back(v.begin(), v.end());
    }
    return out;
}

json table_summary_json(const std::string& table_id, const Table& table) {
    json fields = json::array();
    for (const Field& f : table.fields())
        fields.push_back({{"index", f.index}, {"name", f.header}, {"type", std::string(to_string(f.type))}});
    return {{"tableId", table_id}, {"fields", fields}};
}

Table parse_table_body(const std::string& body, const std::string& table_id) {
    const auto first = body.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw Error(ErrorCode::ParseError, "empty table body");
    if (body[first] == '{') {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
        }
        if (j.contains("table")) j = j.at("table");
        j["tableId"] = table_id;
        return table_from_json(j);
    }
    std::istringstream in(body);
    return read_csv(in, table_id);
}

}  // namespace t2c
