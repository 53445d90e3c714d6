#include "t2c/vegalite.hpp"

#include "t2c/error.hpp"

namespace t2c {

using nlohmann::json;

namespace {

std::string column(std::size_t i) { return "f" + std::to_string(i); }

const char* measure_type(const Field& f) {
    switch (f.type) {
        case FieldType::Decimal: return "quantitative";
        case FieldType::Year: return "ordinal";
        case FieldType::DateTime: return "temporal";
        default: return "nominal";
    }
}

json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return nullptr;
}

json rows(const Table& table) {
    json out = json::array();
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        json row = {{"_row", r}};
        for (const Field& f : table.fields()) row[column(f.index)] = cell_json(f.values[r]);
        out.push_back(std::move(row));
    }
    return out;
}

const char* mark_of(ChartType t) {
    switch (t) {
        case ChartType::Line: return "line";
        case ChartType::Bar: return "bar";
        case ChartType::Scatter: return "point";
        case ChartType::Pie: return "arc";
        case ChartType::Area: return "area";
        case ChartType::Radar: return "line";
    }
    return "line";
}

}  // namespace

json export_vegalite(const Table& table, std::span<const ActionToken> chart) {
    const ChartParts parts = decompose(chart);
    if (!parts.complete()) throw Error(ErrorCode::IllegalState, "cannot export an incomplete chart");
    for (std::size_t i : parts.field_set())
        if (i >= table.n_fields()) throw Error(ErrorCode::UnknownField, "field " + std::to_string(i) + " not in table");
    const ChartType type = *parts.type;

    json spec = {{"$schema", kVegaLiteSchemaUrl},
                 {"description", pretty_sequence(chart, table)},
                 {"data", {{"values", rows(table)}}},
                 {"mark", {{"type", mark_of(type)}, {"tooltip", true}}}};
    json transform = json::array();
    json enc = json::object();

    // x: none -> row order, one field -> itself, two -> joined label
    json x;
    if (parts.x.empty()) {
        x = {{"field", "_row"}, {"type", "ordinal"}, {"title", "Row"}};
    } else if (parts.x.size() == 1) {
        const Field& f = table.field(parts.x[0]);
        x = {{"field", column(f.index)}, {"type", measure_type(f)}, {"title", f.header}};
    } else {
        std::string expr, title;
        for (std::size_t k = 0; k < parts.x.size(); ++k) {
            const Field& f = table.field(parts.x[k]);
            expr += (k ? " + ' / ' + " : "") + std::string("datum.") + column(f.index);
            title += (k ? " / " : "") + f.header;
        }
        transform.push_back({{"calculate", expr}, {"as", "_x"}});
        x = {{"field", "_x"}, {"type", "nominal"}, {"title", title}};
    }

    const bool folded = parts.y.size() > 1 || type == ChartType::Radar;
    json y;
    if (folded) {
        json cols = json::array();
        for (std::size_t i : parts.y) cols.push_back(column(i));
        transform.push_back({{"fold", cols}, {"as", {"_series_key", "value"}}});
        // fold keys are column ids; map them back to headers for legends
        std::string expr;
        for (std::size_t i : parts.y)
            expr += "datum._series_key === '" + column(i) + "' ? " + json(table.field(i).header).dump() + " : ";
        transform.push_back({{"calculate", expr + "datum._series_key"}, {"as", "series"}});
        y = {{"field", "value"}, {"type", "quantitative"}, {"title", "value"}};
    } else {
        const Field& f = table.field(parts.y[0]);
        y = {{"field", column(f.index)}, {"type", "quantitative"}, {"title", f.header}};
    }

    switch (type) {
        case ChartType::Line:
        case ChartType::Area:
            enc["x"] = x;
            enc["y"] = y;
            if (folded) enc["color"] = {{"field", "series"}, {"type", "nominal"}};
            if (type == ChartType::Area) enc["y"]["stack"] = "zero";
            break;
        case ChartType::Bar: {
            if (x.value("type", "") == "quantitative") x["type"] = "ordinal";
            enc["x"] = x;
            enc["y"] = y;
            if (folded) enc["color"] = {{"field", "series"}, {"type", "nominal"}};
            const bool stack = parts.terminator->code() == ActionToken::kStackCode;
            if (stack) {
                enc["y"]["stack"] = "zero";
            } else {
                enc["y"]["stack"] = nullptr;
                if (folded) enc["xOffset"] = {{"field", "series"}, {"type", "nominal"}};
            }
            break;
        }
        case ChartType::Scatter:
            enc["x"] = x;
            enc["y"] = y;
            break;
        case ChartType::Pie:
            enc["theta"] = y;
            enc["theta"]["stack"] = true;
            x.erase("title");
            if (x.value("type", "") == "quantitative") x["type"] = "nominal";
            enc["color"] = x;
            break;
        case ChartType::Radar:
            enc["x"] = {{"field", "series"}, {"type", "nominal"}, {"title", "attribute"}, {"sort", nullptr}};
            enc["y"] = y;
            enc["detail"] = x;
            if (!parts.x.empty()) enc["color"] = x;
            spec["usermeta"] = {{"fallback", "radar-as-line"}};
            break;
    }
    if (!transform.empty()) spec["transform"] = transform;
    spec["encoding"] = enc;
    return spec;
}

}  // namespace t2c
