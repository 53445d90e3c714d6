#include "t2c/error.hpp"
#include "t2c/vegalite.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace t2c;
using nlohmann::json;

namespace {

Field field(std::string header, FieldType type, std::vector<Cell> values) {
    Field f;
    f.header = std::move(header);
    f.type = type;
    f.values = std::move(values);
    return f;
}

Table students() {
    return Table::make("students", {field("Program", FieldType::String, {Cell{"Arts"}, Cell{"Law"}, Cell{"Math"}}),
                                    field("Total Male Students", FieldType::Decimal, {Cell{120.0}, Cell{80.0}, Cell{95.0}}),
                                    field("Total Female Students", FieldType::Decimal, {Cell{140.0}, Cell{90.0}, Cell{70.0}}),
                                    field("Year", FieldType::Year, {Cell{2019.0}, Cell{2020.0}, Cell{2021.0}})});
}

// Every column name a spec reads, through encodings or transforms.
std::set<std::string> referenced_columns(const json& spec) {
    std::set<std::string> out;
    for (const auto& [channel, def] : spec.at("encoding").items()) out.insert(def.at("field").get<std::string>());
    if (spec.contains("transform"))
        for (const json& t : spec.at("transform"))
            if (t.contains("fold"))
                for (const json& c : t.at("fold")) out.insert(c.get<std::string>());
    return out;
}

}  // namespace

TEST(VegaLite, StackAndClusterEncodings) {
    const Table t = students();
    const json stack = export_vegalite(t, parse_sequence("[Bar] (1) (2) [SEP] (0) [Stack]", t));
    EXPECT_EQ(stack.at("mark").at("type"), "bar");
    EXPECT_EQ(stack.at("encoding").at("y").at("stack"), "zero");
    EXPECT_EQ(stack.at("encoding").at("color").at("field"), "series");
    EXPECT_FALSE(stack.at("encoding").contains("xOffset"));
    EXPECT_EQ(stack.at("encoding").at("x").at("title"), "Program");

    const json cluster = export_vegalite(t, parse_sequence("[Bar] (1) (2) [SEP] (0) [Cluster]", t));
    EXPECT_TRUE(cluster.at("encoding").at("y").at("stack").is_null());
    EXPECT_EQ(cluster.at("encoding").at("xOffset").at("field"), "series");

    const auto& values = stack.at("data").at("values");
    ASSERT_EQ(values.size(), 3u);
    EXPECT_EQ(values[1].at("f0"), "Law");
    EXPECT_EQ(values[2].at("f2"), 70.0);
}

TEST(VegaLite, MarksPerChartType) {
    const Table t = students();
    EXPECT_EQ(export_vegalite(t, parse_sequence("[Line] (1) [SEP] (3) [SEP]", t)).at("mark").at("type"), "line");
    EXPECT_EQ(export_vegalite(t, parse_sequence("[Scatter] (2) [SEP] (1) [SEP]", t)).at("mark").at("type"), "point");
    EXPECT_EQ(export_vegalite(t, parse_sequence("[Area] (1) (2) [SEP] (3) [SEP]", t)).at("mark").at("type"), "area");

    const json pie = export_vegalite(t, parse_sequence("[Pie] (1) [SEP] (0) [SEP]", t));
    EXPECT_EQ(pie.at("mark").at("type"), "arc");
    EXPECT_EQ(pie.at("encoding").at("theta").at("field"), "f1");
    EXPECT_EQ(pie.at("encoding").at("color").at("field"), "f0");

    const json radar = export_vegalite(t, parse_sequence("[Radar] (1) (2) [SEP] (0) [SEP]", t));
    EXPECT_EQ(radar.at("mark").at("type"), "line");
    EXPECT_EQ(radar.at("encoding").at("x").at("field"), "series");
    EXPECT_EQ(radar.at("usermeta").at("fallback"), "radar-as-line");
}

TEST(VegaLite, ReferencesOnlyTableColumns) {
    const Table t = students();
    std::set<std::string> allowed = {"_row", "_x", "series", "value"};
    for (const Field& f : t.fields()) allowed.insert("f" + std::to_string(f.index));
    std::size_t checked = 0;
    for (const ChartSequence& c : enumerate_all_charts(t, {}, default_max_len({}))) {
        const json spec = export_vegalite(t, c);
        for (const std::string& col : referenced_columns(spec)) EXPECT_TRUE(allowed.contains(col)) << col;
        const json parsed = json::parse(spec.dump());
        EXPECT_EQ(parsed, spec);
        ++checked;
    }
    EXPECT_GT(checked, 100u);
}

TEST(VegaLite, Errors) {
    const Table t = students();
    EXPECT_THROW(export_vegalite(t, parse_sequence("[Bar] (1) [SEP] (0)", t)), Error);
    const Table small = Table::make("s", {field("a", FieldType::Decimal, {Cell{1.0}})});
    try {
        export_vegalite(small, parse_sequence("[Bar] (1) [SEP] (0) [Stack]", t));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownField);
    }
}
