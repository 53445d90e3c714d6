#include "t2c/corpus.hpp"
#include "t2c/error.hpp"
#include "t2c/features.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace t2c;

namespace {

TablePtr table(std::string header, std::vector<double> xs, std::string id = "t") {
    Field cat;
    cat.header = "Region";
    cat.type = FieldType::String;
    for (std::size_t i = 0; i < xs.size(); ++i) cat.values.emplace_back("r" + std::to_string(i));
    Field v;
    v.header = std::move(header);
    v.type = FieldType::Decimal;
    for (double x : xs) v.values.emplace_back(x);
    return std::make_shared<const Table>(Table::make(std::move(id), {cat, v}));
}

ChartSequence chart(const TablePtr& t, const char* text) { return parse_sequence(text, *t); }

std::set<std::string> schema_set(const Corpus& c) {
    std::set<std::string> s;
    for (const auto& e : c) s.insert(schema_key(*e.table).canonical());
    return s;
}

Corpus ten_schemas() {
    Corpus c;
    for (int s = 0; s < 10; ++s)
        for (int k = 0; k <= s % 3; ++k) {
            auto t = table("m" + std::to_string(s), {double(k), double(k + 1)});
            c.push_back({t, {chart(t, "[Bar] (1) [SEP] (0) [Cluster]")}});
        }
    return c;
}

}  // namespace

TEST(Dedup, MergesIdenticalTablesAndUnionsCharts) {
    const auto a = table("Sales", {1, 2});
    const auto b = table("Sales", {1, 2}, "other id");
    const auto c = table("Sales", {3, 4});
    const auto bar = chart(a, "[Bar] (1) [SEP] (0) [Cluster]");
    const auto pie = chart(a, "[Pie] (1) [SEP] (0) [SEP]");
    const Corpus in = {{a, {bar}}, {b, {bar}}, {c, {bar}}, {b, {pie}}};
    const Corpus out = dedup(in);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].charts, (std::vector<ChartSequence>{bar, pie}));
    EXPECT_EQ(out[1].table, c);
    EXPECT_EQ(schema_key(*out[0].table), schema_key(*out[1].table));

    const Corpus again = dedup(out);
    ASSERT_EQ(again.size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(again[i].table, out[i].table);
        EXPECT_EQ(again[i].charts, out[i].charts);
    }
}

TEST(DownSample, CapsEachSchemaShapeKey) {
    Corpus c;
    for (int i = 0; i < 15; ++i) {
        auto t = table("Sales", {double(i), double(i + 1)});
        c.push_back({t, {chart(t, "[Bar] (1) [SEP] (0) [Cluster]")}});
    }
    for (int i = 0; i < 3; ++i) {
        auto t = table("Cost", {double(i), 2.0});
        c.push_back({t, {chart(t, "[Bar] (1) [SEP] (0) [Cluster]")}});
    }
    const Corpus a = down_sample(c, 10, 5);
    EXPECT_EQ(a.size(), 13u);
    std::size_t sales = 0;
    for (const auto& e : a) sales += e.table->field(1).header == "Sales";
    EXPECT_EQ(sales, 10u);
    const Corpus b = down_sample(c, 10, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].table, b[i].table);
    EXPECT_THROW(down_sample(c, 0, 5), Error);
}

TEST(DownSample, ShapeKeysByTypeMultisetAndTerminator) {
    const auto t = table("Sales", {1, 2});
    EXPECT_EQ(chart_shape(*t, chart(t, "[Bar] (1) [SEP] (0) [Stack]")), "Bar|y:Decimal,|x:String,|[Stack]");
    EXPECT_NE(chart_shape(*t, chart(t, "[Bar] (1) [SEP] (0) [Stack]")),
              chart_shape(*t, chart(t, "[Bar] (1) [SEP] (0) [Cluster]")));
}

TEST(Split, SchemaPartitionWithRatios) {
    const Corpus c = ten_schemas();
    const auto s = split(c, {{7, 1, 2}, 3});
    EXPECT_EQ(schema_set(s.train).size(), 7u);
    EXPECT_EQ(schema_set(s.valid).size(), 1u);
    EXPECT_EQ(schema_set(s.test).size(), 2u);
    EXPECT_EQ(s.train.size() + s.valid.size() + s.test.size(), c.size());
    std::set<std::string> all;
    for (const auto* part : {&s.train, &s.valid, &s.test})
        for (const auto& k : schema_set(*part)) EXPECT_TRUE(all.insert(k).second);
    const auto again = split(c, {{7, 1, 2}, 3});
    EXPECT_EQ(schema_set(again.test), schema_set(s.test));
}

TEST(Split, SmallCorpusKeepsEverySplitNonEmpty) {
    Corpus c = ten_schemas();
    c.resize(4);  // schemas m0, m1, m1, m2
    const auto s = split(c, {});
    EXPECT_FALSE(s.train.empty());
    EXPECT_FALSE(s.valid.empty());
    EXPECT_FALSE(s.test.empty());
    c.resize(3);
    try {
        split(c, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewSchemas);
    }
}

TEST(Apportion, LargestRemainder) {
    const std::vector<double> w = {0.42, 0.25, 0.24, 0.07, 0.01, 0.01};
    EXPECT_EQ(apportion(100, w), (std::vector<std::size_t>{42, 25, 24, 7, 1, 1}));
    EXPECT_EQ(apportion(3, std::vector<double>{7, 1, 2}), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Json, RoundTripAndErrors) {
    const auto t = table("Sales", {1.5, 2});
    const CorpusEntry e{t, {chart(t, "[Bar] (1) [SEP] (0) [Stack]")}};
    std::stringstream ss;
    write_corpus(ss, {e, e});
    const Corpus back = read_corpus(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_TRUE(back[0].table->same_values(*t));
    EXPECT_EQ(schema_key(*back[0].table), schema_key(*t));
    EXPECT_EQ(back[0].charts, e.charts);

    std::stringstream bad("\n{\"fields\":[{\"name\":\"a\",\"values\":[1,2]}],\"charts\":[\"[Line] (0) [SEP]\"]}\n");
    try {
        read_corpus(bad);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::IllegalState);
        EXPECT_NE(std::string(err.what()).find("line 2"), std::string::npos);
    }
    std::stringstream junk("{not json");
    EXPECT_THROW(read_corpus(junk), Error);

    // Types are inferred when absent.
    const Table inferred = table_from_json(nlohmann::json::parse(
        R"({"tableId":"x","fields":[{"name":"Year","values":[2001,2002]},{"name":"City","values":["a","b"]}]})"));
    EXPECT_EQ(inferred.field(0).type, FieldType::Year);
    EXPECT_EQ(inferred.field(1).type, FieldType::String);
}

TEST(Synth, MixLegalityAndDeterminism) {
    const Corpus c = synth_corpus({});
    ASSERT_EQ(c.size(), 5000u);
    const auto counts = chart_type_counts(c);
    const std::array<double, 6> mix{0.42, 0.25, 0.24, 0.07, 0.01, 0.01};
    for (std::size_t t = 0; t < 6; ++t) EXPECT_NEAR(counts[t] / 5000.0, mix[t], 0.02);
    for (const auto& e : c)
        for (const auto& s : e.charts) {
            ASSERT_TRUE(is_complete(s));
            ASSERT_TRUE(is_legal_prefix(*e.table, s, {}));
        }
    const Corpus d = synth_corpus({});
    for (std::size_t i = 0; i < c.size(); i += 97) {
        EXPECT_TRUE(c[i].table->same_values(*d[i].table));
        EXPECT_EQ(c[i].charts, d[i].charts);
    }
    EXPECT_GT(schema_set(c).size(), 1000u);
}

TEST(Synth, ArchetypeRules) {
    SynthSpec spec;
    spec.size = 400;
    const Corpus c = synth_corpus(spec);
    for (const auto& e : c) {
        const ChartParts p = decompose(e.charts.at(0));
        const Table& t = *e.table;
        switch (*p.type) {
            case ChartType::Line:
            case ChartType::Area: {
                ASSERT_EQ(p.x.size(), 1u);
                const FieldType xt = t.field(p.x[0]).type;
                EXPECT_TRUE(xt == FieldType::Year || xt == FieldType::DateTime);
                EXPECT_TRUE(std::is_sorted(p.y.begin(), p.y.end()));
                break;
            }
            case ChartType::Pie: {
                const auto d = raw_data_features(t.field(p.y[0]), t.n_rows());
                EXPECT_EQ(d[static_cast<std::size_t>(DataFeature::SumIsIn01)], 1.0);
                EXPECT_EQ(t.field(p.x[0]).type, FieldType::String);
                break;
            }
            case ChartType::Bar:
                EXPECT_EQ(t.field(p.x[0]).type, FieldType::String);
                break;
            default:
                break;
        }
    }
}
