#include "t2c/error.hpp"
#include "t2c/table.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace t2c;

namespace {

std::vector<Cell> text_cells(std::initializer_list<const char*> xs) {
    std::vector<Cell> out;
    for (const char* x : xs) out.emplace_back(std::string(x));
    return out;
}

Field make_field(std::string header, FieldType type, std::vector<Cell> values) {
    Field f;
    f.header = std::move(header);
    f.type = type;
    f.values = std::move(values);
    return f;
}

}  // namespace

TEST(InferFieldType, TextbookCases) {
    EXPECT_EQ(infer_field_type(text_cells({"2019", "2020", "2021"})), FieldType::Year);
    EXPECT_EQ(infer_field_type(text_cells({"3.5", "7", "-1"})), FieldType::Decimal);
    EXPECT_EQ(infer_field_type(text_cells({"US", "Japan", "England"})), FieldType::String);
    EXPECT_EQ(infer_field_type(text_cells({"2020-01-01", "2020-02-01", "2020-03-01T10:00"})), FieldType::DateTime);
}

TEST(InferFieldType, EdgeCases) {
    EXPECT_EQ(infer_field_type({}), FieldType::Unknown);
    std::vector<Cell> missing(4, Cell{});
    EXPECT_EQ(infer_field_type(missing), FieldType::Unknown);
    // Half text, half numbers: neither rule reaches 90%.
    EXPECT_EQ(infer_field_type(text_cells({"1", "2", "a", "b"})), FieldType::Unknown);
    // Integers out of the year range stay Decimal.
    EXPECT_EQ(infer_field_type(text_cells({"1", "2", "3"})), FieldType::Decimal);
    EXPECT_EQ(infer_field_type(text_cells({"2019.5", "2020"})), FieldType::Decimal);
    // Missing cells do not count against the 90% rule.
    std::vector<Cell> holes = {Cell{1.0}, Cell{}, Cell{2.5}, Cell{}};
    EXPECT_EQ(infer_field_type(holes), FieldType::Decimal);
    // More than 200 distinct year-like integers is just a number column.
    std::vector<Cell> many;
    for (int y = 1000; y < 1300; ++y) many.emplace_back(static_cast<double>(y));
    EXPECT_EQ(infer_field_type(many), FieldType::Decimal);
}

TEST(InferFieldType, DeterministicOnRandomColumns) {
    std::mt19937 rng(7);
    const char* pool[] = {"1", "2.5", "x", "", "2020", "2020-05-01", "-3"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Cell> v;
        for (int i = 0; i < 6; ++i) {
            std::string s = pool[rng() % 7];
            v.push_back(s.empty() ? Cell{} : Cell{s});
        }
        EXPECT_EQ(infer_field_type(v), infer_field_type(v));
    }
}

TEST(Table, RejectsRaggedAndOversized) {
    std::vector<Field> ragged = {make_field("a", FieldType::Decimal, {Cell{1.0}}),
                                 make_field("b", FieldType::Decimal, {Cell{1.0}, Cell{2.0}})};
    EXPECT_THROW(Table::make("t", ragged), Error);
    EXPECT_THROW(Table::make("t", {}), Error);
    std::vector<Field> wide(3, make_field("a", FieldType::Decimal, {Cell{1.0}}));
    try {
        Table::make("t", wide, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooManyFields);
    }
    auto t = Table::make("t", wide);
    EXPECT_EQ(t.field(2).index, 2u);
    EXPECT_EQ(t.n_rows(), 1u);
}

TEST(SchemaKey, EqualityFollowsTypesAndHeadersByPosition) {
    auto a = Table::make("a", {make_field("Program", FieldType::String, {Cell{std::string("x")}}),
                               make_field("Total", FieldType::Decimal, {Cell{1.0}})});
    auto b = Table::make("b", {make_field("Program", FieldType::String, {Cell{std::string("y")}}),
                               make_field("Total", FieldType::Decimal, {Cell{9.0}})});
    auto c = Table::make("c", {make_field("Program", FieldType::String, {Cell{std::string("x")}}),
                               make_field("Total", FieldType::String, {Cell{std::string("1")}})});
    auto d = Table::make("d", {make_field("Total", FieldType::Decimal, {Cell{1.0}}),
                               make_field("Program", FieldType::String, {Cell{std::string("x")}})});
    EXPECT_EQ(schema_key(a), schema_key(b));
    EXPECT_FALSE(schema_key(a) == schema_key(c));
    EXPECT_FALSE(schema_key(a) == schema_key(d));
}

TEST(SchemaKey, ExhaustiveOverSmallTables) {
    // Every table with 1-2 fields drawn from 3 types x 3 headers: key equality iff schema equality.
    const FieldType types[] = {FieldType::String, FieldType::Decimal, FieldType::Year};
    const char* headers[] = {"", "a", "a b"};
    struct Spec {
        std::vector<std::pair<int, int>> cols;
    };
    std::vector<Spec> specs;
    for (int n = 1; n <= 2; ++n) {
        const int combos = n == 1 ? 9 : 81;
        for (int k = 0; k < combos; ++k) {
            Spec s;
            int x = k;
            for (int i = 0; i < n; ++i) {
                s.cols.push_back({x % 3, (x / 3) % 3});
                x /= 9;
            }
            specs.push_back(s);
        }
    }
    auto build = [&](const Spec& s) {
        std::vector<Field> fs;
        for (auto [t, h] : s.cols) fs.push_back(make_field(headers[h], types[t], {Cell{}}));
        return Table::make("t", fs);
    };
    for (const Spec& s1 : specs)
        for (const Spec& s2 : specs)
            EXPECT_EQ(schema_key(build(s1)) == schema_key(build(s2)), s1.cols == s2.cols);
}

TEST(Csv, ReadsHeadersTypesAndRoles) {
    std::istringstream in("Program,Total Male Students,\"Total, Female\"\nArts,10,12\nLaw,,7\n\"Sci \"\"A\"\"\",3,4\n");
    Table t = read_csv(in, "students");
    ASSERT_EQ(t.n_fields(), 3u);
    EXPECT_EQ(t.n_rows(), 3u);
    EXPECT_EQ(t.field(2).header, "Total, Female");
    EXPECT_EQ(t.field(0).type, FieldType::String);
    EXPECT_EQ(t.field(1).type, FieldType::Decimal);
    EXPECT_EQ(t.field(0).role, FieldRole::Header);
    EXPECT_EQ(t.field(1).role, FieldRole::Value);
    EXPECT_TRUE(is_missing(t.field(1).values[1]));
    EXPECT_EQ(std::get<std::string>(t.field(0).values[2]), "Sci \"A\"");
}

TEST(Csv, Errors) {
    std::istringstream empty("");
    EXPECT_THROW(read_csv(empty, "x"), Error);
    std::istringstream wide("a,b\n1,2,3\n");
    EXPECT_THROW(read_csv(wide, "x"), Error);
}
