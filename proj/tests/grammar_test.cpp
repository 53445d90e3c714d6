#include "support/grammar_oracle.hpp"
#include "t2c/error.hpp"
#include "t2c/grammar.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace t2c;

namespace {

Table typed_table(const std::vector<FieldType>& types) {
    std::vector<Field> fs;
    for (std::size_t i = 0; i < types.size(); ++i) {
        Field f;
        f.header = "f" + std::to_string(i);
        f.type = types[i];
        f.values = {Cell{1.0}};
        fs.push_back(f);
    }
    return Table::make("t", fs);
}

Table numeric_table(std::size_t n) { return typed_table(std::vector<FieldType>(n, FieldType::Decimal)); }

ChartSequence seq(std::initializer_list<ActionToken> xs) { return ChartSequence(xs); }

constexpr auto F = ActionToken::field;
const ActionToken SEP = ActionToken::sep();
const ActionToken CLUSTER = ActionToken::grp(GroupOp::Cluster);
const ActionToken STACK = ActionToken::grp(GroupOp::Stack);
ActionToken chart(ChartType t) { return ActionToken::chart(t); }

std::string key_of(const ChartSequence& s) {
    std::string k;
    for (ActionToken a : s) k.push_back(static_cast<char>(a.code()));
    return k;
}

}  // namespace

TEST(LegalActions, ScatterAllowsOneYField) {
    const Table t = numeric_table(3);
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Scatter), F(2)}), {}), seq({SEP}));
}

TEST(LegalActions, BarXSegmentEndsWithGroupingOrMoreFields) {
    const Table t = numeric_table(4);
    const auto got = legal_actions(t, seq({chart(ChartType::Bar), F(1), SEP, F(0)}), {});
    EXPECT_EQ(got, seq({CLUSTER, STACK, F(2), F(3)}));
}

TEST(LegalActions, PieAfterSeparatorMatchesEnumeration) {
    const Table t = numeric_table(3);
    const ChartSequence s = seq({chart(ChartType::Pie), F(1), SEP});
    const auto got = legal_actions(t, s, {});
    EXPECT_EQ(got, seq({SEP, F(0), F(2)}));

    // Brute force: the next tokens of every accepted sentence extending s.
    oracle::BruteConstraints bc;
    std::set<int> expected;
    for (const auto& sentence : oracle::accepted_sentences({false, false, false}, bc))
        if (sentence.size() > 3 && sentence[0] == 3 && sentence[1] == 10 && sentence[2] == 6)
            expected.insert(sentence[3]);
    std::set<int> actual;
    for (ActionToken a : got) actual.insert(static_cast<int>(a.code()));
    EXPECT_EQ(actual, expected);
}

TEST(LegalActions, StringFieldsNeverYWhenForbidden) {
    const Table t = typed_table({FieldType::String, FieldType::Decimal});
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Line)}), {}), seq({F(1)}));
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Line)}), HardConstraints::grammar_only()), seq({F(0), F(1)}));
}

TEST(LegalActions, RootOffersFeasibleChartTypes) {
    const Table one = numeric_table(1);
    // Scatter needs a second field for x.
    EXPECT_EQ(legal_actions(one, {}, {}),
              seq({chart(ChartType::Line), chart(ChartType::Bar), chart(ChartType::Pie), chart(ChartType::Area),
                   chart(ChartType::Radar)}));
    const Table strings = typed_table({FieldType::String, FieldType::String});
    EXPECT_TRUE(legal_actions(strings, {}, {}).empty());
}

TEST(LegalActions, IllegalStateThrows) {
    const Table t = numeric_table(3);
    try {
        legal_actions(t, seq({chart(ChartType::Scatter), F(0), F(1)}), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IllegalState);
    }
    EXPECT_THROW(legal_actions(t, seq({F(0)}), {}), Error);
    EXPECT_THROW(legal_actions(t, seq({chart(ChartType::Line), F(7)}), {}), Error);
}

TEST(LegalActions, RequiredFieldsAndAllowedTypes) {
    const Table t = typed_table({FieldType::String, FieldType::Decimal, FieldType::Decimal, FieldType::Decimal});
    HardConstraints c;
    c.required_fields = std::vector<std::size_t>{0, 1, 2};
    c.allowed_types = std::vector<ChartType>{ChartType::Bar};
    EXPECT_EQ(legal_actions(t, {}, c), seq({chart(ChartType::Bar)}));
    // The String field must land on x, so y takes one or both numerics.
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Bar)}), c), seq({F(1), F(2)}));
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Bar), F(1)}), c), seq({SEP, F(2)}));
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Bar), F(1), F(2), SEP}), c), seq({F(0)}));
    EXPECT_EQ(legal_actions(t, seq({chart(ChartType::Bar), F(1), F(2), SEP, F(0)}), c), seq({CLUSTER, STACK}));
    // Pie cannot use three fields with a single y and the String on x... it can: y=1, x={0,2}.
    c.allowed_types = std::vector<ChartType>{ChartType::Scatter};
    EXPECT_TRUE(legal_actions(t, {}, c).empty());
}

TEST(IsComplete, Examples) {
    EXPECT_TRUE(is_complete(seq({chart(ChartType::Bar), F(2), F(3), SEP, F(1), STACK})));
    EXPECT_FALSE(is_complete(seq({chart(ChartType::Line), F(1), SEP})));
    EXPECT_TRUE(is_complete(seq({chart(ChartType::Pie), F(1), SEP, SEP})));
    EXPECT_FALSE(is_complete({}));
}

TEST(ParseSequence, ExamplesAndErrors) {
    const Table t = numeric_table(3);
    const auto s = parse_sequence("[Bar] (1) (2) [SEP] (0) [Stack]", t);
    EXPECT_EQ(s, seq({chart(ChartType::Bar), F(1), F(2), SEP, F(0), STACK}));
    EXPECT_EQ(serialize_sequence(s), "[Bar] (1) (2) [SEP] (0) [Stack]");

    auto code_of = [&](std::string_view text) {
        try {
            parse_sequence(text, t);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    EXPECT_EQ(code_of("[Scatter] (0) (1) [SEP]"), ErrorCode::IllegalState);
    EXPECT_EQ(code_of(""), ErrorCode::ParseError);
    EXPECT_EQ(code_of("[Bar] (x) [SEP]"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("[Donut] (0)"), ErrorCode::ParseError);
    EXPECT_EQ(code_of("[Line] (5) [SEP] [SEP]"), ErrorCode::UnknownField);
}

TEST(Enumerate, SingleFieldPie) {
    const Table t = numeric_table(1);
    HardConstraints c;
    c.allowed_types = std::vector<ChartType>{ChartType::Pie};
    const auto all = enumerate_all_charts(t, c, default_max_len(c));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0], seq({chart(ChartType::Pie), F(0), SEP, SEP}));
}

TEST(Enumerate, StringAndDecimalScatter) {
    const Table t = typed_table({FieldType::String, FieldType::Decimal});
    HardConstraints c;
    c.allowed_types = std::vector<ChartType>{ChartType::Scatter};
    const auto all = enumerate_all_charts(t, c, default_max_len(c));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0], seq({chart(ChartType::Scatter), F(1), SEP, F(0), SEP}));
}

TEST(Enumerate, ThreeDecimalBarCountMatchesClosedFormAndBruteForce) {
    const Table t = numeric_table(3);
    HardConstraints c;
    c.allowed_types = std::vector<ChartType>{ChartType::Bar};
    const auto all = enumerate_all_charts(t, c, 8);
    // y: ordered non-empty selection of k fields; x: ordered selection of up to 2 of the
    // remaining 3-k; times 2 grouping ops.
    // k=1: 3 * (1 + 2 + 2) = 15; k=2: 6 * (1 + 1) = 12; k=3: 6 * 1 = 6. Total 33 * 2 = 66.
    EXPECT_EQ(all.size(), 66u);

    oracle::BruteConstraints bc;
    bc.types = std::set<int>{1};
    std::size_t brute = 0;
    for (const auto& s : oracle::accepted_sentences({false, false, false}, bc))
        if (s.size() <= 8) ++brute;
    EXPECT_EQ(brute, 66u);
}

TEST(Enumerate, LimitExceeded) {
    const Table t = numeric_table(4);
    try {
        enumerate_all_charts(t, {}, 13, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LimitExceeded);
    }
}

TEST(GrammarProperties, EnumeratedSequencesObeyTemplates) {
    const Table t = typed_table({FieldType::String, FieldType::Decimal, FieldType::Year, FieldType::Decimal});
    const HardConstraints c;
    for (const ChartSequence& s : enumerate_all_charts(t, c, default_max_len(c))) {
        const ChartParts p = decompose(s);
        ASSERT_TRUE(p.complete());
        if (p.type == ChartType::Scatter || p.type == ChartType::Pie) EXPECT_EQ(p.y.size(), 1u);
        if (p.type == ChartType::Bar) EXPECT_TRUE(s.back().is_grp());
        else EXPECT_TRUE(s.back().is_sep());
        for (std::size_t f : p.y) EXPECT_NE(t.field(f).type, FieldType::String);
        EXPECT_EQ(parse_sequence(serialize_sequence(s), t, c), s);
        for (std::size_t k = 0; k <= s.size(); ++k)
            EXPECT_TRUE(is_legal_prefix(t, std::span(s).first(k), c));
    }
}

TEST(GrammarProperties, MatchesBruteForceOnThreeFieldTablesWithConstraints) {
    // Every String mask over 3 fields, with and without user constraints.
    std::vector<oracle::BruteConstraints> variants(4);
    variants[1].required = std::set<int>{0, 2};
    variants[2].types = std::set<int>{1, 3};
    variants[3].forbid_string_y = true;
    variants[3].y_cap = 1;
    variants[3].x_cap = 1;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<bool> is_string(3);
        std::vector<FieldType> types(3);
        for (int i = 0; i < 3; ++i) {
            is_string[i] = (mask >> i) & 1;
            types[i] = is_string[i] ? FieldType::String : FieldType::DateTime;
        }
        const Table t = typed_table(types);
        for (const auto& bc : variants) {
            HardConstraints c;
            c.max_y.fill(static_cast<std::size_t>(bc.y_cap));
            c.max_x.fill(static_cast<std::size_t>(bc.x_cap));
            if (bc.required) c.required_fields = std::vector<std::size_t>(bc.required->begin(), bc.required->end());
            if (bc.types) {
                c.allowed_types.emplace();
                for (int ty : *bc.types) c.allowed_types->push_back(static_cast<ChartType>(ty));
            }
            const auto sentences = oracle::accepted_sentences(is_string, bc);
            const auto prefixes = oracle::prefix_closure(sentences);
            std::set<std::string> complete;
            for (const auto& s : sentences) complete.insert(std::string(s.begin(), s.end()));
            for (const std::string& p : prefixes) {
                ChartSequence s;
                for (char ch : p) s.push_back(ActionToken::from_code(static_cast<std::uint32_t>(ch)));
                ASSERT_TRUE(is_legal_prefix(t, s, c)) << serialize_sequence(s);
                EXPECT_EQ(is_complete(s), complete.count(p) == 1);
                std::set<std::string> expected;
                for (std::uint32_t code = 0; code < 12; ++code) {
                    std::string q = p;
                    q.push_back(static_cast<char>(code));
                    if (prefixes.count(q)) expected.insert(q);
                }
                std::set<std::string> actual;
                for (ActionToken a : legal_actions(t, s, c)) {
                    ChartSequence n = s;
                    n.push_back(a);
                    actual.insert(key_of(n));
                }
                EXPECT_EQ(actual, expected) << serialize_sequence(s) << " mask " << mask;
            }
            // No reachable-looking state outside the closure is accepted as a prefix.
            if (prefixes.empty()) EXPECT_TRUE(legal_actions(t, {}, c).empty());
        }
    }
}
