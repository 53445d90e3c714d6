#include "support/bellman_oracle.hpp"
#include "t2c/error.hpp"
#include "t2c/mdp.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace t2c;

namespace {

TablePtr numeric_table(std::size_t n) {
    std::vector<Field> fs;
    for (std::size_t i = 0; i < n; ++i) {
        Field f;
        f.header = "f" + std::to_string(i);
        f.type = i == 0 ? FieldType::String : FieldType::Decimal;
        f.values = {Cell{1.0}};
        fs.push_back(f);
    }
    return std::make_shared<const Table>(Table::make("t", fs));
}

}  // namespace

TEST(TargetSet, PrefixClosureAndMembership) {
    const TablePtr t = numeric_table(3);
    const auto a = parse_sequence("[Bar] (1) [SEP] (0) [Stack]", *t);
    const auto b = parse_sequence("[Bar] (1) (2) [SEP] (0) [Cluster]", *t);
    const TargetSet ts(t, {a, b});
    // root, [Bar], [Bar](1), then two branches of 3 and 4 more nodes.
    EXPECT_EQ(ts.prefix_count(), 3u + 3u + 4u);
    EXPECT_EQ(ts.prefixes().size(), ts.prefix_count());
    EXPECT_TRUE(ts.contains_prefix({}));
    EXPECT_TRUE(ts.is_target(a));
    EXPECT_FALSE(ts.is_target(std::span(a).first(3)));
    const ChartSequence bar1(a.begin(), a.begin() + 2);
    EXPECT_EQ(ts.continuations(bar1), (std::vector{ActionToken::sep(), ActionToken::field(2)}));
    EXPECT_TRUE(ts.continuations(parse_sequence("[Line]", *t)).empty());
}

TEST(TargetSet, RejectsIncompleteTargets) {
    const TablePtr t = numeric_table(2);
    EXPECT_THROW(TargetSet(t, {parse_sequence("[Line] (1) [SEP]", *t)}), Error);
}

TEST(QStar, IllegalActionThrows) {
    const TablePtr t = numeric_table(3);
    const TargetSet ts(t, {parse_sequence("[Scatter] (1) [SEP] (2) [SEP]", *t)});
    const auto s = parse_sequence("[Scatter] (1)", *t);
    try {
        q_star(ts, s, ActionToken::field(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IllegalAction);
    }
    EXPECT_THROW(reward(ts, s, ActionToken::field(2)), Error);
    EXPECT_EQ(q_star(ts, s, ActionToken::sep()), 1);
    EXPECT_EQ(reward(ts, s, ActionToken::sep()), 0);
}

TEST(QStar, MatchesBellmanRecursionOverTheWholeMdp) {
    const TablePtr t = numeric_table(3);
    const std::vector<ChartSequence> goals = {
        parse_sequence("[Bar] (1) [SEP] (0) [Stack]", *t),
        parse_sequence("[Line] (1) (2) [SEP] (0) [SEP]", *t),
        parse_sequence("[Pie] (2) [SEP] [SEP]", *t),
    };
    const TargetSet ts(t, goals);
    oracle::BellmanOracle oracle{*t, std::set<ChartSequence>(goals.begin(), goals.end()), {}};

    std::vector<ChartSequence> frontier{{}};
    std::size_t checked = 0;
    while (!frontier.empty()) {
        const ChartSequence s = frontier.back();
        frontier.pop_back();
        const auto actions = legal_actions(*t, s, {});
        const auto labels = q_star_labels(ts, s, actions);
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const int expected = oracle.q(s, actions[i]);
            ASSERT_EQ(q_star(ts, s, actions[i]), expected) << serialize_sequence(s) << " + " << to_string(actions[i]);
            ASSERT_EQ(labels[i], static_cast<float>(expected));
            ChartSequence n = s;
            n.push_back(actions[i]);
            ASSERT_EQ(reward(ts, s, actions[i]), oracle.goals.count(n) ? 1 : 0);
            if (!is_complete(n)) frontier.push_back(n);
            ++checked;
        }
    }
    EXPECT_GT(checked, 100u);
}
