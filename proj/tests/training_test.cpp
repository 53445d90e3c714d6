#include "t2c/error.hpp"
#include "t2c/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace t2c;

namespace {

Field field(std::string header, FieldType type, std::vector<Cell> values) {
    Field f;
    f.header = std::move(header);
    f.type = type;
    f.values = std::move(values);
    return f;
}

TablePtr students() {
    return std::make_shared<const Table>(
        Table::make("students", {field("Program", FieldType::String, {Cell{"Arts"}, Cell{"Law"}}),
                                 field("Male", FieldType::Decimal, {Cell{1.0}, Cell{2.0}}),
                                 field("Female", FieldType::Decimal, {Cell{3.0}, Cell{5.0}}),
                                 field("Year", FieldType::Year, {Cell{2020.0}, Cell{2021.0}})}));
}

CorpusEntry entry(const TablePtr& t, std::initializer_list<const char*> charts) {
    CorpusEntry e{t, {}};
    for (const char* c : charts) e.charts.push_back(parse_sequence(c, *t));
    return e;
}

FeatureExtractor fitted(const Corpus& c) {
    std::vector<TablePtr> tables;
    for (const auto& e : c) tables.push_back(e.table);
    return {SemanticEmbedder::hashed(50), fit_feature_norms(tables)};
}

struct SmallRun {
    CorpusSplits splits;
    FeatureExtractor fx;
};

SmallRun small_corpus() {
    SynthSpec spec;
    spec.size = 160;
    spec.seed = 4;
    CorpusSplits s = split(dedup(synth_corpus(spec)), {{7, 1, 2}, 4});
    FeatureExtractor fx = fitted(s.train);
    return {std::move(s), std::move(fx)};
}

// Brute-force q*: a is positive iff s·a is a prefix of some target.
std::set<ActionToken> positive_actions(const std::vector<ChartSequence>& targets, const ChartSequence& s) {
    std::set<ActionToken> out;
    for (const ChartSequence& t : targets)
        if (t.size() > s.size() && std::equal(s.begin(), s.end(), t.begin())) out.insert(t[s.size()]);
    return out;
}

}  // namespace

TEST(LabeledSteps, PrefixCountsPerRegime) {
    const auto t = students();
    const Corpus c = {entry(t, {"[Bar] (1) (2) [SEP] (0) [Stack]"})};
    EXPECT_EQ(make_labeled_steps(c, Regime::separate(ChartType::Bar)).size(), 5u);
    const auto mixed = make_labeled_steps(c, Regime::mixed());
    ASSERT_EQ(mixed.size(), 6u);
    EXPECT_TRUE(mixed.front().state.empty());
    for (const auto& s : mixed) EXPECT_FALSE(is_complete(s.state));
}

TEST(LabeledSteps, SharedPrefixUnionsLabels) {
    const auto t = students();
    const Corpus c = {entry(t, {"[Bar] (2) [SEP] (0) [Cluster]", "[Bar] (2) (1) [SEP] (0) [Stack]"})};
    const auto steps = make_labeled_steps(c, Regime::separate(ChartType::Bar));
    const ChartSequence shared = parse_sequence("[Bar] (2)", *t);
    bool found = false;
    for (const auto& s : steps) {
        if (s.state != shared) continue;
        found = true;
        std::size_t ones = 0;
        for (float l : s.labels) ones += l == 1.0f;
        EXPECT_EQ(ones, 2u);
    }
    EXPECT_TRUE(found);
}

TEST(LabeledSteps, LabelsMatchBruteForcePrefixes) {
    const auto [splits, fx] = small_corpus();
    for (const Regime regime : {Regime::mixed(), Regime::separate(ChartType::Line)}) {
        const auto steps = make_labeled_steps(splits.train, regime);
        ASSERT_FALSE(steps.empty());
        std::map<const Table*, std::vector<ChartSequence>> targets;
        for (const auto& e : splits.train)
            for (const auto& c : e.charts) {
                const auto types = regime.types();
                if (std::find(types.begin(), types.end(), c.front().chart_type()) != types.end())
                    targets[e.table.get()].push_back(c);
            }
        for (const auto& s : steps) {
            if (regime.single_type()) EXPECT_EQ(s.state.front().chart_type(), regime.type);
            ASSERT_EQ(s.actions, legal_actions(*s.table, s.state, {}));
            const auto pos = positive_actions(targets.at(s.table.get()), s.state);
            for (std::size_t i = 0; i < s.actions.size(); ++i)
                EXPECT_EQ(s.labels[i] == 1.0f, pos.contains(s.actions[i]));
            EXPECT_FALSE(pos.empty());
        }
    }
}

TEST(LabeledSteps, MixedDropsMinorTypes) {
    const auto t = students();
    const Corpus c = {entry(t, {"[Area] (1) [SEP] (3) [SEP]", "[Radar] (1) (2) [SEP] (0) [SEP]"})};
    try {
        make_labeled_steps(c, Regime::mixed());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySplit);
    }
    EXPECT_EQ(make_labeled_steps(c, Regime::separate(ChartType::Area)).size(), 4u);
    EXPECT_THROW(make_labeled_steps({}, Regime::mixed()), Error);
}

TEST(Loss, KnownValuesAndFiniteDifference) {
    const std::vector<double> half = {0.5, 0.5, 0.5};
    const std::vector<double> labels = {1, 0, 1};
    EXPECT_NEAR(bce_loss(half, labels), std::log(2.0), 1e-12);
    EXPECT_LT(bce_loss(labels, labels), 1e-6);
    EXPECT_THROW(bce_loss(half, std::vector<double>{1, 0}), Error);

    // d/dp of -[y log p + (1-y) log(1-p)] / n at p = 0.3, y = 1
    std::vector<double> p = {0.3, 0.6};
    const std::vector<double> y = {1, 0};
    const double h = 1e-6;
    auto at = [&](double v) {
        auto q = p;
        q[0] = v;
        return bce_loss(q, y);
    };
    const double numeric = (at(0.3 + h) - at(0.3 - h)) / (2 * h);
    EXPECT_NEAR(numeric, -1.0 / 0.3 / 2.0, 1e-6);
}

TEST(Replay, CapacityAndUniformSampling) {
    ReplayMemory r(5);
    for (std::size_t i = 0; i < 12; ++i) r.push({i, {}, {}, {}});
    EXPECT_EQ(r.size(), 5u);
    std::set<std::size_t> kept;
    for (std::size_t i = 0; i < r.size(); ++i) kept.insert(r.at(i).table);
    EXPECT_EQ(kept, (std::set<std::size_t>{7, 8, 9, 10, 11}));
    std::mt19937_64 rng(3);
    const auto idx = r.sample(4, rng);
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 4u);
    EXPECT_EQ(r.sample(50, rng).size(), 5u);
    EXPECT_THROW(ReplayMemory(0), Error);
}

TEST(Trainer, TeacherForcingLossDecreases) {
    const auto [splits, fx] = small_corpus();
    Model m(nn::ModelConfig::from_preset("tiny"), fx, 2);
    TrainPlan plan;
    plan.tf_epochs = 5;
    plan.ss_epochs = 0;
    Trainer tr(m, plan, splits.train, splits.valid);
    const auto h = tr.teacher_force();
    ASSERT_EQ(h.size(), 5u);
    EXPECT_LT(h[4].loss, h[0].loss);
    for (const auto& e : h) EXPECT_LE(e.valid_r1, e.valid_r3);
}

TEST(Trainer, SearchSamplingStoresNegativesWithinCapacity) {
    const auto [splits, fx] = small_corpus();
    Model m(nn::ModelConfig::from_preset("tiny"), fx, 2);
    TrainPlan plan;
    plan.tf_epochs = 1;
    plan.ss_epochs = 1;
    plan.replay_capacity = 300;
    Trainer tr(m, plan, splits.train, splits.valid);
    tr.run();
    const ReplayMemory& r = tr.replay();
    EXPECT_LE(r.size(), 300u);
    EXPECT_EQ(r.size(), 300u);
    std::size_t negatives = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& labels = r.at(i).labels;
        negatives += std::all_of(labels.begin(), labels.end(), [](float l) { return l == 0.0f; });
    }
    EXPECT_GT(negatives, 0u);
    EXPECT_LT(negatives, r.size());
}

TEST(Trainer, TransferKeepsEncoderBitIdentical) {
    const auto [splits, fx] = small_corpus();
    Model source(nn::ModelConfig::from_preset("tiny"), fx, 2);
    auto target = transfer_model(source, 8);
    TrainPlan plan;
    plan.regime = Regime::transfer(ChartType::Line);
    plan.tf_epochs = 2;
    plan.ss_epochs = 1;
    const auto before = target->params().values();
    Trainer(*target, plan, splits.train, splits.valid).run();
    std::size_t changed_decoder = 0;
    for (const auto& e : target->params().entries()) {
        const auto a = std::span(before).subspan(e.offset, e.size());
        const auto b = target->params().data(target->params().find(e.name));
        const bool same = std::equal(a.begin(), a.end(), b.begin());
        if (e.name.starts_with(nn::kEncoderPrefix)) EXPECT_TRUE(same) << e.name;
        else changed_decoder += !same;
    }
    EXPECT_GT(changed_decoder, 0u);
}

TEST(Trainer, SeparateRegimeSeesOnlyItsType) {
    const auto [splits, fx] = small_corpus();
    Model m(nn::ModelConfig::from_preset("tiny"), fx, 2);
    TrainPlan plan;
    plan.regime = Regime::separate(ChartType::Pie);
    plan.tf_epochs = 1;
    plan.ss_epochs = 1;
    Trainer tr(m, plan, splits.train, splits.valid);
    tr.run();
    for (std::size_t i = 0; i < tr.replay().size(); ++i)
        EXPECT_EQ(tr.replay().at(i).state.front().chart_type(), ChartType::Pie);
}

TEST(Trainer, ReproducibleUnderSeed) {
    const auto [splits, fx] = small_corpus();
    auto run = [&] {
        Model m(nn::ModelConfig::from_preset("tiny"), fx, 3);
        TrainPlan plan;
        plan.tf_epochs = 2;
        plan.ss_epochs = 1;
        const auto h = Trainer(m, plan, splits.train, splits.valid).run();
        return std::make_pair(h.back().loss, m.params().values());
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(Regimes, StoredParameterAccounting) {
    const auto [splits, fx] = small_corpus();
    TrainPlan plan;
    plan.tf_epochs = 1;
    plan.ss_epochs = 0;
    const auto suite = run_regimes(splits.train, splits.valid, nn::ModelConfig::from_preset("tiny"), fx, plan,
                                   {ChartType::Line, ChartType::Bar});
    ASSERT_EQ(suite.transfer.size(), 2u);
    ASSERT_EQ(suite.separate.size(), 2u);
    const std::size_t total = suite.mixed->parameter_count(), enc = suite.mixed->encoder_parameter_count();
    const std::size_t dec = suite.mixed->decoder_parameter_count();
    EXPECT_EQ(enc + dec, total);
    EXPECT_EQ(suite.transfer_stored_parameters(), enc + 2 * dec);
    EXPECT_EQ(suite.separate_stored_parameters(), 2 * total);
}
