#include "t2c/search.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <set>

namespace t2c {

namespace {

class OracleSession final : public ScorerSession {
public:
    explicit OracleSession(const TargetSet& targets) : targets_(targets) {}
    std::vector<double> score(std::span<const ActionToken> state, std::span<const ActionToken> actions) override {
        const auto labels = q_star_labels(targets_, state, actions);
        return {labels.begin(), labels.end()};
    }

private:
    const TargetSet& targets_;
};

class ConstantSession final : public ScorerSession {
public:
    explicit ConstantSession(double v) : v_(v) {}
    std::vector<double> score(std::span<const ActionToken>, std::span<const ActionToken> actions) override {
        return std::vector<double>(actions.size(), v_);
    }

private:
    double v_;
};

struct Precedes {
    bool operator()(const ScoredState& a, const ScoredState& b) const { return search_precedes(a, b); }
};

}  // namespace

std::unique_ptr<ScorerSession> OracleScorer::open(const Table&) const {
    return std::make_unique<OracleSession>(*targets_);
}

void CorpusOracleScorer::add(TablePtr table, std::vector<ChartSequence> targets, const HardConstraints& constraints) {
    const Table* key = table.get();
    sets_[key] = std::make_shared<const TargetSet>(std::move(table), std::move(targets), constraints);
}

std::unique_ptr<ScorerSession> CorpusOracleScorer::open(const Table& table) const {
    const auto it = sets_.find(&table);
    if (it == sets_.end()) return std::make_unique<ConstantSession>(0.0);
    return std::make_unique<OracleSession>(*it->second);
}

std::size_t CorpusOracleScorer::max_prefix_count() const {
    std::size_t n = 0;
    for (const auto& [t, s] : sets_) n = std::max(n, s->prefix_count());
    return n;
}

std::unique_ptr<ScorerSession> ConstantScorer::open(const Table&) const {
    return std::make_unique<ConstantSession>(value_);
}

std::map<ActionToken, double> q_values(ScorerSession& session, const Table& table,
                                       std::span<const ActionToken> state, const HardConstraints& constraints) {
    const auto actions = legal_actions(table, state, constraints);
    std::map<ActionToken, double> out;
    if (actions.empty()) return out;
    const auto scores = session.score(state, actions);
    if (scores.size() != actions.size()) throw Error(ErrorCode::KeyMismatch, "scorer returned wrong arity");
    for (std::size_t i = 0; i < actions.size(); ++i) out.emplace(actions[i], scores[i]);
    return out;
}

bool search_precedes(const ScoredState& a, const ScoredState& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.state.size() != b.state.size()) return a.state.size() < b.state.size();
    return a.state < b.state;
}

RecommendationList beam_search(const Scorer& scorer, const Table& table, const SearchConfig& config,
                               const ExpansionObserver& observer) {
    if (config.beam_size < 1 || config.expand_limit < 1)
        throw Error(ErrorCode::InvalidArgument, "beam_size and expand_limit must be >= 1");
    const HardConstraints& c = config.constraints;
    std::vector<ChartType> types = config.seed_types;
    if (types.empty()) types.assign(kMajorChartTypes.begin(), kMajorChartTypes.end());

    const auto root = legal_actions(table, {}, c);
    std::vector<ActionToken> seeds;
    for (ChartType t : types) {
        const ActionToken a = ActionToken::chart(t);
        if (std::binary_search(root.begin(), root.end(), a)) seeds.push_back(a);
    }
    if (seeds.empty()) throw Error(ErrorCode::NoLegalSeed, "no seed chart type is legal on this table");
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    auto session = scorer.open(table);
    RecommendationList out;
    std::map<ChartSequence, double> results;
    std::size_t expansions = 0;

    // Several seeds compete on the root's Q; a single seed needs no call.
    std::set<ScoredState, Precedes> frontier;
    if (seeds.size() == 1) {
        frontier.insert({{seeds[0]}, 1.0});
    } else {
        const auto scores = session->score({}, seeds);
        ++out.scorer_calls;
        if (observer) observer({}, seeds);
        for (std::size_t i = 0; i < seeds.size(); ++i) frontier.insert({{seeds[i]}, scores[i]});
    }

    while (!frontier.empty() && expansions < config.expand_limit) {
        std::vector<ScoredState> beam;
        while (!frontier.empty() && beam.size() < config.beam_size) {
            beam.push_back(*frontier.begin());
            frontier.erase(frontier.begin());
        }
        for (ScoredState cur : beam) {
            while (!is_complete(cur.state)) {
                const auto actions = legal_actions(table, cur.state, c);
                if (actions.empty()) break;
                const auto scores = session->score(cur.state, actions);
                ++expansions;
                if (observer) observer(cur.state, actions);
                std::size_t best = 0;
                for (std::size_t i = 1; i < actions.size(); ++i)
                    if (scores[i] > scores[best]) best = i;
                for (std::size_t i = 0; i < actions.size(); ++i) {
                    if (i == best) continue;
                    ChartSequence child = cur.state;
                    child.push_back(actions[i]);
                    frontier.insert({std::move(child), scores[i]});
                }
                cur.state.push_back(actions[best]);
                cur.score = scores[best];
            }
            if (!is_complete(cur.state)) continue;
            auto [it, fresh] = results.emplace(cur.state, cur.score);
            if (!fresh) it->second = std::max(it->second, cur.score);
        }
    }

    out.scorer_calls += expansions;
    for (auto& [s, score] : results) out.entries.push_back({s, score});
    std::sort(out.entries.begin(), out.entries.end(), search_precedes);
    if (config.max_results && out.entries.size() > config.max_results) out.entries.resize(config.max_results);
    return out;
}

RecommendationList recommend(const Scorer& scorer, const Table& table, const HardConstraints& constraints,
                             std::size_t beam_size, std::size_t expand_limit) {
    SearchConfig cfg;
    cfg.beam_size = beam_size;
    cfg.expand_limit = expand_limit;
    cfg.constraints = constraints;
    if (constraints.allowed_types) cfg.seed_types = *constraints.allowed_types;
    try {
        return beam_search(scorer, table, cfg);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoLegalSeed)
            throw Error(ErrorCode::UnsatisfiableConstraints, "no chart satisfies the constraints on this table");
        throw;
    }
}

}  // namespace t2c
