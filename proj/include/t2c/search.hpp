#pragma once

#include "t2c/grammar.hpp"
#include "t2c/mdp.hpp"
#include "t2c/table.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace t2c {

/// Scores actions of one table. A session may keep per-table state (encoded memory, decoder cache).
class ScorerSession {
public:
    virtual ~ScorerSession() = default;
    /// Q(s, a) in [0,1] for each of the given legal actions, in the same order. One call is one expansion.
    virtual std::vector<double> score(std::span<const ActionToken> state, std::span<const ActionToken> actions) = 0;
};

/// Immutable and shareable; each search opens its own session.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::unique_ptr<ScorerSession> open(const Table& table) const = 0;
};

/// q* of a fixed target set.
class OracleScorer final : public Scorer {
public:
    explicit OracleScorer(const TargetSet& targets) : targets_(&targets) {}
    std::unique_ptr<ScorerSession> open(const Table& table) const override;

private:
    const TargetSet* targets_;
};

/// q* of per-table target sets, looked up by table identity; unknown tables score 0.
class CorpusOracleScorer final : public Scorer {
public:
    void add(TablePtr table, std::vector<ChartSequence> targets, const HardConstraints& constraints = {});
    std::unique_ptr<ScorerSession> open(const Table& table) const override;
    /// Largest |T_D^+| over the registered tables.
    std::size_t max_prefix_count() const;

private:
    std::map<const Table*, std::shared_ptr<const TargetSet>> sets_;
};

/// Same score for every action.
class ConstantScorer final : public Scorer {
public:
    explicit ConstantScorer(double value) : value_(value) {}
    std::unique_ptr<ScorerSession> open(const Table& table) const override;

private:
    double value_;
};

/// Legal actions of `state` mapped to their scores.
std::map<ActionToken, double> q_values(ScorerSession& session, const Table& table,
                                       std::span<const ActionToken> state, const HardConstraints& constraints = {});

struct SearchConfig {
    std::size_t beam_size = 4;
    std::size_t expand_limit = 100;
    /// Seed chart types; empty means the four major types.
    std::vector<ChartType> seed_types;
    HardConstraints constraints;
    /// 0 keeps every result.
    std::size_t max_results = 0;
};

struct ScoredState {
    ChartSequence state;
    double score = 0;
};

struct RecommendationList {
    std::vector<ScoredState> entries;
    std::size_t scorer_calls = 0;
};

/// Search order: higher score, then shorter state, then token order.
bool search_precedes(const ScoredState& a, const ScoredState& b);

/// Called once per expansion with the state and its legal actions.
using ExpansionObserver = std::function<void(std::span<const ActionToken>, std::span<const ActionToken>)>;

/// Drill-down beam search. Throws NoLegalSeed when no seed type is legal on the table.
RecommendationList beam_search(const Scorer& scorer, const Table& table, const SearchConfig& config,
                               const ExpansionObserver& observer = {});

/// Seeds from the allowed types (or the major types), then beam search; UnsatisfiableConstraints
/// when nothing can be built.
RecommendationList recommend(const Scorer& scorer, const Table& table, const HardConstraints& constraints,
                             std::size_t beam_size = 4, std::size_t expand_limit = 100);

}  // namespace t2c
