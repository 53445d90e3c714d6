#pragma once

#include "t2c/grammar.hpp"
#include "t2c/table.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace t2c {

/// User-created charts G_D of one table and their prefix closure T_D^+, stored as a trie.
class TargetSet {
public:
    TargetSet(TablePtr table, std::vector<ChartSequence> targets,
              HardConstraints constraints = HardConstraints{});

    const Table& table() const { return *table_; }
    const TablePtr& table_ptr() const { return table_; }
    const HardConstraints& constraints() const { return constraints_; }
    const std::vector<ChartSequence>& targets() const { return targets_; }

    /// s in T_D^+ (the empty sequence is always a member when any target exists).
    bool contains_prefix(std::span<const ActionToken> s) const;
    /// s in G_D.
    bool is_target(std::span<const ActionToken> s) const;

    /// Every element of T_D^+ in depth-first code order, root included.
    std::vector<ChartSequence> prefixes() const;
    std::size_t prefix_count() const { return nodes_.size(); }

    /// Tokens a with s·a in T_D^+ (trie children of s); empty if s is not in T_D^+.
    std::vector<ActionToken> continuations(std::span<const ActionToken> s) const;

private:
    struct Node {
        std::map<ActionToken, std::uint32_t> children;
        bool terminal = false;
    };
    const Node* find(std::span<const ActionToken> s) const;

    TablePtr table_;
    std::vector<ChartSequence> targets_;
    HardConstraints constraints_;
    std::vector<Node> nodes_;
};

/// 1 iff s·a in G_D. Throws IllegalAction if a is not legal at s.
int reward(const TargetSet& targets, std::span<const ActionToken> s, ActionToken a);

/// Optimal action value with discount 1: 1 iff s·a in T_D^+. Throws IllegalAction if a is not legal.
int q_star(const TargetSet& targets, std::span<const ActionToken> s, ActionToken a);

/// q* for each of the given (already legal) actions, without re-checking legality.
std::vector<float> q_star_labels(const TargetSet& targets, std::span<const ActionToken> s,
                                 std::span<const ActionToken> actions);

}  // namespace t2c
