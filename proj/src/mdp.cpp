#include "t2c/mdp.hpp"

#include "t2c/error.hpp"

#include <algorithm>

namespace t2c {

TargetSet::TargetSet(TablePtr table, std::vector<ChartSequence> targets, HardConstraints constraints)
    : table_(std::move(table)), targets_(std::move(targets)), constraints_(std::move(constraints)) {
    nodes_.emplace_back();
    for (const ChartSequence& t : targets_) {
        if (!is_complete(t))
            throw Error(ErrorCode::IllegalState, "target is not a complete chart: '" + serialize_sequence(t) + "'");
        std::uint32_t cur = 0;
        for (ActionToken a : t) {
            auto it = nodes_[cur].children.find(a);
            if (it == nodes_[cur].children.end()) {
                const auto next = static_cast<std::uint32_t>(nodes_.size());
                nodes_[cur].children.emplace(a, next);
                nodes_.emplace_back();
                cur = next;
            } else {
                cur = it->second;
            }
        }
        nodes_[cur].terminal = true;
    }
}

const TargetSet::Node* TargetSet::find(std::span<const ActionToken> s) const {
    std::uint32_t cur = 0;
    for (ActionToken a : s) {
        auto it = nodes_[cur].children.find(a);
        if (it == nodes_[cur].children.end()) return nullptr;
        cur = it->second;
    }
    return &nodes_[cur];
}

bool TargetSet::contains_prefix(std::span<const ActionToken> s) const {
    return !targets_.empty() && find(s) != nullptr;
}

bool TargetSet::is_target(std::span<const ActionToken> s) const {
    const Node* n = find(s);
    return n && n->terminal;
}

std::vector<ChartSequence> TargetSet::prefixes() const {
    std::vector<ChartSequence> out;
    if (targets_.empty()) return out;
    ChartSequence cur;
    auto dfs = [&](auto&& self, std::uint32_t node) -> void {
        out.push_back(cur);
        for (const auto& [tok, child] : nodes_[node].children) {
            cur.push_back(tok);
            self(self, child);
            cur.pop_back();
        }
    };
    dfs(dfs, 0);
    return out;
}

std::vector<ActionToken> TargetSet::continuations(std::span<const ActionToken> s) const {
    std::vector<ActionToken> out;
    if (const Node* n = find(s))
        for (const auto& kv : n->children) out.push_back(kv.first);
    return out;
}

namespace {

void require_legal(const TargetSet& targets, std::span<const ActionToken> s, ActionToken a) {
    const auto legal = legal_actions(targets.table(), s, targets.constraints());
    if (!std::binary_search(legal.begin(), legal.end(), a))
        throw Error(ErrorCode::IllegalAction,
                    "action " + to_string(a) + " is not legal after '" + serialize_sequence(s) + "'");
}

ChartSequence extend(std::span<const ActionToken> s, ActionToken a) {
    ChartSequence next(s.begin(), s.end());
    next.push_back(a);
    return next;
}

}  // namespace

int reward(const TargetSet& targets, std::span<const ActionToken> s, ActionToken a) {
    require_legal(targets, s, a);
    return targets.is_target(extend(s, a)) ? 1 : 0;
}

int q_star(const TargetSet& targets, std::span<const ActionToken> s, ActionToken a) {
    require_legal(targets, s, a);
    return targets.contains_prefix(extend(s, a)) ? 1 : 0;
}

std::vector<float> q_star_labels(const TargetSet& targets, std::span<const ActionToken> s,
                                 std::span<const ActionToken> actions) {
    std::vector<float> labels(actions.size(), 0.0f);
    const auto next = targets.continuations(s);
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (std::binary_search(next.begin(), next.end(), actions[i])) labels[i] = 1.0f;
    return labels;
}

}  // namespace t2c
