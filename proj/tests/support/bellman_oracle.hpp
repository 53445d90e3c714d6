#pragma once

// Q by backward recursion over the full MDP: Q(s,a) = r(s,a) + max_a' Q(s·a, a'), gamma = 1.

#include "t2c/grammar.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace t2c::oracle {

struct BellmanOracle {
    const Table& table;
    std::set<ChartSequence> goals;
    std::map<ChartSequence, int> memo;

    int value(const ChartSequence& s) {
        if (auto it = memo.find(s); it != memo.end()) return it->second;
        int best = 0;
        for (ActionToken a : legal_actions(table, s, {})) best = std::max(best, q(s, a));
        return memo[s] = best;
    }
    int q(const ChartSequence& s, ActionToken a) {
        ChartSequence n = s;
        n.push_back(a);
        const int r = goals.count(n) ? 1 : 0;
        return r + (is_complete(n) ? 0 : value(n));
    }
};

}  // namespace t2c::oracle
