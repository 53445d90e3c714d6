#pragma once

// Independent brute-force model of the chart grammar, used only by tests.
// Tokens are plain ints: 0..5 chart types (Line Bar Scatter Pie Area Radar),
// 6 [SEP], 7 [Cluster], 8 [Stack], 9 + k field k.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace t2c::oracle {

struct BruteConstraints {
    bool forbid_string_y = true;
    int y_cap = 8;
    int x_cap = 2;
    std::optional<std::set<int>> required;
    std::optional<std::set<int>> types;
};

inline bool accepts(const std::vector<bool>& is_string, const std::vector<int>& s, const BruteConstraints& c) {
    const int n = static_cast<int>(is_string.size());
    if (s.empty() || s[0] > 5) return false;
    const int type = s[0];
    if (c.types && !c.types->count(type)) return false;
    std::size_t i = 1;
    std::vector<int> y, x;
    while (i < s.size() && s[i] >= 9) y.push_back(s[i++] - 9);
    if (i >= s.size() || s[i] != 6) return false;
    ++i;
    while (i < s.size() && s[i] >= 9) x.push_back(s[i++] - 9);
    if (i + 1 != s.size()) return false;
    const int term = s[i];
    const bool bar = type == 1;
    if (bar ? (term != 7 && term != 8) : term != 6) return false;
    if (y.empty()) return false;
    if ((type == 2 || type == 3) && y.size() != 1) return false;  // Scatter, Pie: one y-field
    if (type == 2 && x.size() != 1) return false;                  // Scatter: one x-field
    if (static_cast<int>(y.size()) > c.y_cap || static_cast<int>(x.size()) > c.x_cap) return false;
    for (int f : y)
        if (f >= n || (c.forbid_string_y && is_string[f])) return false;
    for (int f : x)
        if (f >= n) return false;
    std::set<int> used(y.begin(), y.end());
    used.insert(x.begin(), x.end());
    if (used.size() != y.size() + x.size()) return false;  // a field is used at most once
    if (c.required && used != *c.required) return false;
    return true;
}

/// Every accepted sentence, by generating all token strings of the shape
/// type f^a SEP f^b term with a, b one past the caps (repetition allowed).
inline std::vector<std::vector<int>> accepted_sentences(const std::vector<bool>& is_string,
                                                        const BruteConstraints& c) {
    const int n = static_cast<int>(is_string.size());
    const int max_a = std::min(c.y_cap, n) + 1;
    const int max_b = std::min(c.x_cap, n) + 1;
    std::vector<std::vector<int>> seqs_by_len[16];
    auto all_strings = [n](int len) {
        std::vector<std::vector<int>> out{{}};
        for (int k = 0; k < len; ++k) {
            std::vector<std::vector<int>> next;
            for (const auto& s : out)
                for (int f = 0; f < n; ++f) {
                    auto t = s;
                    t.push_back(9 + f);
                    next.push_back(std::move(t));
                }
            out = std::move(next);
        }
        return out;
    };
    std::vector<std::vector<int>> ys, xs;
    for (int a = 0; a <= max_a; ++a)
        for (auto& s : all_strings(a)) ys.push_back(std::move(s));
    for (int b = 0; b <= max_b; ++b)
        for (auto& s : all_strings(b)) xs.push_back(std::move(s));
    std::vector<std::vector<int>> out;
    std::vector<int> cand;
    for (int type = 0; type < 6; ++type)
        for (const auto& y : ys)
            for (const auto& x : xs)
                for (int term : {6, 7, 8}) {
                    cand.clear();
                    cand.push_back(type);
                    cand.insert(cand.end(), y.begin(), y.end());
                    cand.push_back(6);
                    cand.insert(cand.end(), x.begin(), x.end());
                    cand.push_back(term);
                    if (accepts(is_string, cand, c)) out.push_back(cand);
                }
    return out;
}

/// Prefix closure of the accepted language (empty prefix included) as byte strings.
inline std::set<std::string> prefix_closure(const std::vector<std::vector<int>>& sentences) {
    std::set<std::string> out;
    for (const auto& s : sentences) {
        std::string key;
        out.insert(key);
        for (int t : s) {
            key.push_back(static_cast<char>(t));
            out.insert(key);
        }
    }
    return out;
}

}  // namespace t2c::oracle
