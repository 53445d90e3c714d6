#include "t2c/grammar.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

namespace t2c {

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

constexpr std::array<ChartTemplate, kChartTypeCount> kTemplates = {{
    {ChartType::Line, 1, kUnbounded, 0, kUnbounded, false},
    {ChartType::Bar, 1, kUnbounded, 0, kUnbounded, true},
    {ChartType::Scatter, 1, 1, 1, 1, false},
    {ChartType::Pie, 1, 1, 0, kUnbounded, false},
    {ChartType::Area, 1, kUnbounded, 0, kUnbounded, false},
    {ChartType::Radar, 1, kUnbounded, 0, kUnbounded, false},
}};

constexpr std::string_view kTypeNames[] = {"Line", "Bar", "Scatter", "Pie", "Area", "Radar"};

bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

bool y_eligible(const Table& table, std::size_t f, const HardConstraints& c) {
    return !(c.forbid_string_y && table.field(f).type == FieldType::String);
}

bool in_required(const HardConstraints& c, std::size_t f) {
    return !c.required_fields || std::binary_search(c.required_fields->begin(), c.required_fields->end(), f);
}

// Local rules: every token so far respects the template and the constraints.
// A field is used at most once per chart.
bool consistent(const Table& table, const ChartParts& p, const HardConstraints& c) {
    if (!p.type) return true;
    const ChartType t = *p.type;
    if (!c.type_allowed(t)) return false;
    const ChartTemplate& tpl = chart_template(t);
    const std::size_t n = table.n_fields();
    if (p.y.size() > c.y_cap(t) || p.x.size() > c.x_cap(t)) return false;
    std::vector<bool> seen(n, false);
    for (std::size_t f : p.y) {
        if (f >= n || seen[f] || !y_eligible(table, f, c) || !in_required(c, f)) return false;
        seen[f] = true;
    }
    for (std::size_t f : p.x) {
        if (f >= n || seen[f] || !in_required(c, f)) return false;
        seen[f] = true;
    }
    if (p.y_closed && p.y.size() < tpl.min_y) return false;
    if (p.complete()) {
        if (p.x.size() < tpl.min_x) return false;
        if (tpl.grp_terminated != p.terminator->is_grp()) return false;
        if (c.required_fields && p.field_set() != *c.required_fields) return false;
    }
    return true;
}

// Whether a consistent partial chart can still be completed.
bool completable(const Table& table, const ChartParts& p, const HardConstraints& c) {
    if (!p.type) {
        for (ChartType t : kAllChartTypes) {
            ChartParts q;
            q.type = t;
            if (consistent(table, q, c) && completable(table, q, c)) return true;
        }
        return false;
    }
    if (p.complete()) return true;
    const ChartType t = *p.type;
    const ChartTemplate& tpl = chart_template(t);
    const std::size_t n = table.n_fields();
    const std::size_t ycap = c.y_cap(t), xcap = c.x_cap(t);
    if (xcap < tpl.min_x) return false;
    const std::size_t used = p.y.size() + p.x.size();

    if (!c.required_fields) {
        if (!p.y_closed) {
            if (p.y.empty()) {
                bool any = false;
                for (std::size_t f = 0; f < n && !any; ++f) any = y_eligible(table, f, c);
                return any && ycap >= 1 && n - 1 >= tpl.min_x;
            }
            return n - used >= tpl.min_x;
        }
        return p.x.size() + std::min(n - used, xcap - p.x.size()) >= tpl.min_x;
    }

    std::size_t forced_x = 0, flexible = 0;
    for (std::size_t f : *c.required_fields) {
        if (contains(p.y, f) || contains(p.x, f)) continue;
        if (y_eligible(table, f, c)) ++flexible;
        else ++forced_x;
    }
    const std::size_t open = forced_x + flexible;
    if (!p.y_closed) {
        // k flexible fields join y; the rest of the open fields fill x.
        const std::size_t yrem = ycap - p.y.size();
        std::size_t lo = p.y.empty() ? 1 : 0;
        if (open > xcap) lo = std::max(lo, open - xcap);
        if (open < tpl.min_x) return false;
        const std::size_t hi = std::min({flexible, yrem, open - tpl.min_x});
        return lo <= hi;
    }
    return open <= xcap - p.x.size() && p.x.size() + open >= tpl.min_x;
}

void append(ChartParts& p, ActionToken a) {
    if (!p.type) {
        if (!a.is_chart_type()) throw Error(ErrorCode::IllegalState, "sequence must start with a chart type");
        p.type = a.chart_type();
        return;
    }
    if (p.complete()) throw Error(ErrorCode::IllegalState, "token after a complete sequence");
    if (a.is_chart_type()) throw Error(ErrorCode::IllegalState, "chart type token inside a sequence");
    if (a.is_field()) {
        (p.y_closed ? p.x : p.y).push_back(a.field_index());
        return;
    }
    if (!p.y_closed) {
        if (!a.is_sep()) throw Error(ErrorCode::IllegalState, "grouping token before the x segment");
        if (p.y.empty()) throw Error(ErrorCode::IllegalState, "empty y segment");
        p.y_closed = true;
        return;
    }
    p.terminator = a;
}

bool extension_ok(const Table& table, const ChartParts& p, ActionToken a, const HardConstraints& c) {
    ChartParts q = p;
    try {
        append(q, a);
    } catch (const Error&) {
        return false;
    }
    return consistent(table, q, c) && completable(table, q, c);
}

}  // namespace

std::string_view to_string(ChartType type) { return kTypeNames[static_cast<int>(type)]; }

std::optional<ChartType> parse_chart_type(std::string_view text) {
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
    for (std::size_t i = 0; i < kChartTypeCount; ++i) {
        std::string_view name = kTypeNames[i];
        if (name.size() == text.size() &&
            std::equal(name.begin(), name.end(), text.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            }))
            return static_cast<ChartType>(i);
    }
    return std::nullopt;
}

std::string to_string(ActionToken token) {
    if (token.is_field()) return "(" + std::to_string(token.field_index()) + ")";
    if (token.is_chart_type()) return "[" + std::string(to_string(token.chart_type())) + "]";
    if (token.is_sep()) return "[SEP]";
    return token.group_op() == GroupOp::Cluster ? "[Cluster]" : "[Stack]";
}

std::vector<Segment> segment_types(std::span<const ActionToken> seq) {
    std::vector<Segment> out;
    out.reserve(seq.size());
    bool y_closed = false;
    for (ActionToken a : seq) {
        if (a.is_field()) {
            out.push_back(y_closed ? Segment::X : Segment::Y);
        } else if (a.is_grp()) {
            out.push_back(Segment::Grp);
        } else {
            if (a.is_sep()) y_closed = true;
            out.push_back(Segment::Op);
        }
    }
    return out;
}

const ChartTemplate& chart_template(ChartType type) { return kTemplates[static_cast<int>(type)]; }

HardConstraints HardConstraints::grammar_only() {
    HardConstraints c;
    c.forbid_string_y = false;
    c.max_y.fill(kUnbounded);
    c.max_x.fill(kUnbounded);
    return c;
}

bool HardConstraints::type_allowed(ChartType t) const {
    return !allowed_types || std::find(allowed_types->begin(), allowed_types->end(), t) != allowed_types->end();
}

std::size_t HardConstraints::y_cap(ChartType t) const {
    return std::min(max_y[static_cast<int>(t)], chart_template(t).max_y);
}

std::size_t HardConstraints::x_cap(ChartType t) const {
    return std::min(max_x[static_cast<int>(t)], chart_template(t).max_x);
}

std::vector<std::size_t> ChartParts::field_set() const {
    std::vector<std::size_t> s = y;
    s.insert(s.end(), x.begin(), x.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

ChartParts decompose(std::span<const ActionToken> seq) {
    ChartParts p;
    for (ActionToken a : seq) append(p, a);
    return p;
}

bool is_legal_prefix(const Table& table, std::span<const ActionToken> seq, const HardConstraints& constraints) {
    if (seq.empty()) return true;
    ChartParts p;
    try {
        p = decompose(seq);
    } catch (const Error&) {
        return false;
    }
    return consistent(table, p, constraints) && completable(table, p, constraints);
}

std::vector<ActionToken> legal_actions(const Table& table, std::span<const ActionToken> seq,
                                       const HardConstraints& constraints) {
    if (!is_legal_prefix(table, seq, constraints))
        throw Error(ErrorCode::IllegalState, "not a legal prefix: '" + serialize_sequence(seq) + "'");
    const ChartParts p = decompose(seq);
    std::vector<ActionToken> out;
    if (!p.type) {
        for (ChartType t : kAllChartTypes)
            if (extension_ok(table, p, ActionToken::chart(t), constraints)) out.push_back(ActionToken::chart(t));
        return out;
    }
    if (p.complete()) return out;
    if (!p.y_closed) {
        if (extension_ok(table, p, ActionToken::sep(), constraints)) out.push_back(ActionToken::sep());
    } else if (chart_template(*p.type).grp_terminated) {
        for (GroupOp g : {GroupOp::Cluster, GroupOp::Stack})
            if (extension_ok(table, p, ActionToken::grp(g), constraints)) out.push_back(ActionToken::grp(g));
    } else {
        if (extension_ok(table, p, ActionToken::sep(), constraints)) out.push_back(ActionToken::sep());
    }
    for (std::size_t f = 0; f < table.n_fields(); ++f)
        if (extension_ok(table, p, ActionToken::field(f), constraints)) out.push_back(ActionToken::field(f));
    return out;
}

bool is_complete(std::span<const ActionToken> seq) {
    try {
        return decompose(seq).complete();
    } catch (const Error&) {
        return false;
    }
}

std::string serialize_sequence(std::span<const ActionToken> seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += ' ';
        out += to_string(seq[i]);
    }
    return out;
}

std::string pretty_sequence(std::span<const ActionToken> seq, const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += ' ';
        if (seq[i].is_field() && seq[i].field_index() < table.n_fields()) {
            const auto& h = table.field(seq[i].field_index()).header;
            out += "(" + (h.empty() ? "#" + std::to_string(seq[i].field_index()) : h) + ")";
        } else {
            out += to_string(seq[i]);
        }
    }
    return out;
}

ChartSequence parse_sequence(std::string_view text, const Table& table, const HardConstraints& constraints) {
    ChartSequence seq;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) break;
        std::size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        std::string_view tok = text.substr(pos, end - pos);
        pos = end;
        if (tok.size() >= 3 && tok.front() == '(' && tok.back() == ')') {
            std::string_view digits = tok.substr(1, tok.size() - 2);
            std::size_t k = 0;
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc() || ptr != digits.data() + digits.size())
                throw Error(ErrorCode::ParseError, "bad field token '" + std::string(tok) + "'");
            if (k >= table.n_fields())
                throw Error(ErrorCode::UnknownField, "field " + std::to_string(k) + " not in table '" +
                                                         table.id() + "' (" +
                                                         std::to_string(table.n_fields()) + " fields)");
            seq.push_back(ActionToken::field(k));
        } else if (tok == "[SEP]") {
            seq.push_back(ActionToken::sep());
        } else if (tok == "[Cluster]") {
            seq.push_back(ActionToken::grp(GroupOp::Cluster));
        } else if (tok == "[Stack]") {
            seq.push_back(ActionToken::grp(GroupOp::Stack));
        } else if (tok.size() > 2 && tok.front() == '[' && tok.back() == ']' &&
                   std::find(std::begin(kTypeNames), std::end(kTypeNames), tok.substr(1, tok.size() - 2)) !=
                       std::end(kTypeNames)) {
            seq.push_back(ActionToken::chart(*parse_chart_type(tok)));
        } else {
            throw Error(ErrorCode::ParseError, "bad token '" + std::string(tok) + "'");
        }
    }
    if (seq.empty()) throw Error(ErrorCode::ParseError, "empty sequence");
    if (!is_legal_prefix(table, seq, constraints))
        throw Error(ErrorCode::IllegalState, "sequence violates the chart grammar: '" + std::string(text) + "'");
    return seq;
}

std::vector<ChartSequence> enumerate_all_charts(const Table& table, const HardConstraints& constraints,
                                                std::size_t max_len, std::size_t limit) {
    std::vector<ChartSequence> out;
    ChartSequence cur;
    std::size_t visited = 0;
    auto dfs = [&](auto&& self) -> void {
        if (++visited > limit) throw Error(ErrorCode::LimitExceeded, "chart enumeration exceeded limit");
        if (is_complete(cur)) {
            out.push_back(cur);
            return;
        }
        if (cur.size() >= max_len) return;
        for (ActionToken a : legal_actions(table, cur, constraints)) {
            cur.push_back(a);
            self(self);
            cur.pop_back();
        }
    };
    dfs(dfs);
    return out;
}

std::size_t default_max_len(const HardConstraints& constraints) {
    std::size_t best = 0;
    for (ChartType t : kAllChartTypes) best = std::max(best, constraints.y_cap(t) + constraints.x_cap(t));
    return 3 + best;
}

}  // namespace t2c
