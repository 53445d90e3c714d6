#pragma once

#include "t2c/table.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace t2c {

enum class ChartType : std::uint8_t { Line, Bar, Scatter, Pie, Area, Radar };
enum class GroupOp : std::uint8_t { Cluster, Stack };

inline constexpr std::size_t kChartTypeCount = 6;
inline constexpr std::array<ChartType, kChartTypeCount> kAllChartTypes = {
    ChartType::Line, ChartType::Bar, ChartType::Scatter, ChartType::Pie, ChartType::Area, ChartType::Radar};
inline constexpr std::array<ChartType, 4> kMajorChartTypes = {ChartType::Line, ChartType::Bar,
                                                             ChartType::Scatter, ChartType::Pie};

std::string_view to_string(ChartType type);
/// Accepts "Line", "line", "[Line]".
std::optional<ChartType> parse_chart_type(std::string_view text);

/// Action token. Commands occupy codes 0..8 in tie-break order
/// ([Line] < [Bar] < [Scatter] < [Pie] < [Area] < [Radar] < [SEP] < [Cluster] < [Stack]);
/// field k has code 9 + k, so every command orders before every field.
class ActionToken {
public:
    static constexpr std::uint32_t kSepCode = 6;
    static constexpr std::uint32_t kClusterCode = 7;
    static constexpr std::uint32_t kStackCode = 8;
    static constexpr std::uint32_t kCommandCount = 9;

    constexpr ActionToken() = default;

    static constexpr ActionToken chart(ChartType t) { return ActionToken(static_cast<std::uint32_t>(t)); }
    static constexpr ActionToken sep() { return ActionToken(kSepCode); }
    static constexpr ActionToken grp(GroupOp g) {
        return ActionToken(g == GroupOp::Cluster ? kClusterCode : kStackCode);
    }
    static constexpr ActionToken field(std::size_t index) {
        return ActionToken(kCommandCount + static_cast<std::uint32_t>(index));
    }
    static constexpr ActionToken from_code(std::uint32_t code) { return ActionToken(code); }

    constexpr std::uint32_t code() const { return code_; }
    constexpr bool is_field() const { return code_ >= kCommandCount; }
    constexpr bool is_command() const { return code_ < kCommandCount; }
    constexpr bool is_chart_type() const { return code_ < kSepCode; }
    constexpr bool is_sep() const { return code_ == kSepCode; }
    constexpr bool is_grp() const { return code_ == kClusterCode || code_ == kStackCode; }
    constexpr std::size_t field_index() const { return code_ - kCommandCount; }
    constexpr ChartType chart_type() const { return static_cast<ChartType>(code_); }
    constexpr GroupOp group_op() const { return code_ == kClusterCode ? GroupOp::Cluster : GroupOp::Stack; }

    friend constexpr auto operator<=>(ActionToken, ActionToken) = default;

private:
    constexpr explicit ActionToken(std::uint32_t code) : code_(code) {}
    std::uint32_t code_ = 0;
};

std::string to_string(ActionToken token);

/// A chart as a token sequence; a legal prefix of its template when produced by this module.
using ChartSequence = std::vector<ActionToken>;

/// Role of a token inside a sequence, as used by the categorical token features.
enum class Segment : std::uint8_t { Padding, X, Y, Grp, Op };
inline constexpr std::size_t kSegmentCount = 5;

std::vector<Segment> segment_types(std::span<const ActionToken> seq);

/// Per-type template shape (Backus-Naur productions): y arity, x arity, terminator kind.
struct ChartTemplate {
    ChartType type;
    std::size_t min_y;
    std::size_t max_y;  // SIZE_MAX when unbounded
    std::size_t min_x;
    std::size_t max_x;
    bool grp_terminated;
};

const ChartTemplate& chart_template(ChartType type);

struct HardConstraints {
    bool forbid_string_y = true;
    std::array<std::size_t, kChartTypeCount> max_y{8, 8, 8, 8, 8, 8};
    std::array<std::size_t, kChartTypeCount> max_x{2, 2, 2, 2, 2, 2};
    /// Complete sequences must use exactly this field set (sorted, unique).
    std::optional<std::vector<std::size_t>> required_fields;
    std::optional<std::vector<ChartType>> allowed_types;

    /// Pure grammar: no type rule, no field-number caps, no user constraints.
    static HardConstraints grammar_only();

    bool type_allowed(ChartType t) const;
    std::size_t y_cap(ChartType t) const;
    std::size_t x_cap(ChartType t) const;
};

/// Decomposition of a (possibly partial) sequence into its segments.
struct ChartParts {
    std::optional<ChartType> type;
    std::vector<std::size_t> y;
    std::vector<std::size_t> x;
    bool y_closed = false;
    std::optional<ActionToken> terminator;

    bool complete() const { return terminator.has_value(); }
    std::vector<std::size_t> field_set() const;  // sorted union of x and y
};

/// Structural decomposition; throws IllegalState when the tokens do not follow any template.
ChartParts decompose(std::span<const ActionToken> seq);

/// True iff `seq` is a prefix of some complete sequence accepted under `constraints` for `table`.
/// The empty sequence is the root state.
bool is_legal_prefix(const Table& table, std::span<const ActionToken> seq, const HardConstraints& constraints);

/// Legal next tokens in code order. Throws IllegalState if `seq` is not a legal prefix.
std::vector<ActionToken> legal_actions(const Table& table, std::span<const ActionToken> seq,
                                       const HardConstraints& constraints);

/// True iff the template's final terminator has been consumed.
bool is_complete(std::span<const ActionToken> seq);

std::string serialize_sequence(std::span<const ActionToken> seq);
/// Tokens with field headers, for display only.
std::string pretty_sequence(std::span<const ActionToken> seq, const Table& table);

ChartSequence parse_sequence(std::string_view text, const Table& table,
                             const HardConstraints& constraints = HardConstraints::grammar_only());

/// All complete legal sequences of length <= max_len, in depth-first code order.
std::vector<ChartSequence> enumerate_all_charts(const Table& table, const HardConstraints& constraints,
                                                std::size_t max_len, std::size_t limit = 1'000'000);

/// 2 + default caps (one chart-type token, y cap, SEP, x cap, terminator).
std::size_t default_max_len(const HardConstraints& constraints);

}  // namespace t2c
