#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace t2c {

inline constexpr std::size_t kDefaultMaxFields = 128;

enum class FieldType : std::uint8_t { Unknown, String, Year, DateTime, Decimal };
enum class FieldRole : std::uint8_t { Invalid, Header, Value };

inline constexpr std::size_t kFieldTypeCount = 5;
inline constexpr std::size_t kFieldRoleCount = 3;

std::string_view to_string(FieldType type);
std::string_view to_string(FieldRole role);
std::optional<FieldType> parse_field_type(std::string_view text);
std::optional<FieldRole> parse_field_role(std::string_view text);

/// A single cell: missing, numeric or text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

/// Numeric value of a cell, parsing text cells that hold a number.
std::optional<double> cell_number(const Cell& c);

/// True for text matching an ISO-8601 calendar date, optionally with a time part.
bool looks_like_iso_date(std::string_view text);

struct Field {
    std::size_t index = 0;
    std::string header;
    FieldType type = FieldType::Unknown;
    FieldRole role = FieldRole::Invalid;
    std::vector<Cell> values;

    bool is_numeric() const { return type == FieldType::Decimal || type == FieldType::Year; }
};

/// Rectangular table of typed fields. Construct through `Table::make` to validate invariants.
class Table {
public:
    Table() = default;

    /// Validates field count, rectangularity and renumbers field indices by position.
    static Table make(std::string table_id, std::vector<Field> fields,
                      std::size_t max_fields = kDefaultMaxFields);

    const std::string& id() const { return id_; }
    std::span<const Field> fields() const { return fields_; }
    const Field& field(std::size_t i) const { return fields_.at(i); }
    std::size_t n_fields() const { return fields_.size(); }
    std::size_t n_rows() const { return n_rows_; }

    bool same_values(const Table& other) const;

private:
    std::string id_;
    std::vector<Field> fields_;
    std::size_t n_rows_ = 0;
};

using TablePtr = std::shared_ptr<const Table>;

FieldType infer_field_type(std::span<const Cell> values, std::string_view header = {});

/// Default roles: leading String fields (before the first numeric one) are Header, the rest Value.
void assign_default_roles(std::vector<Field>& fields);

/// Positional schema identity: field count plus per-position (type, header).
class SchemaKey {
public:
    SchemaKey() = default;
    explicit SchemaKey(std::string canonical);

    std::uint64_t digest() const { return digest_; }
    const std::string& canonical() const { return canonical_; }

    friend bool operator==(const SchemaKey& a, const SchemaKey& b) {
        return a.digest_ == b.digest_ && a.canonical_ == b.canonical_;
    }
    friend bool operator<(const SchemaKey& a, const SchemaKey& b) {
        return a.canonical_ < b.canonical_;
    }

private:
    std::string canonical_;
    std::uint64_t digest_ = 0;
};

SchemaKey schema_key(const Table& table);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Reads CSV text: first row holds headers; empty cells are missing; types and roles inferred.
Table read_csv(std::istream& in, std::string table_id);
Table read_csv_file(const std::string& path);

}  // namespace t2c

template <>
struct std::hash<t2c::SchemaKey> {
    std::size_t operator()(const t2c::SchemaKey& k) const noexcept { return k.digest(); }
};
