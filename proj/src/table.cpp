#include "t2c/table.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace t2c {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IllegalState: return "IllegalState";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::EmptyTruth: return "EmptyTruth";
    case ErrorCode::TooFewSchemas: return "TooFewSchemas";
    case ErrorCode::TooManyFields: return "TooManyFields";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoRecordedGraph: return "NoRecordedGraph";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::NoLegalSeed: return "NoLegalSeed";
    case ErrorCode::UnsatisfiableConstraints: return "UnsatisfiableConstraints";
    case ErrorCode::MissingType: return "MissingType";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotFound: return "NotFound";
    }
    return "Unknown";
}

namespace {

constexpr std::string_view kTypeNames[] = {"Unknown", "String", "Year", "DateTime", "Decimal"};
constexpr std::string_view kRoleNames[] = {"Invalid", "Header", "Value"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string_view to_string(FieldType type) { return kTypeNames[static_cast<int>(type)]; }
std::string_view to_string(FieldRole role) { return kRoleNames[static_cast<int>(role)]; }

std::optional<FieldType> parse_field_type(std::string_view text) {
    for (std::size_t i = 0; i < std::size(kTypeNames); ++i)
        if (kTypeNames[i] == text) return static_cast<FieldType>(i);
    return std::nullopt;
}

std::optional<FieldRole> parse_field_role(std::string_view text) {
    for (std::size_t i = 0; i < std::size(kRoleNames); ++i)
        if (kRoleNames[i] == text) return static_cast<FieldRole>(i);
    return std::nullopt;
}

std::optional<double> cell_number(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return *d;
    if (const std::string* s = std::get_if<std::string>(&c)) return parse_number(*s);
    return std::nullopt;
}

bool looks_like_iso_date(std::string_view text) {
    text = trim(text);
    // YYYY-MM-DD
    if (text.size() < 10) return false;
    if (!all_digits(text.substr(0, 4)) || text[4] != '-' || !all_digits(text.substr(5, 2)) ||
        text[7] != '-' || !all_digits(text.substr(8, 2)))
        return false;
    int month = (text[5] - '0') * 10 + (text[6] - '0');
    int day = (text[8] - '0') * 10 + (text[9] - '0');
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    if (text.size() == 10) return true;
    // [T| ]HH:MM[:SS[.fff]][Z|±HH:MM]
    std::string_view rest = text.substr(10);
    if (rest.front() != 'T' && rest.front() != ' ') return false;
    rest.remove_prefix(1);
    if (rest.size() < 5 || !all_digits(rest.substr(0, 2)) || rest[2] != ':' ||
        !all_digits(rest.substr(3, 2)))
        return false;
    rest.remove_prefix(5);
    if (rest.size() >= 3 && rest[0] == ':' && all_digits(rest.substr(1, 2))) rest.remove_prefix(3);
    if (!rest.empty() && rest[0] == '.') {
        rest.remove_prefix(1);
        while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest[0]))) rest.remove_prefix(1);
    }
    if (rest.empty() || rest == "Z") return true;
    if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && all_digits(rest.substr(1, 2)) &&
        rest[3] == ':' && all_digits(rest.substr(4, 2)))
        return true;
    return false;
}

FieldType infer_field_type(std::span<const Cell> values, std::string_view /*header*/) {
    std::size_t present = 0, numeric = 0, dates = 0, text = 0;
    bool year_like = true;
    std::set<double> distinct;
    for (const Cell& c : values) {
        if (is_missing(c)) continue;
        ++present;
        if (auto v = cell_number(c)) {
            ++numeric;
            if (year_like) {
                if (*v != std::floor(*v) || *v < 1000 || *v > 2999) year_like = false;
                else distinct.insert(*v);
            }
            continue;
        }
        const auto& s = std::get<std::string>(c);
        if (looks_like_iso_date(s)) ++dates;
        else ++text;
    }
    if (present == 0) return FieldType::Unknown;
    auto at_least_90 = [present](std::size_t k) { return 10 * k >= 9 * present; };
    if (at_least_90(dates)) return FieldType::DateTime;
    if (at_least_90(numeric)) {
        if (year_like && distinct.size() <= 200) return FieldType::Year;
        return FieldType::Decimal;
    }
    if (at_least_90(text)) return FieldType::String;
    return FieldType::Unknown;
}

void assign_default_roles(std::vector<Field>& fields) {
    bool leading = true;
    for (Field& f : fields) {
        if (f.is_numeric()) leading = false;
        if (f.type == FieldType::String && leading) f.role = FieldRole::Header;
        else f.role = FieldRole::Value;
    }
}

Table Table::make(std::string table_id, std::vector<Field> fields, std::size_t max_fields) {
    if (fields.empty())
        throw Error(ErrorCode::InvalidArgument, "table '" + table_id + "' has no fields");
    if (fields.size() > max_fields)
        throw Error(ErrorCode::TooManyFields, "table '" + table_id + "' has " +
                                                  std::to_string(fields.size()) + " fields (max " +
                                                  std::to_string(max_fields) + ")");
    const std::size_t rows = fields.front().values.size();
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].values.size() != rows)
            throw Error(ErrorCode::InvalidArgument,
                        "table '" + table_id + "' is not rectangular (field " + std::to_string(i) + ")");
        fields[i].index = i;
    }
    Table t;
    t.id_ = std::move(table_id);
    t.fields_ = std::move(fields);
    t.n_rows_ = rows;
    return t;
}

bool Table::same_values(const Table& other) const {
    if (n_fields() != other.n_fields() || n_rows_ != other.n_rows_) return false;
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].values != other.fields_[i].values) return false;
    return true;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SchemaKey::SchemaKey(std::string canonical)
    : canonical_(std::move(canonical)), digest_(fnv1a64(canonical_)) {}

SchemaKey schema_key(const Table& table) {
    // Length-prefixed headers keep the encoding injective.
    std::string canonical = std::to_string(table.n_fields());
    for (const Field& f : table.fields()) {
        canonical += '|';
        canonical += std::to_string(static_cast<int>(f.type));
        canonical += ':';
        canonical += std::to_string(f.header.size());
        canonical += ':';
        canonical += f.header;
    }
    return SchemaKey(std::move(canonical));
}

namespace {

std::vector<std::vector<std::string>> parse_csv_rows(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    cell += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get(c);
            row.push_back(std::move(cell));
            cell.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            cell += c;
        }
    }
    if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quoted CSV cell");
    if (any) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    // Blank lines carry no data.
    std::erase_if(rows, [](const auto& r) { return r.size() == 1 && trim(r[0]).empty(); });
    return rows;
}

}  // namespace

Table read_csv(std::istream& in, std::string table_id) {
    auto rows = parse_csv_rows(in);
    if (rows.empty()) throw Error(ErrorCode::ParseError, "CSV has no header row");
    const auto& header = rows.front();
    std::vector<Field> fields(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) fields[i].header = std::string(trim(header[i]));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() > header.size())
            throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(r + 1) + " has " +
                                                   std::to_string(row.size()) + " cells, header has " +
                                                   std::to_string(header.size()));
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string_view raw = i < row.size() ? trim(row[i]) : std::string_view{};
            if (raw.empty()) fields[i].values.emplace_back(std::monostate{});
            else if (auto v = parse_number(raw)) fields[i].values.emplace_back(*v);
            else fields[i].values.emplace_back(std::string(raw));
        }
    }
    for (Field& f : fields) f.type = infer_field_type(f.values, f.header);
    assign_default_roles(fields);
    return Table::make(std::move(table_id), std::move(fields));
}

Table read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    auto slash = path.find_last_of('/');
    return read_csv(in, slash == std::string::npos ? path : path.substr(slash + 1));
}

}  // namespace t2c
