#include "t2c/corpus.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace t2c {

using nlohmann::json;

json table_to_json(const Table& table) {
    json fields = json::array();
    for (const Field& f : table.fields()) {
        json values = json::array();
        for (const Cell& c : f.values) {
            if (const auto* d = std::get_if<double>(&c)) values.push_back(*d);
            else if (const auto* s = std::get_if<std::string>(&c)) values.push_back(*s);
            else values.push_back(nullptr);
        }
        fields.push_back({{"name", f.header},
                          {"type", std::string(to_string(f.type))},
                          {"role", std::string(to_string(f.role))},
                          {"values", std::move(values)}});
    }
    return {{"tableId", table.id()}, {"fields", std::move(fields)}};
}

Table table_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "table must be a JSON object");
    const auto fit = j.find("fields");
    if (fit == j.end() || !fit->is_array()) throw Error(ErrorCode::ParseError, "table needs a 'fields' array");
    std::vector<Field> fields;
    bool any_role = false;
    for (const json& jf : *fit) {
        if (!jf.is_object()) throw Error(ErrorCode::ParseError, "field must be a JSON object");
        Field f;
        f.header = jf.value("name", std::string());
        const auto vit = jf.find("values");
        if (vit == jf.end() || !vit->is_array()) throw Error(ErrorCode::ParseError, "field needs a 'values' array");
        for (const json& v : *vit) {
            if (v.is_null()) f.values.emplace_back();
            else if (v.is_number()) f.values.emplace_back(v.get<double>());
            else if (v.is_string()) f.values.emplace_back(v.get<std::string>());
            else if (v.is_boolean()) f.values.emplace_back(v.get<bool>() ? "true" : "false");
            else throw Error(ErrorCode::ParseError, "unsupported value in field '" + f.header + "'");
        }
        if (const auto t = jf.find("type"); t != jf.end() && !t->is_null()) {
            const auto parsed = parse_field_type(t->get<std::string>());
            if (!parsed) throw Error(ErrorCode::ParseError, "unknown field type '" + t->get<std::string>() + "'");
            f.type = *parsed;
        } else {
            f.type = infer_field_type(f.values, f.header);
        }
        if (const auto r = jf.find("role"); r != jf.end() && !r->is_null()) {
            const auto parsed = parse_field_role(r->get<std::string>());
            if (!parsed) throw Error(ErrorCode::ParseError, "unknown field role '" + r->get<std::string>() + "'");
            f.role = *parsed;
            any_role = true;
        }
        fields.push_back(std::move(f));
    }
    if (!any_role) assign_default_roles(fields);
    return Table::make(j.value("tableId", std::string()), std::move(fields));
}

json entry_to_json(const CorpusEntry& entry) {
    json j = table_to_json(*entry.table);
    json charts = json::array();
    for (const ChartSequence& c : entry.charts) charts.push_back(serialize_sequence(c));
    j["charts"] = std::move(charts);
    return j;
}

CorpusEntry entry_from_json(const json& j) {
    CorpusEntry e;
    e.table = std::make_shared<const Table>(table_from_json(j));
    if (const auto c = j.find("charts"); c != j.end()) {
        if (!c->is_array()) throw Error(ErrorCode::ParseError, "'charts' must be an array");
        for (const json& s : *c) {
            ChartSequence seq = parse_sequence(s.get<std::string>(), *e.table);
            if (!is_complete(seq)) throw Error(ErrorCode::IllegalState, "incomplete chart '" + s.get<std::string>() + "'");
            e.charts.push_back(std::move(seq));
        }
    }
    std::sort(e.charts.begin(), e.charts.end());
    e.charts.erase(std::unique(e.charts.begin(), e.charts.end()), e.charts.end());
    return e;
}

Corpus read_corpus(std::istream& in) {
    Corpus out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "corpus line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), "corpus line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

Corpus read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open corpus '" + path + "'");
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const CorpusEntry& e : corpus) out << entry_to_json(e).dump() << '\n';
}

void write_corpus_file(const std::string& path, const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write corpus '" + path + "'");
    write_corpus(out, corpus);
}

Corpus dedup(const Corpus& corpus) {
    Corpus out;
    std::unordered_map<SchemaKey, std::vector<std::size_t>> groups;
    for (const CorpusEntry& e : corpus) {
        auto& members = groups[schema_key(*e.table)];
        CorpusEntry* target = nullptr;
        for (std::size_t i : members)
            if (out[i].table->same_values(*e.table)) target = &out[i];
        if (!target) {
            members.push_back(out.size());
            out.push_back({e.table, {}});
            target = &out.back();
        }
        target->charts.insert(target->charts.end(), e.charts.begin(), e.charts.end());
    }
    for (CorpusEntry& e : out) {
        std::sort(e.charts.begin(), e.charts.end());
        e.charts.erase(std::unique(e.charts.begin(), e.charts.end()), e.charts.end());
    }
    return out;
}

std::string chart_shape(const Table& table, const ChartSequence& chart) {
    const ChartParts p = decompose(chart);
    auto types = [&](const std::vector<std::size_t>& fs) {
        std::vector<std::string_view> names;
        for (std::size_t f : fs) names.push_back(to_string(table.field(f).type));
        std::sort(names.begin(), names.end());
        std::string s;
        for (auto n : names) s.append(n).push_back(',');
        return s;
    };
    std::string shape(to_string(p.type.value_or(ChartType::Line)));
    shape += "|y:" + types(p.y) + "|x:" + types(p.x);
    if (p.terminator) shape += "|" + to_string(*p.terminator);
    return shape;
}

Corpus down_sample(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "down_sample needs k >= 1");
    // (schema, shape) -> entries holding a chart of that shape, in corpus order.
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> keys;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::string schema = schema_key(*corpus[i].table).canonical();
        for (const ChartSequence& c : corpus[i].charts) {
            auto& v = keys[{schema, chart_shape(*corpus[i].table, c)}];
            if (v.empty() || v.back() != i) v.push_back(i);
        }
    }
    std::set<std::pair<std::size_t, std::string>> kept;  // (entry, shape)
    std::mt19937_64 rng(seed);
    for (auto& [key, members] : keys) {
        if (members.size() > k) {
            std::shuffle(members.begin(), members.end(), rng);
            members.resize(k);
        }
        for (std::size_t i : members) kept.emplace(i, key.second);
    }
    Corpus out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CorpusEntry e{corpus[i].table, {}};
        for (const ChartSequence& c : corpus[i].charts)
            if (kept.count({i, chart_shape(*e.table, c)})) e.charts.push_back(c);
        if (!e.charts.empty()) out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(sum > 0)) throw Error(ErrorCode::InvalidArgument, "weights must have a positive sum");
    std::vector<std::size_t> out(weights.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0) throw Error(ErrorCode::InvalidArgument, "weights must be non-negative");
        const double exact = static_cast<double>(total) * weights[i] / sum;
        out[i] = static_cast<std::size_t>(std::floor(exact));
        used += out[i];
        rema.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; used < total; ++j, ++used) ++out[rema[j % rema.size()].second];
    return out;
}

CorpusSplits split(const Corpus& corpus, const SplitSpec& spec) {
    for (double r : spec.ratios)
        if (!(r > 0)) throw Error(ErrorCode::InvalidArgument, "split ratios must be positive");
    std::map<SchemaKey, std::vector<std::size_t>> by_schema;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_schema[schema_key(*corpus[i].table)].push_back(i);
    if (by_schema.size() < 3)
        throw Error(ErrorCode::TooFewSchemas, "split needs at least 3 schemas, got " + std::to_string(by_schema.size()));

    std::vector<const std::vector<std::size_t>*> schemas;
    for (const auto& [key, members] : by_schema) schemas.push_back(&members);
    std::mt19937_64 rng(spec.seed);
    std::shuffle(schemas.begin(), schemas.end(), rng);

    auto counts = apportion(schemas.size(), spec.ratios);
    for (std::size_t s = 0; s < 3; ++s) {
        if (counts[s] > 0) continue;
        const auto donor = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        --counts[donor];
        ++counts[s];
    }
    CorpusSplits out;
    Corpus* parts[3] = {&out.train, &out.valid, &out.test};
    std::size_t next = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < counts[s]; ++j, ++next)
            idx.insert(idx.end(), schemas[next]->begin(), schemas[next]->end());
        std::sort(idx.begin(), idx.end());
        for (std::size_t i : idx) parts[s]->push_back(corpus[i]);
    }
    return out;
}

std::array<std::size_t, 6> chart_type_counts(const Corpus& corpus) {
    std::array<std::size_t, 6> n{};
    for (const CorpusEntry& e : corpus)
        for (const ChartSequence& c : e.charts) ++n[static_cast<std::size_t>(c.front().chart_type())];
    return n;
}

}  // namespace t2c
