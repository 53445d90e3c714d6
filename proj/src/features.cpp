#include "t2c/features.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace t2c {

namespace {

constexpr std::string_view kNames[kDataFeatureCount] = {
    "nonMissingRatio", "distinctRatio", "mean", "stdDev", "min", "max", "median", "sumPositiveRatio",
    "negativeRatio", "integerRatio", "monotonicIncConf", "monotonicDecConf", "benfordDeviation",
    "firstTokenIsUpperRatio", "avgWordCount", "leadingZeroRatio", "SumIsIn01", "SumIsIn0100", "Range",
    "Variance", "Covariance", "AbsoluteCardinality", "MedianLength", "LengthStdDev", "AvgLogLength",
    "ArithmeticProgressionConfidence", "GeometricProgressionConfidence", "Skewness", "Kurtosis",
    "GiniCoefficient", "NRows"};

constexpr bool kBounded[kDataFeatureCount] = {
    true,  true,  false, false, false, false, false, true,  true,  true,  true,
    true,  true,  true,  false, true,  true,  true,  false, false, false, false,
    false, false, false, true,  true,  false, false, true,  false};

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string cell_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* d = std::get_if<double>(&c)) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d);
        return ec == std::errc() ? std::string(buf, ptr) : std::string();
    }
    return {};
}

bool nearly_equal(double a, double b) {
    return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Share of consecutive steps equal to the most frequent step.
double progression_confidence(const std::vector<double>& steps) {
    if (steps.size() < 2) return 0.0;
    std::size_t best = 0;
    for (double s : steps) {
        std::size_t k = 0;
        for (double t : steps) k += nearly_equal(s, t);
        best = std::max(best, k);
    }
    return static_cast<double>(best) / static_cast<double>(steps.size());
}

double gini(const std::vector<double>& xs) {
    // Pairwise form over absolute values, n log n via sorting.
    std::vector<double> a;
    a.reserve(xs.size());
    for (double x : xs) a.push_back(std::fabs(x));
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    if (a.empty() || total <= 0) return 0.0;
    std::sort(a.begin(), a.end());
    const auto n = static_cast<double>(a.size());
    double weighted = 0;
    for (std::size_t i = 0; i < a.size(); ++i) weighted += (2.0 * static_cast<double>(i) - n + 1.0) * a[i];
    return weighted / (n * total);
}

double benford_deviation(const std::vector<double>& xs) {
    std::array<double, 10> counts{};
    double total = 0;
    for (double x : xs) {
        double v = std::fabs(x);
        if (v == 0 || !std::isfinite(v)) continue;
        while (v >= 10) v /= 10;
        while (v < 1) v *= 10;
        int d = std::clamp(static_cast<int>(v), 1, 9);
        counts[d] += 1;
        total += 1;
    }
    if (total == 0) return 0.0;
    double dist = 0;
    for (int d = 1; d <= 9; ++d) dist += std::fabs(counts[d] / total - std::log10(1.0 + 1.0 / d));
    return 0.5 * dist;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string_view data_feature_name(std::size_t i) { return kNames[i]; }
bool data_feature_bounded(std::size_t i) { return kBounded[i]; }

DataFeatures raw_data_features(const Field& field, std::size_t n_rows) {
    DataFeatures f{};
    auto set = [&f](DataFeature k, double v) { f[static_cast<std::size_t>(k)] = std::isfinite(v) ? v : 0.0; };
    const bool numeric = field.is_numeric();

    std::vector<std::string> texts;
    std::vector<double> nums;
    std::vector<double> num_rows;
    for (std::size_t r = 0; r < field.values.size(); ++r) {
        const Cell& c = field.values[r];
        if (is_missing(c)) continue;
        texts.push_back(cell_text(c));
        if (numeric) {
            if (auto v = cell_number(c)) {
                nums.push_back(*v);
                num_rows.push_back(static_cast<double>(r));
            }
        }
    }
    const auto present = static_cast<double>(texts.size());
    std::set<std::string> distinct(texts.begin(), texts.end());

    set(DataFeature::NonMissingRatio, n_rows ? present / static_cast<double>(n_rows) : 0.0);
    set(DataFeature::DistinctRatio, present > 0 ? static_cast<double>(distinct.size()) / present : 0.0);
    set(DataFeature::AbsoluteCardinality, static_cast<double>(distinct.size()));
    set(DataFeature::NRows, static_cast<double>(n_rows));

    // String-shape statistics (text form of every present cell).
    if (!texts.empty()) {
        std::vector<double> lengths;
        double upper = 0, words = 0, lead0 = 0, loglen = 0;
        for (const std::string& s : texts) {
            lengths.push_back(static_cast<double>(s.size()));
            loglen += std::log1p(static_cast<double>(s.size()));
            if (!s.empty() && std::isupper(static_cast<unsigned char>(s[0]))) upper += 1;
            if (s.size() > 1 && s[0] == '0' && std::isdigit(static_cast<unsigned char>(s[1]))) lead0 += 1;
            std::istringstream ws(s);
            std::string w;
            while (ws >> w) words += 1;
        }
        const double n = present;
        set(DataFeature::FirstTokenIsUpperRatio, upper / n);
        set(DataFeature::AvgWordCount, words / n);
        set(DataFeature::LeadingZeroRatio, lead0 / n);
        set(DataFeature::MedianLength, median_of(lengths));
        const double mean_len = std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
        double var_len = 0;
        for (double l : lengths) var_len += (l - mean_len) * (l - mean_len);
        set(DataFeature::LengthStdDev, std::sqrt(var_len / n));
        if (!numeric) set(DataFeature::AvgLogLength, loglen / n);
    }

    if (nums.empty()) return f;

    const auto m = static_cast<double>(nums.size());
    const double sum = std::accumulate(nums.begin(), nums.end(), 0.0);
    const double mean = sum / m;
    double m2 = 0, m3 = 0, m4 = 0, abs_sum = 0, pos_sum = 0, neg = 0, ints = 0;
    for (double x : nums) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        abs_sum += std::fabs(x);
        if (x > 0) pos_sum += x;
        if (x < 0) neg += 1;
        if (x == std::floor(x)) ints += 1;
    }
    m2 /= m;
    m3 /= m;
    m4 /= m;
    const double sd = std::sqrt(m2);
    const auto [mn, mx] = std::minmax_element(nums.begin(), nums.end());

    set(DataFeature::Mean, mean);
    set(DataFeature::StdDev, sd);
    set(DataFeature::Min, *mn);
    set(DataFeature::Max, *mx);
    set(DataFeature::Median, median_of(nums));
    set(DataFeature::SumPositiveRatio, abs_sum > 0 ? pos_sum / abs_sum : 0.0);
    set(DataFeature::NegativeRatio, neg / m);
    set(DataFeature::IntegerRatio, ints / m);
    set(DataFeature::BenfordDeviation, benford_deviation(nums));
    set(DataFeature::SumIsIn01, sum >= -1e-9 && sum <= 1.0 + 1e-9 ? 1.0 : 0.0);
    set(DataFeature::SumIsIn0100, sum >= -1e-9 && sum <= 100.0 + 1e-9 ? 1.0 : 0.0);
    set(DataFeature::Range, *mx - *mn);
    set(DataFeature::Variance, m2);
    set(DataFeature::Skewness, sd > 0 ? m3 / (sd * sd * sd) : 0.0);
    set(DataFeature::Kurtosis, sd > 0 ? m4 / (m2 * m2) - 3.0 : 0.0);
    set(DataFeature::GiniCoefficient, gini(nums));

    const double mean_row = std::accumulate(num_rows.begin(), num_rows.end(), 0.0) / m;
    double cov = 0;
    for (std::size_t i = 0; i < nums.size(); ++i) cov += (nums[i] - mean) * (num_rows[i] - mean_row);
    set(DataFeature::Covariance, cov / m);

    if (nums.size() >= 2) {
        double inc = 0, dec = 0;
        std::vector<double> diffs, ratios;
        for (std::size_t i = 0; i + 1 < nums.size(); ++i) {
            if (nums[i + 1] > nums[i]) inc += 1;
            if (nums[i + 1] < nums[i]) dec += 1;
            diffs.push_back(nums[i + 1] - nums[i]);
            if (nums[i] != 0) ratios.push_back(nums[i + 1] / nums[i]);
        }
        const auto pairs = static_cast<double>(nums.size() - 1);
        set(DataFeature::MonotonicIncConf, inc / pairs);
        set(DataFeature::MonotonicDecConf, dec / pairs);
        set(DataFeature::ArithmeticProgressionConfidence, progression_confidence(diffs));
        set(DataFeature::GeometricProgressionConfidence,
            ratios.size() == diffs.size() ? progression_confidence(ratios) : 0.0);
    }
    return f;
}

FeatureNorms FeatureNorms::identity() {
    FeatureNorms n;
    n.p99.fill(1.0);
    return n;
}

double nearest_rank_percentile(std::vector<double> values, int percent) {
    if (values.empty()) throw Error(ErrorCode::EmptyCorpus, "percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;  // ceil(p*n/100)
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

namespace {

template <class Range, class Get>
FeatureNorms fit_norms_impl(const Range& tables, Get get) {
    std::array<std::vector<double>, kDataFeatureCount> columns;
    for (const auto& t : tables) {
        const Table& table = get(t);
        for (const Field& f : table.fields()) {
            const DataFeatures raw = raw_data_features(f, table.n_rows());
            for (std::size_t i = 0; i < kDataFeatureCount; ++i) columns[i].push_back(raw[i]);
        }
    }
    if (columns[0].empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit feature norms on an empty corpus");
    FeatureNorms norms;
    for (std::size_t i = 0; i < kDataFeatureCount; ++i)
        norms.p99[i] = nearest_rank_percentile(std::move(columns[i]), 99);
    return norms;
}

}  // namespace

FeatureNorms fit_feature_norms(std::span<const TablePtr> tables) {
    return fit_norms_impl(tables, [](const TablePtr& t) -> const Table& { return *t; });
}

FeatureNorms fit_feature_norms(std::span<const Table> tables) {
    return fit_norms_impl(tables, [](const Table& t) -> const Table& { return t; });
}

DataFeatures compute_data_features(const Field& field, std::size_t n_rows, const FeatureNorms& norms) {
    DataFeatures f = raw_data_features(field, n_rows);
    for (std::size_t i = 0; i < kDataFeatureCount; ++i) {
        if (kBounded[i]) continue;
        f[i] = std::clamp(f[i] / std::max(norms.p99[i], 1e-9), 0.0, 1.5);
    }
    return f;
}

SemanticEmbedder SemanticEmbedder::hashed(std::size_t dim) {
    SemanticEmbedder e;
    e.kind_ = Kind::HashedNgram;
    e.dim_ = dim;
    return e;
}

SemanticEmbedder SemanticEmbedder::pretrained(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open word vectors '" + path + "'");
    SemanticEmbedder e;
    e.kind_ = Kind::PretrainedFile;
    e.source_ = path;
    e.dim_ = 0;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        std::vector<float> v;
        float x;
        while (ls >> x) v.push_back(x);
        if (first && v.size() == 1) {  // "count dim" header
            first = false;
            continue;
        }
        first = false;
        if (v.empty()) continue;
        if (e.dim_ == 0) e.dim_ = v.size();
        if (v.size() != e.dim_)
            throw Error(ErrorCode::DimensionMismatch, "word '" + word + "' has " + std::to_string(v.size()) +
                                                          " components, expected " + std::to_string(e.dim_));
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        e.vectors_.emplace(std::move(word), std::move(v));
    }
    if (e.dim_ == 0) throw Error(ErrorCode::ParseError, "no vectors in '" + path + "'");
    return e;
}

std::vector<std::string> SemanticEmbedder::split_words(std::string_view header) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : header) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::vector<float> SemanticEmbedder::embed_word(std::string_view word) const {
    std::vector<float> v(dim_, 0.0f);
    if (kind_ == Kind::PretrainedFile) {
        auto it = vectors_.find(std::string(word));
        if (it != vectors_.end()) v = it->second;
        return v;
    }
    const std::string padded = "<" + std::string(word) + ">";
    std::vector<double> acc(dim_, 0.0);
    std::size_t grams = 0;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        const std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3));
        for (std::size_t j = 0; j < dim_; ++j) acc[j] += (splitmix64(h + j) & 1) ? 1.0 : -1.0;
        ++grams;
    }
    double norm = 0;
    for (double a : acc) norm += a * a;
    norm = std::sqrt(norm);
    if (grams == 0 || norm == 0) return v;
    for (std::size_t j = 0; j < dim_; ++j) v[j] = static_cast<float>(acc[j] / norm);
    return v;
}

std::vector<float> SemanticEmbedder::embed_header(std::string_view header) const {
    std::vector<float> out(dim_, 0.0f);
    std::vector<double> acc(dim_, 0.0);
    std::size_t used = 0;
    for (const std::string& w : split_words(header)) {
        if (kind_ == Kind::PretrainedFile && !vectors_.contains(w)) continue;
        const auto v = embed_word(w);
        for (std::size_t j = 0; j < dim_; ++j) acc[j] += v[j];
        ++used;
    }
    if (used == 0) return out;
    for (std::size_t j = 0; j < dim_; ++j) out[j] = static_cast<float>(acc[j] / static_cast<double>(used));
    return out;
}

TableFeatures FeatureExtractor::table_features(const Table& table) const {
    TableFeatures tf;
    tf.semantic.reserve(table.n_fields());
    tf.data.reserve(table.n_fields());
    for (const Field& f : table.fields()) {
        tf.semantic.push_back(embedder_.embed_header(f.header));
        const DataFeatures d = compute_data_features(f, table.n_rows(), norms_);
        std::array<float, kDataFeatureCount> df{};
        for (std::size_t i = 0; i < kDataFeatureCount; ++i) df[i] = static_cast<float>(d[i]);
        tf.data.push_back(df);
    }
    return tf;
}

void FeatureExtractor::token_features(const Table& table, const TableFeatures& tf, ActionToken token,
                                      Segment segment, std::span<float> out) const {
    if (out.size() != raw_width())
        throw Error(ErrorCode::DimensionMismatch, "token feature buffer has wrong width");
    std::fill(out.begin(), out.end(), 0.0f);
    const std::size_t d = embedder_.dim();
    std::size_t off = d;

    // token type: PADDING SEP FIELD GRP Line Bar Scatter Pie Area Radar
    std::size_t token_type = 0;
    if (token.is_sep()) token_type = 1;
    else if (token.is_field()) token_type = 2;
    else if (token.is_grp()) token_type = 3;
    else token_type = 4 + static_cast<std::size_t>(token.chart_type());
    out[off + token_type] = 1.0f;
    off += kTokenTypeCount;

    out[off + static_cast<std::size_t>(segment)] = 1.0f;
    off += kSegmentCount;

    FieldType ft = FieldType::Unknown;
    FieldRole fr = FieldRole::Invalid;
    if (token.is_field()) {
        const Field& f = table.field(token.field_index());
        ft = f.type;
        fr = f.role;
    }
    out[off + static_cast<std::size_t>(ft)] = 1.0f;
    off += kFieldTypeCount;
    out[off + static_cast<std::size_t>(fr)] = 1.0f;
    off += kFieldRoleCount;

    std::size_t grp = 0;
    if (token.is_grp()) grp = token.group_op() == GroupOp::Cluster ? 1 : 2;
    out[off + grp] = 1.0f;
    off += kGroupingCount;

    if (token.is_field()) {
        const std::size_t k = token.field_index();
        std::copy(tf.semantic[k].begin(), tf.semantic[k].end(), out.begin());
        std::copy(tf.data[k].begin(), tf.data[k].end(), out.begin() + static_cast<std::ptrdiff_t>(off));
    }
}

}  // namespace t2c
