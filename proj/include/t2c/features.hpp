#pragma once

#include "t2c/grammar.hpp"
#include "t2c/table.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace t2c {

inline constexpr std::size_t kDataFeatureCount = 31;
inline constexpr std::size_t kTokenTypeCount = 10;  // PADDING SEP FIELD GRP + six chart types
inline constexpr std::size_t kGroupingCount = 3;    // Invalid Cluster Stack
inline constexpr std::size_t kCategoricalWidth =
    kTokenTypeCount + kSegmentCount + kFieldTypeCount + kFieldRoleCount + kGroupingCount;

enum class DataFeature : std::uint8_t {
    // baseline statistics
    NonMissingRatio, DistinctRatio, Mean, StdDev, Min, Max, Median, SumPositiveRatio, NegativeRatio,
    IntegerRatio, MonotonicIncConf, MonotonicDecConf, BenfordDeviation, FirstTokenIsUpperRatio,
    AvgWordCount, LeadingZeroRatio,
    // distribution and shape statistics
    SumIsIn01, SumIsIn0100, Range, Variance, Covariance, AbsoluteCardinality, MedianLength,
    LengthStdDev, AvgLogLength, ArithmeticProgressionConfidence, GeometricProgressionConfidence,
    Skewness, Kurtosis, GiniCoefficient, NRows,
};

std::string_view data_feature_name(std::size_t i);
/// Bounded features already lie in [0,1] and skip percentile normalization.
bool data_feature_bounded(std::size_t i);

using DataFeatures = std::array<double, kDataFeatureCount>;

/// Unnormalized statistics of one field.
DataFeatures raw_data_features(const Field& field, std::size_t n_rows);

/// Per-feature 99th percentile (nearest rank) over a corpus; divides unbounded features.
struct FeatureNorms {
    DataFeatures p99{};

    static FeatureNorms identity();
};

FeatureNorms fit_feature_norms(std::span<const TablePtr> tables);
FeatureNorms fit_feature_norms(std::span<const Table> tables);

/// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value (integer rank arithmetic).
double nearest_rank_percentile(std::vector<double> values, int percent);

/// Raw statistics normalized: unbounded ones divided by max(p99, 1e-9) and clipped to [0, 1.5].
DataFeatures compute_data_features(const Field& field, std::size_t n_rows, const FeatureNorms& norms);

/// Header embedding: mean of per-word vectors.
class SemanticEmbedder {
public:
    enum class Kind { HashedNgram, PretrainedFile };

    static SemanticEmbedder hashed(std::size_t dim = 50);
    /// Reads `word v1 ... vd` lines; the first line may be a `count dim` header.
    static SemanticEmbedder pretrained(const std::string& path);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    const std::string& source() const { return source_; }

    std::vector<float> embed_header(std::string_view header) const;
    std::vector<float> embed_word(std::string_view word) const;  // lowercased input expected

    static std::vector<std::string> split_words(std::string_view header);

private:
    Kind kind_ = Kind::HashedNgram;
    std::size_t dim_ = 50;
    std::string source_;
    std::unordered_map<std::string, std::vector<float>> vectors_;
};

/// Everything about a table's fields the token embedding needs, computed once per table.
struct TableFeatures {
    std::vector<std::vector<float>> semantic;  // per field, embedder dim
    std::vector<std::array<float, kDataFeatureCount>> data;
};

class FeatureExtractor {
public:
    FeatureExtractor(SemanticEmbedder embedder, FeatureNorms norms)
        : embedder_(std::move(embedder)), norms_(norms) {}

    const SemanticEmbedder& embedder() const { return embedder_; }
    const FeatureNorms& norms() const { return norms_; }

    std::size_t raw_width() const { return embedder_.dim() + kCategoricalWidth + kDataFeatureCount; }

    TableFeatures table_features(const Table& table) const;

    /// Writes [semantic | token type | segment | field type | field role | grouping | data] into `out`.
    /// Field tokens use the field's semantic and data features; other tokens carry zeros there.
    void token_features(const Table& table, const TableFeatures& tf, ActionToken token, Segment segment,
                        std::span<float> out) const;

private:
    SemanticEmbedder embedder_;
    FeatureNorms norms_;
};

}  // namespace t2c
