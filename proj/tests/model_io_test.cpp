#include "support/gradcheck.hpp"
#include "t2c/error.hpp"
#include "t2c/model_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace t2c;

namespace {

std::unique_ptr<Model> sample_model(std::uint64_t seed) {
    FeatureNorms norms = FeatureNorms::identity();
    for (std::size_t i = 0; i < norms.p99.size(); ++i) norms.p99[i] = 1.0 + 0.25 * static_cast<double>(i);
    return std::make_unique<Model>(nn::ModelConfig::from_preset("tiny"),
                                   FeatureExtractor(SemanticEmbedder::hashed(50), norms), seed);
}

std::string saved(const Model& m) {
    std::ostringstream out(std::ios::binary);
    save_model(m, out);
    return out.str();
}

}  // namespace

TEST(ModelIo, RoundTripKeepsEverything) {
    const auto m = sample_model(17);
    const std::string bytes = saved(*m);
    EXPECT_EQ(bytes.rfind(std::string(kModelMagic) + "\n", 0), 0u);

    std::istringstream in(bytes, std::ios::binary);
    const auto back = load_model(in);
    EXPECT_EQ(back->config().preset, "tiny");
    EXPECT_EQ(back->config().encoder_hidden, m->config().encoder_hidden);
    EXPECT_EQ(back->params().values(), m->params().values());
    EXPECT_EQ(back->features().norms().p99, m->features().norms().p99);
    EXPECT_EQ(back->features().embedder().dim(), 50u);

    const Table t = oracle::gradcheck_table();
    for (const char* s : {"[Bar]", "[Line] (1) [SEP]"}) {
        const auto state = parse_sequence(s, t);
        EXPECT_EQ(q_values(*m, t, state), q_values(*back, t, state)) << s;
    }
    EXPECT_EQ(saved(*back), bytes);
}

TEST(ModelIo, RejectsDamagedFiles) {
    const std::string bytes = saved(*sample_model(2));
    auto load = [](const std::string& b) {
        std::istringstream in(b, std::ios::binary);
        return load_model(in);
    };
    auto code_of = [&](const std::string& b) {
        try {
            load(b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::NotFound;
    };
    EXPECT_EQ(code_of("T2C-MODEL-v0\n" + bytes.substr(13)), ErrorCode::ParseError);
    EXPECT_EQ(code_of(bytes.substr(0, bytes.size() - 5)), ErrorCode::ParseError);
    EXPECT_EQ(code_of(bytes.substr(0, 30)), ErrorCode::ParseError);
    EXPECT_EQ(code_of(""), ErrorCode::ParseError);

    // A header that promises a different architecture must not load.
    std::string tampered = bytes;
    const auto pos = tampered.find("\"encoder_hidden\":32");
    ASSERT_NE(pos, std::string::npos);
    tampered.replace(pos, 19, "\"encoder_hidden\":31");
    EXPECT_EQ(code_of(tampered), ErrorCode::DimensionMismatch);

    EXPECT_THROW(load_model_file("/nonexistent/model.t2c"), Error);
}
