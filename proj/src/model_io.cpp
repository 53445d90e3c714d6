#include "t2c/model_io.hpp"

#include "t2c/error.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace t2c {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "model files are written little-endian");

json config_json(const nn::ModelConfig& c) {
    return {{"preset", c.preset},
            {"encoder_layers", c.encoder_layers},
            {"decoder_layers", c.decoder_layers},
            {"encoder_input", c.encoder_input},
            {"decoder_input", c.decoder_input},
            {"encoder_hidden", c.encoder_hidden},
            {"decoder_hidden", c.decoder_hidden}};
}

nn::ModelConfig config_from(const json& j) {
    nn::ModelConfig c;
    c.preset = j.at("preset").get<std::string>();
    c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    c.decoder_layers = j.at("decoder_layers").get<std::size_t>();
    c.encoder_input = j.at("encoder_input").get<std::size_t>();
    c.decoder_input = j.at("decoder_input").get<std::size_t>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    return c;
}

json embedder_json(const SemanticEmbedder& e) {
    return {{"kind", e.kind() == SemanticEmbedder::Kind::HashedNgram ? "hashed" : "pretrained"},
            {"dim", e.dim()},
            {"source", e.source()}};
}

SemanticEmbedder embedder_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto dim = j.at("dim").get<std::size_t>();
    if (kind == "hashed") return SemanticEmbedder::hashed(dim);
    if (kind != "pretrained") throw Error(ErrorCode::ParseError, "unknown embedder kind '" + kind + "'");
    auto e = SemanticEmbedder::pretrained(j.at("source").get<std::string>());
    if (e.dim() != dim)
        throw Error(ErrorCode::DimensionMismatch, "word vectors have dim " + std::to_string(e.dim()) +
                                                      ", model expects " + std::to_string(dim));
    return e;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
    const auto& params = model.params();
    json tensors = json::array();
    for (const auto& e : params.entries())
        tensors.push_back({{"name", e.name}, {"offset", e.offset}, {"rows", e.rows}, {"cols", e.cols}});
    const auto& p99 = model.features().norms().p99;
    const json header = {{"config", config_json(model.config())},
                         {"norms", std::vector<double>(p99.begin(), p99.end())},
                         {"embedder", embedder_json(model.features().embedder())},
                         {"tensors", tensors},
                         {"count", params.size()}};
    const std::string h = header.dump();
    const std::uint64_t len = h.size();
    out << kModelMagic << '\n';
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(params.values().data()),
              static_cast<std::streamsize>(params.size() * sizeof(float)));
    if (!out) throw Error(ErrorCode::IoError, "failed to write model");
}

void save_model_file(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    save_model(model, out);
}

std::unique_ptr<Model> load_model(std::istream& in) {
    std::string magic(kModelMagic.size() + 1, '\0');
    if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) ||
        magic != std::string(kModelMagic) + '\n')
        throw Error(ErrorCode::ParseError, "not a model file (bad magic)");
    std::uint64_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > (1u << 26))
        throw Error(ErrorCode::ParseError, "truncated or oversized model header");
    std::string h(len, '\0');
    if (!in.read(h.data(), static_cast<std::streamsize>(len))) throw Error(ErrorCode::ParseError, "truncated model header");

    json header;
    try {
        header = json::parse(h);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model header: ") + e.what());
    }
    try {
        FeatureNorms norms;
        const auto p99 = header.at("norms").get<std::vector<double>>();
        if (p99.size() != norms.p99.size()) throw Error(ErrorCode::DimensionMismatch, "feature norm count differs");
        std::copy(p99.begin(), p99.end(), norms.p99.begin());
        auto model = std::make_unique<Model>(config_from(header.at("config")),
                                             FeatureExtractor(embedder_from(header.at("embedder")), norms), 0);
        auto& params = model->params();
        if (header.at("count").get<std::size_t>() != params.size())
            throw Error(ErrorCode::DimensionMismatch, "parameter count differs from the configured architecture");

        std::vector<float> payload(params.size());
        if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float))))
            throw Error(ErrorCode::ParseError, "truncated parameter payload");
        if (header.at("tensors").size() != params.entries().size())
            throw Error(ErrorCode::DimensionMismatch, "tensor count differs from the configured architecture");
        // Tensors are matched by name so the stored order need not match the build order.
        for (const json& t : header.at("tensors")) {
            const auto id = params.find(t.at("name").get<std::string>());
            const auto& e = params.entry(id);
            const auto off = t.at("offset").get<std::size_t>();
            if (t.at("rows").get<std::size_t>() != e.rows || t.at("cols").get<std::size_t>() != e.cols ||
                off + e.size() > payload.size())
                throw Error(ErrorCode::DimensionMismatch, "tensor shape differs: " + e.name);
            std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), e.size(), params.data(id).begin());
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model header: ") + e.what());
    }
}

std::unique_ptr<Model> load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open model '" + path + "'");
    return load_model(in);
}

}  // namespace t2c
