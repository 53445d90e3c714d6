#pragma once

// Encoder-decoder Q-network with a copy head. The encoder is a bidirectional
// GRU over field token embeddings (memory M); the decoder is a GRU whose input
// fuses a selective read of M, an attention context over M and the embedding
// of the previous token. Command tokens are scored by a generate head, fields
// by a copy head; each action gets an independent two-logit probability.

#include "t2c/features.hpp"
#include "t2c/grammar.hpp"
#include "t2c/tape.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace t2c::nn {

struct ModelConfig {
    std::string preset = "tiny";
    std::size_t encoder_layers = 1;
    std::size_t decoder_layers = 1;
    std::size_t encoder_input = 64;
    std::size_t decoder_input = 64;
    std::size_t encoder_hidden = 32;
    std::size_t decoder_hidden = 32;

    /// tiny | small | medium | large
    static ModelConfig from_preset(const std::string& name);
};

/// Parameters whose name starts with this prefix belong to the shared table encoder
/// (token-embedding projection included).
inline constexpr std::string_view kEncoderPrefix = "encoder.";

template <class T>
class DqnModel {
public:
    struct Encoded {
        const Table* table = nullptr;
        const TableFeatures* features = nullptr;
        std::vector<Var> memory;     // h_tau, 2 * encoder_hidden each
        std::vector<Var> attn_keys;  // W_att h_tau
        std::vector<Var> copy_keys;  // tanh(W_copy h_tau + b)
        Var z0;
        Var zero_read;
    };

    DqnModel(ModelConfig config, FeatureExtractor features, std::uint64_t seed)
        : config_(std::move(config)), features_(std::move(features)) {
        if (config_.decoder_layers != 1)
            throw Error(ErrorCode::InvalidArgument, "decoder_layers must be 1");
        if (config_.encoder_layers < 1) throw Error(ErrorCode::InvalidArgument, "encoder_layers must be >= 1");
        build();
        params_.init_uniform(seed);
    }

    const ModelConfig& config() const { return config_; }
    const FeatureExtractor& features() const { return features_; }
    ParamStore<T>& params() { return params_; }
    const ParamStore<T>& params() const { return params_; }

    std::size_t parameter_count() const { return params_.size(); }
    std::size_t encoder_parameter_count() const {
        std::size_t n = 0;
        for (const auto& e : params_.entries())
            if (e.name.starts_with(kEncoderPrefix)) n += e.size();
        return n;
    }
    std::size_t decoder_parameter_count() const { return parameter_count() - encoder_parameter_count(); }

    /// 1 for every scalar the optimizer may update.
    std::vector<std::uint8_t> trainable_mask(bool freeze_encoder) const {
        std::vector<std::uint8_t> mask(params_.size(), 1);
        if (!freeze_encoder) return mask;
        for (const auto& e : params_.entries())
            if (e.name.starts_with(kEncoderPrefix))
                std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(e.offset), e.size(), 0);
        return mask;
    }

    /// Copies every encoder parameter from `other` (same config required).
    void copy_encoder_from(const DqnModel& other) {
        for (const auto& e : params_.entries()) {
            if (!e.name.starts_with(kEncoderPrefix)) continue;
            const auto src = other.params().data(other.params().find(e.name));
            auto dst = params_.data(params_.find(e.name));
            if (src.size() != dst.size()) throw Error(ErrorCode::DimensionMismatch, "encoder shape differs: " + e.name);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }

    Encoded encode(Tape<T>& tape, const Table& table, const TableFeatures& tf) const {
        const std::size_t n = table.n_fields();
        if (n == 0) throw Error(ErrorCode::InvalidArgument, "cannot encode an empty table");
        if (n > kDefaultMaxFields)
            throw Error(ErrorCode::TooManyFields, "table has " + std::to_string(n) + " fields");
        Encoded enc;
        enc.table = &table;
        enc.features = &tf;
        std::vector<Var> layer_in(n);
        for (std::size_t i = 0; i < n; ++i)
            layer_in[i] = embed(tape, table, tf, ActionToken::field(i), Segment::Padding);

        const std::size_t H = config_.encoder_hidden;
        for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
            const auto& fw = enc_gru_[l][0];
            const auto& bw = enc_gru_[l][1];
            std::vector<Var> fwd(n), bwd(n);
            Var h = tape.zeros(H);
            for (std::size_t i = 0; i < n; ++i) fwd[i] = h = tape.gru(layer_in[i], h, fw.wi, fw.wh, fw.bi, fw.bh);
            h = tape.zeros(H);
            for (std::size_t i = n; i-- > 0;) bwd[i] = h = tape.gru(layer_in[i], h, bw.wi, bw.wh, bw.bi, bw.bh);
            for (std::size_t i = 0; i < n; ++i) {
                const Var parts[2] = {fwd[i], bwd[i]};
                layer_in[i] = tape.concat(parts);
            }
        }
        enc.memory = std::move(layer_in);
        enc.attn_keys.reserve(n);
        enc.copy_keys.reserve(n);
        for (Var h : enc.memory) {
            enc.attn_keys.push_back(tape.affine(attn_w_, -1, h));
            enc.copy_keys.push_back(tape.tanh(tape.affine(copy_w_, static_cast<std::int64_t>(copy_b_), h)));
        }
        enc.z0 = tape.tanh(tape.affine(init_w_, static_cast<std::int64_t>(init_b_), tape.mean(enc.memory)));
        enc.zero_read = tape.zeros(2 * H);
        return enc;
    }

    struct StepDetail {
        Var read;     // selective read: h_tau after a field token, zeros otherwise
        Var weights;  // attention over the memory
        Var z;
    };

    /// One decoder step: consumes `prev` (the last token of the state) and returns z_t.
    Var step(Tape<T>& tape, const Encoded& enc, Var z_prev, ActionToken prev, Segment prev_segment) const {
        return step_detail(tape, enc, z_prev, prev, prev_segment).z;
    }

    StepDetail step_detail(Tape<T>& tape, const Encoded& enc, Var z_prev, ActionToken prev,
                           Segment prev_segment) const {
        const Var read = prev.is_field() ? enc.memory.at(prev.field_index()) : enc.zero_read;
        std::vector<Var> logits;
        logits.reserve(enc.attn_keys.size());
        for (Var k : enc.attn_keys) logits.push_back(tape.dot(z_prev, k));
        const Var weights = tape.softmax(tape.concat(logits));
        const Var context = tape.weighted_sum(weights, enc.memory);
        const Var emb = embed(tape, *enc.table, *enc.features, prev, prev_segment);
        const Var parts[3] = {read, context, emb};
        const Var p = tape.affine(dec_in_w_, static_cast<std::int64_t>(dec_in_b_), tape.concat(parts));
        return {read, weights, tape.gru(p, z_prev, dec_gru_.wi, dec_gru_.wh, dec_gru_.bi, dec_gru_.bh)};
    }

    /// Runs the decoder over the whole state (which starts with its chart type token).
    Var run(Tape<T>& tape, const Encoded& enc, std::span<const ActionToken> state) const {
        const auto segs = segment_types(state);
        Var z = enc.z0;
        for (std::size_t t = 0; t < state.size(); ++t) z = step(tape, enc, z, state[t], segs[t]);
        return z;
    }

    /// Logit differences u(a) for `actions` (code-sorted); score(a) = sigmoid(u(a)).
    Var action_logits(Tape<T>& tape, const Encoded& enc, Var z, std::span<const ActionToken> actions) const {
        std::vector<std::int32_t> commands;
        std::vector<Var> parts;
        for (ActionToken a : actions)
            if (a.is_command()) commands.push_back(static_cast<std::int32_t>(a.code()));
        if (!commands.empty()) {
            const Var gen = tape.pair_diff(tape.affine(gen_w_, static_cast<std::int64_t>(gen_b_), z));
            parts.push_back(tape.gather(gen, commands));
        }
        Var bias;
        for (ActionToken a : actions) {
            if (!a.is_field()) continue;
            if (!bias.valid()) bias = tape.param(copy_bias_);
            parts.push_back(tape.sub(tape.dot(z, enc.copy_keys.at(a.field_index())), bias));
        }
        if (parts.empty()) throw Error(ErrorCode::IllegalState, "no actions to score");
        return parts.size() == 1 ? parts[0] : tape.concat(parts);
    }

    /// Generate-head scores for all command tokens and copy scores for all fields.
    std::pair<std::vector<T>, std::vector<T>> all_scores(Tape<T>& tape, const Encoded& enc, Var z) const {
        std::vector<ActionToken> cmds, fields;
        for (std::uint32_t c = 0; c < ActionToken::kCommandCount; ++c) cmds.push_back(ActionToken::from_code(c));
        for (std::size_t f = 0; f < enc.memory.size(); ++f) fields.push_back(ActionToken::field(f));
        auto probs = [&](std::span<const ActionToken> acts) {
            std::vector<T> out;
            for (T u : tape.value(action_logits(tape, enc, z, acts))) out.push_back(Tape<T>::sigm(u));
            return out;
        };
        return {probs(cmds), probs(fields)};
    }

    Var embed(Tape<T>& tape, const Table& table, const TableFeatures& tf, ActionToken token, Segment seg) const {
        std::vector<float> raw(features_.raw_width());
        features_.token_features(table, tf, token, seg, raw);
        std::vector<T> rawT(raw.begin(), raw.end());
        return tape.affine(proj_w_, static_cast<std::int64_t>(proj_b_), tape.input(rawT));
    }

private:
    struct GruIds {
        std::size_t wi, wh, bi, bh;
    };

    GruIds add_gru(const std::string& prefix, std::size_t in, std::size_t hidden) {
        return {params_.add(prefix + ".Wi", 3 * hidden, in), params_.add(prefix + ".Wh", 3 * hidden, hidden),
                params_.add(prefix + ".bi", 3 * hidden, 1), params_.add(prefix + ".bh", 3 * hidden, 1)};
    }

    void build() {
        const std::size_t raw = features_.raw_width();
        const std::size_t Ein = config_.encoder_input, He = config_.encoder_hidden;
        const std::size_t Din = config_.decoder_input, Hd = config_.decoder_hidden;
        proj_w_ = params_.add("encoder.embed.W", Ein, raw);
        proj_b_ = params_.add("encoder.embed.b", Ein, 1);
        for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
            const std::size_t in = l == 0 ? Ein : 2 * He;
            const std::string base = "encoder.gru" + std::to_string(l);
            enc_gru_.push_back({add_gru(base + ".fwd", in, He), add_gru(base + ".bwd", in, He)});
        }
        init_w_ = params_.add("decoder.init.W", Hd, 2 * He);
        init_b_ = params_.add("decoder.init.b", Hd, 1);
        attn_w_ = params_.add("decoder.attn.W", Hd, 2 * He);
        dec_in_w_ = params_.add("decoder.input.W", Din, 4 * He + Ein);
        dec_in_b_ = params_.add("decoder.input.b", Din, 1);
        dec_gru_ = add_gru("decoder.gru0", Din, Hd);
        copy_w_ = params_.add("decoder.copy.W", Hd, 2 * He);
        copy_b_ = params_.add("decoder.copy.b", Hd, 1);
        copy_bias_ = params_.add("decoder.copy.bias", 1, 1);
        gen_w_ = params_.add("decoder.generate.W", 2 * ActionToken::kCommandCount, Hd);
        gen_b_ = params_.add("decoder.generate.b", 2 * ActionToken::kCommandCount, 1);
    }

    ModelConfig config_;
    FeatureExtractor features_;
    ParamStore<T> params_;
    std::size_t proj_w_ = 0, proj_b_ = 0;
    std::vector<std::array<GruIds, 2>> enc_gru_;
    std::size_t init_w_ = 0, init_b_ = 0, attn_w_ = 0, dec_in_w_ = 0, dec_in_b_ = 0;
    GruIds dec_gru_{};
    std::size_t copy_w_ = 0, copy_b_ = 0, copy_bias_ = 0, gen_w_ = 0, gen_b_ = 0;
};

inline ModelConfig ModelConfig::from_preset(const std::string& name) {
    ModelConfig c;
    c.preset = name;
    if (name == "tiny") {
        c.encoder_layers = 1, c.decoder_layers = 1, c.encoder_input = 64, c.decoder_input = 64;
        c.encoder_hidden = 32, c.decoder_hidden = 32;
    } else if (name == "small") {
        c.encoder_layers = 2, c.decoder_layers = 1, c.encoder_input = 192, c.decoder_input = 192;
        c.encoder_hidden = 128, c.decoder_hidden = 128;
    } else if (name == "medium") {
        c.encoder_layers = 2, c.decoder_layers = 1, c.encoder_input = 320, c.decoder_input = 256;
        c.encoder_hidden = 192, c.decoder_hidden = 192;
    } else if (name == "large") {
        c.encoder_layers = 4, c.decoder_layers = 1, c.encoder_input = 384, c.decoder_input = 512;
        c.encoder_hidden = 224, c.decoder_hidden = 256;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown model preset '" + name + "'");
    }
    return c;
}

}  // namespace t2c::nn
