#include "t2c/dqn_scorer.hpp"

#include "t2c/error.hpp"

namespace t2c {

namespace {

class DqnSession final : public ScorerSession {
public:
    DqnSession(const Model& model, const Table& table)
        : model_(model), table_(table), tf_(model.features().table_features(table)), tape_(model.params()),
          enc_(model.encode(tape_, table_, tf_)) {}

    std::vector<double> score(std::span<const ActionToken> state, std::span<const ActionToken> actions) override {
        const nn::Var z = decoder_state(state);
        const nn::Var u = model_.action_logits(tape_, enc_, z, actions);
        std::vector<double> out;
        out.reserve(actions.size());
        for (float x : tape_.value(u)) out.push_back(nn::Tape<float>::sigm(x));
        return out;
    }

private:
    nn::Var decoder_state(std::span<const ActionToken> state) {
        if (state.empty()) return enc_.z0;
        ChartSequence key(state.begin(), state.end());
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const nn::Var prev = decoder_state(state.first(state.size() - 1));
        const Segment seg = segment_types(state).back();
        const nn::Var z = model_.step(tape_, enc_, prev, state.back(), seg);
        cache_.emplace(std::move(key), z);
        return z;
    }

    const Model& model_;
    const Table& table_;
    TableFeatures tf_;
    nn::Tape<float> tape_;
    Model::Encoded enc_;
    std::map<ChartSequence, nn::Var> cache_;
};

}  // namespace

std::unique_ptr<ScorerSession> DqnScorer::open(const Table& table) const {
    return std::make_unique<DqnSession>(*model_, table);
}

std::map<ActionToken, float> q_values(const Model& model, const Table& table, std::span<const ActionToken> state,
                                      const HardConstraints& constraints) {
    if (!is_legal_prefix(table, state, constraints))
        throw Error(ErrorCode::IllegalState, "not a legal prefix: '" + serialize_sequence(state) + "'");
    std::map<ActionToken, float> out;
    const auto actions = legal_actions(table, state, constraints);
    if (actions.empty()) return out;
    const TableFeatures tf = model.features().table_features(table);
    nn::Tape<float> tape(model.params());
    const auto enc = model.encode(tape, table, tf);
    const nn::Var u = model.action_logits(tape, enc, model.run(tape, enc, state), actions);
    const auto vals = tape.value(u);
    for (std::size_t i = 0; i < actions.size(); ++i) out.emplace(actions[i], nn::Tape<float>::sigm(vals[i]));
    return out;
}

}  // namespace t2c
