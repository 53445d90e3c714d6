#pragma once

#include "t2c/dqn.hpp"
#include "t2c/search.hpp"

#include <map>
#include <memory>

namespace t2c {

using Model = nn::DqnModel<float>;
using ModelPtr = std::shared_ptr<const Model>;

/// Scores with a trained DQN. Each session encodes its table once and extends cached
/// decoder states by one step per new token.
class DqnScorer final : public Scorer {
public:
    explicit DqnScorer(ModelPtr model) : model_(std::move(model)) {}
    std::unique_ptr<ScorerSession> open(const Table& table) const override;
    const Model& model() const { return *model_; }

private:
    ModelPtr model_;
};

/// Q(s, a) for every legal action of `state`, computed by a fresh decoder rollout.
std::map<ActionToken, float> q_values(const Model& model, const Table& table, std::span<const ActionToken> state,
                                      const HardConstraints& constraints = {});

}  // namespace t2c
