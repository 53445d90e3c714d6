#pragma once

// Central finite-difference check of the model's analytic gradients.

#include "t2c/dqn.hpp"
#include "t2c/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace t2c::oracle {

struct GradCheckResult {
    double max_rel_error = 0;
    std::string worst_param;
    std::size_t checked = 0;
    std::size_t groups = 0;
};

inline Table gradcheck_table() {
    auto num = [](std::string h, FieldType t, std::vector<double> xs) {
        Field f;
        f.header = std::move(h);
        f.type = t;
        for (double x : xs) f.values.push_back(Cell{x});
        return f;
    };
    Field city;
    city.header = "City";
    city.type = FieldType::String;
    city.role = FieldRole::Header;
    for (const char* s : {"Oslo", "Rome", "Lima", "Pune"}) city.values.push_back(Cell{std::string(s)});
    return Table::make("gradcheck", {city, num("Sales", FieldType::Decimal, {3, 1, 4, 1}),
                                     num("Year", FieldType::Year, {2001, 2002, 2003, 2004}),
                                     num("Share", FieldType::Decimal, {0.1, 0.2, 0.3, 0.4})});
}

/// Loss over two decoding states that touches every parameter group of the model.
inline double gradcheck_loss(const nn::DqnModel<double>& model, const Table& table, const TableFeatures& tf,
                             std::vector<double>* grad) {
    nn::Tape<double> tape(model.params());
    const auto enc = model.encode(tape, table, tf);
    const std::vector<ChartSequence> states = {parse_sequence("[Bar] (1)", table),
                                               parse_sequence("[Line] (1) (3) [SEP]", table)};
    std::vector<nn::Var> losses;
    std::size_t salt = 0;
    for (const ChartSequence& s : states) {
        const auto actions = legal_actions(table, s, {});
        const nn::Var z = model.run(tape, enc, s);
        const nn::Var u = model.action_logits(tape, enc, z, actions);
        std::vector<double> labels(actions.size());
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = ((i + salt) % 3 == 0) ? 1.0 : 0.0;
        ++salt;
        losses.push_back(tape.bce_logits(u, labels));
    }
    const nn::Var total = tape.weighted_total(losses, 0.5);
    if (grad) {
        grad->assign(model.params().size(), 0.0);
        tape.backward(total, *grad);
    }
    return tape.scalar(total);
}

/// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients from
/// being judged on roundoff alone.
inline GradCheckResult gradient_check(const nn::ModelConfig& config, std::uint64_t seed, std::size_t per_group,
                                      double floor = 1e-6, double h = 1e-4) {
    const Table table = gradcheck_table();
    const FeatureExtractor fx(SemanticEmbedder::hashed(50), FeatureNorms::identity());
    nn::DqnModel<double> model(config, fx, seed);
    const TableFeatures tf = fx.table_features(table);
    std::vector<double> analytic;
    gradcheck_loss(model, table, tf, &analytic);

    GradCheckResult r;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto& values = model.params().values();
    for (const auto& e : model.params().entries()) {
        ++r.groups;
        std::vector<std::size_t> picks(e.size());
        for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = e.offset + i;
        std::shuffle(picks.begin(), picks.end(), rng);
        picks.resize(std::min(per_group, picks.size()));
        for (std::size_t idx : picks) {
            const double keep = values[idx];
            values[idx] = keep + h;
            const double up = gradcheck_loss(model, table, tf, nullptr);
            values[idx] = keep - h;
            const double down = gradcheck_loss(model, table, tf, nullptr);
            values[idx] = keep;
            const double numeric = (up - down) / (2 * h);
            const double a = analytic[idx];
            const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), floor});
            ++r.checked;
            if (rel > r.max_rel_error) {
                r.max_rel_error = rel;
                r.worst_param = e.name + "[" + std::to_string(idx - e.offset) + "]";
            }
        }
    }
    return r;
}

}  // namespace t2c::oracle
