#include "t2c/training.hpp"

#include "t2c/error.hpp"
#include "t2c/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace t2c {

namespace {

std::vector<ChartSequence> regime_targets(const CorpusEntry& e, const Regime& regime) {
    const auto types = regime.types();
    std::vector<ChartSequence> out;
    for (const ChartSequence& c : e.charts)
        if (std::find(types.begin(), types.end(), c.front().chart_type()) != types.end() &&
            is_legal_prefix(*e.table, c, {}))
            out.push_back(c);
    return out;
}

bool labelled_state(std::span<const ActionToken> s, const Regime& regime) {
    return !is_complete(s) && !(regime.single_type() && s.empty());
}

ModelPtr borrow(const Model& m) { return ModelPtr(ModelPtr(), &m); }

}  // namespace

std::vector<ChartType> Regime::types() const {
    if (single_type()) return {type};
    return {kMajorChartTypes.begin(), kMajorChartTypes.end()};
}

std::string Regime::name() const {
    switch (kind) {
        case RegimeKind::Mixed: return "mixed";
        case RegimeKind::Transfer: return "transfer-" + std::string(to_string(type));
        case RegimeKind::Separate: return "separate-" + std::string(to_string(type));
    }
    return "?";
}

std::vector<LabeledStep> make_labeled_steps(const Corpus& corpus, const Regime& regime) {
    if (corpus.empty()) throw Error(ErrorCode::EmptySplit, "no entries to label");
    std::vector<LabeledStep> out;
    for (const CorpusEntry& e : corpus) {
        auto targets = regime_targets(e, regime);
        if (targets.empty()) continue;
        const TargetSet ts(e.table, std::move(targets));
        for (const ChartSequence& s : ts.prefixes()) {
            if (!labelled_state(s, regime)) continue;
            LabeledStep step{e.table, s, legal_actions(*e.table, s, {}), {}};
            step.labels = q_star_labels(ts, s, step.actions);
            out.push_back(std::move(step));
        }
    }
    if (out.empty()) throw Error(ErrorCode::EmptySplit, "no charts of the regime's types in this split");
    return out;
}

double bce_loss(std::span<const double> scores, std::span<const double> labels, double eps) {
    if (scores.size() != labels.size()) throw Error(ErrorCode::KeyMismatch, "scores and labels differ in length");
    if (scores.empty()) return 0.0;
    double acc = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double p = std::clamp(scores[i], eps, 1.0 - eps);
        acc -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return acc / static_cast<double>(scores.size());
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "replay capacity must be >= 1");
}

void ReplayMemory::push(Item item) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(item));
    } else {
        items_[next_] = std::move(item);
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<std::size_t> ReplayMemory::sample(std::size_t n, std::mt19937_64& rng) const {
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), 0);
    n = std::min(n, idx.size());
    // Partial Fisher-Yates: the first n positions are a uniform sample without replacement.
    for (std::size_t i = 0; i < n; ++i)
        std::swap(idx[i], idx[std::uniform_int_distribution<std::size_t>(i, idx.size() - 1)(rng)]);
    idx.resize(n);
    return idx;
}

Trainer::Trainer(Model& model, TrainPlan plan, const Corpus& train, const Corpus& valid)
    : model_(model), plan_(std::move(plan)), replay_(plan_.replay_capacity), rng_(plan_.seed) {
    if (plan_.batch_size == 0 || plan_.update_every == 0)
        throw Error(ErrorCode::InvalidArgument, "batch_size and update_every must be >= 1");
    for (const CorpusEntry& e : train) {
        auto targets = regime_targets(e, plan_.regime);
        if (targets.empty()) continue;
        data_.push_back({e.table, model_.features().table_features(*e.table),
                         std::make_shared<const TargetSet>(e.table, std::move(targets))});
    }
    if (data_.empty())
        throw Error(ErrorCode::EmptySplit, "training split has no charts for regime " + plan_.regime.name());
    const auto types = plan_.regime.types();
    for (const CorpusEntry& e : valid)
        if (std::any_of(e.charts.begin(), e.charts.end(), [&](const ChartSequence& c) {
                return std::find(types.begin(), types.end(), c.front().chart_type()) != types.end();
            }))
            valid_.push_back(e);
    mask_ = model_.trainable_mask(plan_.regime.kind == RegimeKind::Transfer);
    adam_.config = plan_.adam;
}

std::size_t Trainer::step_count() const {
    std::size_t n = 0;
    for (const TableData& d : data_)
        for (const ChartSequence& s : d.targets->prefixes()) n += labelled_state(s, plan_.regime);
    return n;
}

double Trainer::batch_gradient(std::span<const std::size_t> tables, std::vector<float>& grad) const {
    nn::Tape<float> tape(model_.params());
    std::vector<nn::Var> losses;
    for (std::size_t ti : tables) {
        const TableData& d = data_.at(ti);
        const auto enc = model_.encode(tape, *d.table, d.features);
        std::vector<nn::Var> z_at;  // decoder state per prefix length along the current DFS path
        for (const ChartSequence& s : d.targets->prefixes()) {
            const nn::Var z = s.empty() ? enc.z0
                                        : model_.step(tape, enc, z_at[s.size() - 1], s.back(),
                                                      segment_types(s).back());
            z_at.resize(s.size() + 1);
            z_at[s.size()] = z;
            if (!labelled_state(s, plan_.regime)) continue;
            const auto actions = legal_actions(*d.table, s, {});
            const auto labels = q_star_labels(*d.targets, s, actions);
            losses.push_back(tape.bce_logits(model_.action_logits(tape, enc, z, actions), labels));
        }
    }
    grad.assign(model_.params().size(), 0.0f);
    if (losses.empty()) return 0.0;
    const nn::Var total = tape.weighted_total(losses, 1.0f / static_cast<float>(losses.size()));
    tape.backward(total, grad);
    return tape.scalar(total);
}

double Trainer::replay_gradient(std::span<const std::size_t> items, std::vector<float>& grad) const {
    std::map<std::size_t, std::vector<std::size_t>> by_table;
    for (std::size_t i : items) by_table[replay_.at(i).table].push_back(i);
    nn::Tape<float> tape(model_.params());
    std::vector<nn::Var> losses;
    for (const auto& [ti, members] : by_table) {
        const TableData& d = data_.at(ti);
        const auto enc = model_.encode(tape, *d.table, d.features);
        for (std::size_t i : members) {
            const auto& item = replay_.at(i);
            const nn::Var z = model_.run(tape, enc, item.state);
            losses.push_back(tape.bce_logits(model_.action_logits(tape, enc, z, item.actions), item.labels));
        }
    }
    grad.assign(model_.params().size(), 0.0f);
    if (losses.empty()) return 0.0;
    const nn::Var total = tape.weighted_total(losses, 1.0f / static_cast<float>(losses.size()));
    tape.backward(total, grad);
    return tape.scalar(total);
}

void Trainer::update(const std::vector<float>& grad) {
    auto& values = model_.params().values();
    adam_.apply(values, grad, mask_);
}

std::pair<double, double> Trainer::validate() const {
    if (valid_.empty()) return {0.0, 0.0};
    EvalOptions opt;
    opt.design_choices = false;
    opt.search.beam_size = plan_.beam_size;
    opt.search.expand_limit = plan_.expand_limit;
    if (plan_.regime.single_type()) opt.search.seed_types = {plan_.regime.type};
    const EvalReport r = evaluate(DqnScorer(borrow(model_)), valid_, opt);
    return {r.overall.r1, r.overall.r3};
}

double Trainer::validation_r1() const { return validate().first; }

EpochMetrics Trainer::finish_epoch(const std::string& phase, double loss, std::vector<float>& best,
                                   double& best_r1, const Logger& log) {
    EpochMetrics m;
    m.epoch = ++epoch_;
    m.phase = phase;
    m.loss = loss;
    std::tie(m.valid_r1, m.valid_r3) = validate();
    if (best.empty() || m.valid_r1 > best_r1) {
        best_r1 = m.valid_r1;
        best = model_.params().values();
    }
    if (log) log(m);
    return m;
}

std::vector<EpochMetrics> Trainer::teacher_force(const Logger& log) {
    std::vector<std::size_t> steps(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i)
        for (const ChartSequence& s : data_[i].targets->prefixes()) steps[i] += labelled_state(s, plan_.regime);

    std::vector<EpochMetrics> out;
    std::vector<float> best, grad;
    double best_r1 = 0;
    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t e = 0; e < plan_.tf_epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng_);
        double loss_sum = 0, weight = 0;
        std::vector<std::size_t> batch;
        std::size_t in_batch = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            batch.push_back(order[k]);
            in_batch += steps[order[k]];
            if (in_batch < plan_.batch_size && k + 1 < order.size()) continue;
            const double l = batch_gradient(batch, grad);
            update(grad);
            loss_sum += l * static_cast<double>(in_batch);
            weight += static_cast<double>(in_batch);
            batch.clear();
            in_batch = 0;
        }
        out.push_back(finish_epoch("tf", weight > 0 ? loss_sum / weight : 0.0, best, best_r1, log));
    }
    if (plan_.checkpoint_best && !valid_.empty() && !best.empty()) model_.params().values() = best;
    return out;
}

std::vector<EpochMetrics> Trainer::search_sample(const Logger& log) {
    SearchConfig cfg;
    cfg.beam_size = plan_.beam_size;
    cfg.expand_limit = plan_.expand_limit;
    if (plan_.regime.single_type()) cfg.seed_types = {plan_.regime.type};

    std::vector<EpochMetrics> out;
    std::vector<float> best, grad;
    double best_r1 = 0;
    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t e = 0; e < plan_.ss_epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng_);
        double loss_sum = 0;
        std::size_t updates = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t ti = order[k];
            const TableData& d = data_[ti];
            const DqnScorer scorer(borrow(model_));
            try {
                beam_search(scorer, *d.table, cfg,
                            [&](std::span<const ActionToken> s, std::span<const ActionToken> actions) {
                                if (!labelled_state(s, plan_.regime)) return;
                                ReplayMemory::Item item{ti, {s.begin(), s.end()}, {actions.begin(), actions.end()}, {}};
                                item.labels = q_star_labels(*d.targets, s, actions);
                                replay_.push(std::move(item));
                            });
            } catch (const Error& err) {
                if (err.code() != ErrorCode::NoLegalSeed) throw;
            }
            if ((k + 1) % plan_.update_every != 0 && k + 1 < order.size()) continue;
            if (replay_.size() == 0) continue;
            const auto idx = replay_.sample(plan_.batch_size, rng_);
            loss_sum += replay_gradient(idx, grad);
            ++updates;
            update(grad);
        }
        out.push_back(finish_epoch("ss", updates ? loss_sum / static_cast<double>(updates) : 0.0, best, best_r1, log));
    }
    if (plan_.checkpoint_best && !valid_.empty() && !best.empty()) model_.params().values() = best;
    return out;
}

std::vector<EpochMetrics> Trainer::run(const Logger& log) {
    auto out = teacher_force(log);
    auto ss = search_sample(log);
    out.insert(out.end(), ss.begin(), ss.end());
    return out;
}

std::size_t RegimeSuite::transfer_stored_parameters() const {
    std::size_t n = mixed ? mixed->encoder_parameter_count() : 0;
    for (const auto& [t, m] : transfer) n += m->decoder_parameter_count();
    return n;
}

std::size_t RegimeSuite::separate_stored_parameters() const {
    std::size_t n = 0;
    for (const auto& [t, m] : separate) n += m->parameter_count();
    return n;
}

std::unique_ptr<Model> transfer_model(const Model& source, std::uint64_t seed) {
    auto m = std::make_unique<Model>(source.config(), source.features(), seed);
    m->copy_encoder_from(source);
    return m;
}

RegimeSuite run_regimes(const Corpus& train, const Corpus& valid, const nn::ModelConfig& config,
                        const FeatureExtractor& features, const TrainPlan& plan, const std::vector<ChartType>& types) {
    RegimeSuite suite;
    auto mixed = std::make_shared<Model>(config, features, plan.seed);
    TrainPlan p = plan;
    p.regime = Regime::mixed();
    Trainer(*mixed, p, train, valid).run();
    suite.mixed = mixed;
    for (ChartType t : types) {
        const auto counts = chart_type_counts(train);
        if (counts[static_cast<std::size_t>(t)] == 0) {
            suite.warnings.push_back("no training charts of type " + std::string(to_string(t)) + "; skipped");
            continue;
        }
        const auto salt = static_cast<std::uint64_t>(t) + 1;
        std::shared_ptr<Model> tm = transfer_model(*mixed, plan.seed + 1000 * salt);
        p.regime = Regime::transfer(t);
        Trainer(*tm, p, train, valid).run();
        suite.transfer[t] = tm;

        auto sm = std::make_shared<Model>(config, features, plan.seed + 1000 * salt + 7);
        p.regime = Regime::separate(t);
        Trainer(*sm, p, train, valid).run();
        suite.separate[t] = sm;
    }
    return suite;
}

}  // namespace t2c
