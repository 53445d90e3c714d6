#pragma once

#include "t2c/adam.hpp"
#include "t2c/corpus.hpp"
#include "t2c/dqn_scorer.hpp"
#include "t2c/mdp.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace t2c {

enum class RegimeKind { Mixed, Transfer, Separate };

struct Regime {
    RegimeKind kind = RegimeKind::Mixed;
    ChartType type = ChartType::Line;  // single-type regimes only

    static Regime mixed() { return {}; }
    static Regime transfer(ChartType t) { return {RegimeKind::Transfer, t}; }
    static Regime separate(ChartType t) { return {RegimeKind::Separate, t}; }

    bool single_type() const { return kind != RegimeKind::Mixed; }
    /// Chart types whose targets this regime learns from.
    std::vector<ChartType> types() const;
    std::string name() const;
};

struct TrainPlan {
    Regime regime;
    std::size_t tf_epochs = 30;
    std::size_t ss_epochs = 5;
    std::size_t batch_size = 32;
    nn::AdamConfig adam;
    std::uint64_t seed = 1;
    std::size_t replay_capacity = 100000;
    std::size_t update_every = 1;  // tables between replay updates
    std::size_t beam_size = 4;
    std::size_t expand_limit = 100;
    bool checkpoint_best = true;   // keep the best-validation parameters of each phase
};

struct LabeledStep {
    TablePtr table;
    ChartSequence state;
    std::vector<ActionToken> actions;
    std::vector<float> labels;
};

/// Every non-complete s in T_D^+ of the regime's targets, labelled with q* over legal actions.
/// Single-type regimes start from the chart-type token, so the empty state is left out.
std::vector<LabeledStep> make_labeled_steps(const Corpus& corpus, const Regime& regime);

/// Mean binary cross-entropy of scores against labels with logs clamped at eps.
double bce_loss(std::span<const double> scores, std::span<const double> labels, double eps = 1e-7);

/// Fixed-capacity FIFO of transitions with uniform sampling without replacement.
class ReplayMemory {
public:
    struct Item {
        std::size_t table = 0;  // index into the trainer's table list
        ChartSequence state;
        std::vector<ActionToken> actions;
        std::vector<float> labels;
    };

    explicit ReplayMemory(std::size_t capacity);
    void push(Item item);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Item& at(std::size_t i) const { return items_.at(i); }
    std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Item> items_;
};

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based over both phases
    std::string phase;      // "tf" or "ss"
    double loss = 0;
    double valid_r1 = 0, valid_r3 = 0;
};

/// Trains one model under a plan. Valid may be empty (no checkpoint selection then).
class Trainer {
public:
    using Logger = std::function<void(const EpochMetrics&)>;

    Trainer(Model& model, TrainPlan plan, const Corpus& train, const Corpus& valid);

    /// Runs teacher forcing then search sampling.
    std::vector<EpochMetrics> run(const Logger& log = {});
    std::vector<EpochMetrics> teacher_force(const Logger& log = {});
    std::vector<EpochMetrics> search_sample(const Logger& log = {});

    /// Loss and parameter gradient over the given steps, as used for one optimizer update.
    double batch_gradient(std::span<const std::size_t> tables, std::vector<float>& grad) const;
    double replay_gradient(std::span<const std::size_t> items, std::vector<float>& grad) const;

    std::size_t table_count() const { return data_.size(); }
    std::size_t step_count() const;
    const ReplayMemory& replay() const { return replay_; }
    double validation_r1() const;

private:
    struct TableData {
        TablePtr table;
        TableFeatures features;
        std::shared_ptr<const TargetSet> targets;
    };

    void update(const std::vector<float>& grad);
    std::pair<double, double> validate() const;
    EpochMetrics finish_epoch(const std::string& phase, double loss, std::vector<float>& best,
                              double& best_r1, const Logger& log);

    Model& model_;
    TrainPlan plan_;
    std::vector<TableData> data_;
    Corpus valid_;
    std::vector<std::uint8_t> mask_;
    nn::AdamState<float> adam_;
    ReplayMemory replay_;
    std::mt19937_64 rng_;
    std::size_t epoch_ = 0;
};

struct RegimeSuite {
    ModelPtr mixed;
    std::map<ChartType, ModelPtr> transfer, separate;
    std::vector<std::string> warnings;

    /// Parameters a deployment must store: the mixed model plus transfer decoders.
    std::size_t transfer_stored_parameters() const;
    std::size_t separate_stored_parameters() const;
};

/// Mixed model on the major types, then per type a transfer decoder and a separate model.
/// Types without charts are skipped with a warning.
RegimeSuite run_regimes(const Corpus& train, const Corpus& valid, const nn::ModelConfig& config,
                        const FeatureExtractor& features, const TrainPlan& plan,
                        const std::vector<ChartType>& types = {kAllChartTypes.begin(), kAllChartTypes.end()});

/// Fresh model that shares (and freezes) the encoder of `source`.
std::unique_ptr<Model> transfer_model(const Model& source, std::uint64_t seed);

}  // namespace t2c
