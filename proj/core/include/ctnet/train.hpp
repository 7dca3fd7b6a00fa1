#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ctnet/architecture.hpp"
#include "ctnet/augment.hpp"
#include "ctnet/dataset.hpp"
#include "ctnet/optim.hpp"

namespace ctnet {

struct TrainConfig {
    Hyperparams hp{0.01, 0.9, 1e-6};
    int epochs = 20;
    int batch_size = 32;
    double lr_drop_factor = 0.8;
    int lr_drop_period = 5;
    std::uint64_t seed = 1;
    std::string experiment = "exp4";
    AugmentationSpec aug;                // aug.seed is overridden by seed
    std::filesystem::path out_dir;       // empty: no checkpointing
    std::function<void(const std::string&)> log;  // per-epoch progress sink

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> train_accuracy;
    std::vector<double> val_accuracy;
    std::vector<double> epoch_seconds;
    int best_epoch = -1;  // 1-based; ties resolve to the earlier epoch
    double best_val_accuracy = 0.0;
    std::filesystem::path checkpoint;
};

// Runs cfg.epochs epochs of shuffled mini-batches over the 4x-augmented train
// split, evaluates validation accuracy each epoch and checkpoints the best.
TrainReport train(NetworkGraph& g, Dataset& data, const TrainConfig& cfg);

// Accuracy of argmax predictions over a split (inference mode).
double split_accuracy(const NetworkGraph& g, Dataset& data, Split split, int batch_size);

struct ExperimentConfig {
    ArchVariant variant;
    bool transfer = false;
};

// exp1: plain squeezenet + external trunk weights; exp2: simple bypass from
// scratch; exp3: simple bypass + external weights; exp4: the fusion network.
ExperimentConfig configure_experiment(const std::string& tag);

// Builds the experiment's network, loading transfer weights when required.
NetworkGraph build_experiment_network(const std::string& tag, std::uint64_t seed,
                                      const std::filesystem::path& weights = {});

}  // namespace ctnet
