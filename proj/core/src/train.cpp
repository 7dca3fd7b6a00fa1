#include "ctnet/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "ctnet/weights.hpp"

namespace ctnet {

namespace {

int argmax_row(const Tensor& t, int row) {
    const int k = t.shape().c * t.shape().h * t.shape().w;
    const float* p = t.data() + static_cast<std::size_t>(row) * k;
    int best = 0;
    for (int i = 1; i < k; ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

std::string format_float(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void TrainConfig::validate() const {
    hp.validate();
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (!(lr_drop_factor > 0.0) || lr_drop_factor > 1.0)
        throw UsageError("lr_drop_factor must be in (0, 1]");
    if (lr_drop_period < 1) throw UsageError("lr_drop_period must be >= 1");
}

double split_accuracy(const NetworkGraph& g, Dataset& data, Split split, int batch_size) {
    const std::vector<int> idx = data.split_indices(split);
    if (idx.empty())
        throw EmptyDataError(std::string("split '") + split_to_string(split) + "' is empty");
    std::size_t correct = 0;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t end = std::min(idx.size(), start + batch_size);
        std::vector<const GrayImage*> imgs;
        imgs.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) imgs.push_back(&data.original(idx[i]));
        const Tensor probs = g.forward(data.make_batch(imgs));
        for (std::size_t i = start; i < end; ++i) {
            const int pred = argmax_row(probs, static_cast<int>(i - start));
            if (pred == static_cast<int>(data.entries()[idx[i]].label)) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

TrainReport train(NetworkGraph& g, Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    const std::vector<int> train_idx = data.split_indices(Split::Train);
    if (train_idx.empty()) throw EmptyDataError("train split is empty");

    AugmentationSpec aug = cfg.aug;
    aug.seed = cfg.seed;

    g.ensure_grads();
    SgdOptimizer opt(g, cfg.hp);
    Tape tape;
    TrainReport report;

    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr =
            lr_schedule(epoch, cfg.hp.learning_rate, cfg.lr_drop_factor, cfg.lr_drop_period);
        const std::vector<PlannedSample> plan = epoch_plan(train_idx, epoch, aug);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t seen = 0;
        int batch_no = 0;
        for (std::size_t start = 0; start < plan.size(); start += cfg.batch_size, ++batch_no) {
            const std::size_t end = std::min(plan.size(), start + cfg.batch_size);
            std::vector<GrayImage> imgs;
            std::vector<const GrayImage*> ptrs;
            std::vector<int> labels;
            imgs.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const PlannedSample& s = plan[i];
                imgs.push_back(apply_augmentation(data.original(s.entry_index), s, aug, epoch));
                labels.push_back(static_cast<int>(data.entries()[s.entry_index].label));
            }
            for (const GrayImage& im : imgs) ptrs.push_back(&im);
            const Tensor batch = data.make_batch(ptrs);

            g.zero_grads();
            const Tensor& logits = g.forward_train(batch, tape);
            CrossEntropyResult ce = softmax_cross_entropy(logits, labels);
            if (!std::isfinite(ce.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(batch_no));
            const std::size_t bn = end - start;
            loss_sum += ce.loss * static_cast<double>(bn);
            seen += bn;
            for (std::size_t i = 0; i < bn; ++i)
                if (argmax_row(logits, static_cast<int>(i)) == labels[i]) ++correct;

            g.backward(tape, ce.dlogits);
            try {
                opt.step(lr);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(batch_no));
            }
        }

        const double train_loss = loss_sum / static_cast<double>(seen);
        const double train_acc = static_cast<double>(correct) / static_cast<double>(seen);
        const double val_acc = split_accuracy(g, data, Split::Validation, cfg.batch_size);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        report.train_loss.push_back(train_loss);
        report.train_accuracy.push_back(train_acc);
        report.val_accuracy.push_back(val_acc);
        report.epoch_seconds.push_back(secs);

        if (report.best_epoch < 0 || val_acc > report.best_val_accuracy) {
            report.best_epoch = epoch;
            report.best_val_accuracy = val_acc;
            if (!cfg.out_dir.empty()) {
                report.checkpoint = cfg.out_dir / "checkpoint_best.ctw";
                save_weights(g, report.checkpoint);
                save_sidecar(cfg.out_dir / "checkpoint_best.meta",
                             {{"experiment", cfg.experiment},
                              {"variant", g.variant},
                              {"epoch", std::to_string(epoch)},
                              {"val_accuracy", format_float(val_acc)},
                              {"train_loss", format_float(train_loss)},
                              {"learning_rate", format_float(cfg.hp.learning_rate)},
                              {"momentum", format_float(cfg.hp.momentum)},
                              {"l2", format_float(cfg.hp.l2)},
                              {"seed", std::to_string(cfg.seed)}});
            }
        }

        if (cfg.log) {
            std::ostringstream os;
            os << "epoch " << epoch << "/" << cfg.epochs << " lr=" << lr
               << " loss=" << train_loss << " train_acc=" << train_acc << " val_acc=" << val_acc
               << " (" << secs << "s)";
            cfg.log(os.str());
        }
    }
    return report;
}

ExperimentConfig configure_experiment(const std::string& tag) {
    ExperimentConfig cfg;
    if (tag == "exp1") {
        cfg.variant.kind = ArchKind::SqueezenetPlain;
        cfg.variant.custom_fire = false;
        cfg.transfer = true;
    } else if (tag == "exp2") {
        cfg.variant.kind = ArchKind::SqueezenetSimpleBypass;
        cfg.variant.custom_fire = false;
        cfg.transfer = false;
    } else if (tag == "exp3") {
        cfg.variant.kind = ArchKind::SqueezenetSimpleBypass;
        cfg.variant.custom_fire = false;
        cfg.transfer = true;
    } else if (tag == "exp4") {
        cfg.variant.kind = ArchKind::Proposed;
        cfg.variant.custom_fire = true;
        cfg.transfer = false;
    } else {
        throw UsageError("unknown experiment '" + tag + "' (expected exp1|exp2|exp3|exp4)");
    }
    return cfg;
}

NetworkGraph build_experiment_network(const std::string& tag, std::uint64_t seed,
                                      const std::filesystem::path& weights) {
    const ExperimentConfig cfg = configure_experiment(tag);
    if (cfg.transfer && weights.empty())
        throw UsageError("experiment '" + tag + "' uses transfer learning; provide --weights");
    NetworkGraph g = build_network(cfg.variant, seed);
    if (cfg.transfer) load_weights(g, weights);
    return g;
}

}  // namespace ctnet
