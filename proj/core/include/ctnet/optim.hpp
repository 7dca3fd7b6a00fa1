#pragma once

#include <span>
#include <vector>

#include "ctnet/graph.hpp"

namespace ctnet {

struct Hyperparams {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double l2 = 0.0;

    void validate() const;
};

// v <- momentum*v + lr*(g + l2*w); w <- w - v. Aborts on a non-finite gradient.
void sgd_step(std::span<float> w, std::span<const float> g, std::span<float> v,
              const Hyperparams& hp, double lr_now);

// lr0 * drop_factor^floor((epoch-1)/drop_period), epoch 1-based. The power is
// accumulated by repeated multiplication so trailing epochs stay exact
// multiples of the earlier ones.
double lr_schedule(int epoch, double lr0, double drop_factor = 0.8, int drop_period = 5);

// Momentum buffers for every trainable graph parameter, zero-initialized and
// persistent across steps.
class SgdOptimizer {
public:
    SgdOptimizer(NetworkGraph& g, Hyperparams hp);

    void step(double lr_now);
    const Hyperparams& hyperparams() const { return hp_; }

private:
    NetworkGraph& graph_;
    Hyperparams hp_;
    std::vector<std::vector<float>> velocity_;
};

}  // namespace ctnet
