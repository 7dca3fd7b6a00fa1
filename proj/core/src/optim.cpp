#include "ctnet/optim.hpp"

#include <cmath>

#include "ctnet/error.hpp"

namespace ctnet {

void Hyperparams::validate() const {
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw UsageError("learning_rate must be in (0, 1]");
    if (momentum < 0.0 || momentum >= 1.0) throw UsageError("momentum must be in [0, 1)");
    if (l2 < 0.0) throw UsageError("l2 must be non-negative");
}

void sgd_step(std::span<float> w, std::span<const float> g, std::span<float> v,
              const Hyperparams& hp, double lr_now) {
    if (w.size() != g.size() || w.size() != v.size())
        throw ShapeError("sgd_step: parameter/gradient/velocity sizes disagree");
    const float lr = static_cast<float>(lr_now);
    const float mom = static_cast<float>(hp.momentum);
    const float l2 = static_cast<float>(hp.l2);
    bool finite = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const float gi = g[i];
        finite &= std::isfinite(gi);
        v[i] = mom * v[i] + lr * (gi + l2 * w[i]);
        w[i] -= v[i];
    }
    if (!finite) throw NumericError("sgd_step: non-finite gradient");
}

double lr_schedule(int epoch, double lr0, double drop_factor, int drop_period) {
    if (epoch < 1) throw UsageError("lr_schedule: epoch is 1-based");
    if (drop_period < 1) return lr0;
    const int drops = (epoch - 1) / drop_period;
    double lr = lr0;
    for (int i = 0; i < drops; ++i) lr *= drop_factor;
    return lr;
}

SgdOptimizer::SgdOptimizer(NetworkGraph& g, Hyperparams hp) : graph_(g), hp_(hp) {
    hp_.validate();
    for (const Param& p : g.params())
        velocity_.emplace_back(p.trainable ? p.value.size() : 0, 0.0f);
}

void SgdOptimizer::step(double lr_now) {
    auto& params = graph_.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = params[i];
        if (!p.trainable) continue;
        if (!p.value.has_grad()) throw NumericError("sgd_step: parameter '" + p.name +
                                                    "' has no gradient buffer");
        try {
            sgd_step({p.value.data(), p.value.size()}, {p.value.grad(), p.value.size()},
                     {velocity_[i].data(), velocity_[i].size()}, hp_, lr_now);
        } catch (const NumericError&) {
            throw NumericError("sgd_step: non-finite gradient in '" + p.name + "'");
        }
    }
}

}  // namespace ctnet
