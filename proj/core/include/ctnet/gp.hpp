#pragma once

#include <vector>

namespace ctnet {

// Squared-exponential ARD kernel configuration. With auto_fit the length
// scales and noise are chosen by grid-search marginal likelihood and the
// signal variance is set to the sample variance of the objectives.
struct GpConfig {
    std::vector<double> length_scales;  // one per dimension when auto_fit is off
    double signal_var = 1.0;
    double noise_var = 1e-4;
    bool auto_fit = true;
};

// Gaussian-process regressor over points in the unit cube.
class Surrogate {
public:
    // Requires at least 2 observations. Duplicate points are handled by
    // escalating diagonal jitter until the Cholesky succeeds.
    static Surrogate fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         const GpConfig& cfg = {});

    struct Posterior {
        double mean = 0.0;
        double stddev = 0.0;
    };
    Posterior posterior(const std::vector<double>& q) const;

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(y_.size()); }
    double best_observed() const { return best_; }
    const std::vector<double>& length_scales() const { return cfg_.length_scales; }
    double signal_var() const { return cfg_.signal_var; }
    double noise_var() const { return cfg_.noise_var; }

private:
    int dim_ = 0;
    GpConfig cfg_;
    std::vector<std::vector<double>> x_;
    std::vector<double> y_;        // raw objectives
    double y_mean_ = 0.0;
    double best_ = 0.0;
    std::vector<double> chol_;     // lower Cholesky of K + noise*I, row-major
    std::vector<double> alpha_;    // (K + noise*I)^-1 (y - mean)
};

}  // namespace ctnet
