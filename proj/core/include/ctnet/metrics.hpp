#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace ctnet {

// Counts under the positive-class = covid (index 1) convention.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

// Ratios with zero denominators are reported absent, not zero.
struct MetricsReport {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
    std::optional<double> f1;
    ConfusionMatrix counts;
};

MetricsReport metrics(const ConfusionMatrix& cm);

// Sensitivity percentage divided by parameter count in millions.
double efficiency(double sensitivity_percent, double params_millions);

}  // namespace ctnet
