#include "ctnet/metrics.hpp"

#include "ctnet/error.hpp"

namespace ctnet {

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw ShapeError("confusion: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw EmptyDataError("confusion: no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i] == 1;
        const bool truth_pos = labels[i] == 1;
        if (pred_pos && truth_pos)
            ++cm.tp;
        else if (pred_pos && !truth_pos)
            ++cm.fp;
        else if (!pred_pos && truth_pos)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() < 1) throw EmptyDataError("metrics: empty confusion matrix");
    MetricsReport r;
    r.counts = cm;
    auto ratio = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    r.specificity = ratio(cm.tn, cm.tn + cm.fp);
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    if (r.precision && r.sensitivity && (*r.precision + *r.sensitivity) > 0.0)
        r.f1 = 2.0 * *r.precision * *r.sensitivity / (*r.precision + *r.sensitivity);
    return r;
}

double efficiency(double sensitivity_percent, double params_millions) {
    if (!(params_millions > 0.0))
        throw UsageError("efficiency: parameter count must be positive");
    return sensitivity_percent / params_millions;
}

}  // namespace ctnet
