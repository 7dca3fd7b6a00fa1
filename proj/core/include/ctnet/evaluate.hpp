#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctnet/dataset.hpp"
#include "ctnet/graph.hpp"
#include "ctnet/metrics.hpp"

namespace ctnet {

struct PerImageRecord {
    std::string id;  // manifest path string
    int label = 0;
    int predicted = 0;
    double p_covid = 0.0;
};

struct EvalResult {
    MetricsReport report;
    std::vector<PerImageRecord> records;
};

// Argmax predictions over a split in inference mode, plus per-image records.
EvalResult evaluate(const NetworkGraph& g, Dataset& data, Split split, int batch_size = 8);

// `id,label,predicted,p_covid` rows.
void write_per_image_csv(const std::filesystem::path& file,
                         const std::vector<PerImageRecord>& records);

struct BenchResult {
    int repetitions = 0;
    double mean_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
    std::vector<double> samples_s;
    int threads = 1;
    std::int64_t params = 0;
};

// Times single-image forward passes; one warm-up run is discarded.
BenchResult bench_inference(const NetworkGraph& g, const Tensor& image, int repetitions);

}  // namespace ctnet
