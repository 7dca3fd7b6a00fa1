#pragma once

#include <cstdint>
#include <filesystem>

namespace ctnet {

struct SyntheticResult {
    std::filesystem::path manifest;
    int images = 0;
};

// Writes 2*n_per_class grayscale PNGs of two separable classes plus a
// manifest with a 60/20/20 train/validation/test1 split per class. The
// positive class carries bright blotches inside the lung-like ellipses; the
// negative class does not, so a luminance threshold already separates them.
SyntheticResult make_synthetic_dataset(const std::filesystem::path& out_dir, int n_per_class,
                                       std::uint64_t seed, int extent = 224);

}  // namespace ctnet
