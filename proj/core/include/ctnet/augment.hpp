#pragma once

#include <cstdint>
#include <vector>

#include "ctnet/image.hpp"

namespace ctnet {

// One original expands to exactly these four samples per epoch.
enum class AugKind : int { Original = 0, Rotated = 1, Scaled = 2, Noisy = 3 };
constexpr int kAugPerOriginal = 4;

struct AugmentationSpec {
    double rotation_lo = 0.0;   // degrees
    double rotation_hi = 90.0;
    double scale_lo = 1.1;
    double scale_hi = 1.3;
    double noise_sigma = 0.02;  // of the [0,1] dynamic range
    std::uint64_t seed = 0;
};

struct PlannedSample {
    int entry_index;  // manifest index
    int slot;         // position of the original within the train list
    AugKind kind;
};

// The 4x epoch sample list over the train entries, shuffled deterministically
// from (seed, epoch). Epochs are 1-based.
std::vector<PlannedSample> epoch_plan(const std::vector<int>& train_indices, int epoch,
                                      const AugmentationSpec& spec, bool shuffle = true);

// Applies one planned transformation. Randomness is keyed on
// (seed, epoch, slot, kind) so the result is independent of evaluation order.
GrayImage apply_augmentation(const GrayImage& original, const PlannedSample& s,
                             const AugmentationSpec& spec, int epoch);

}  // namespace ctnet
