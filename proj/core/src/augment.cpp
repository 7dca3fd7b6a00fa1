#include "ctnet/augment.hpp"

#include "ctnet/rng.hpp"

namespace ctnet {

std::vector<PlannedSample> epoch_plan(const std::vector<int>& train_indices, int epoch,
                                      const AugmentationSpec& spec, bool shuffle) {
    std::vector<PlannedSample> plan;
    plan.reserve(train_indices.size() * kAugPerOriginal);
    for (int slot = 0; slot < static_cast<int>(train_indices.size()); ++slot)
        for (int k = 0; k < kAugPerOriginal; ++k)
            plan.push_back({train_indices[slot], slot, static_cast<AugKind>(k)});
    if (shuffle) {
        Rng rng(derive_seed(spec.seed, 0x50C1A1u, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(plan);
    }
    return plan;
}

GrayImage apply_augmentation(const GrayImage& original, const PlannedSample& s,
                             const AugmentationSpec& spec, int epoch) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(s.slot), static_cast<std::uint64_t>(s.kind)));
    switch (s.kind) {
        case AugKind::Original:
            return original;
        case AugKind::Rotated:
            return rotate_bilinear(original, rng.uniform(spec.rotation_lo, spec.rotation_hi));
        case AugKind::Scaled:
            return scale_center(original, rng.uniform(spec.scale_lo, spec.scale_hi));
        case AugKind::Noisy: {
            GrayImage img = original;
            add_gaussian_noise(img, spec.noise_sigma, rng);
            return img;
        }
    }
    return original;
}

}  // namespace ctnet
