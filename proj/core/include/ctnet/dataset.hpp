#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctnet/image.hpp"
#include "ctnet/tensor.hpp"

namespace ctnet {

// Positive class is covid (index 1); not_covid is index 0.
enum class Label { NotCovid = 0, Covid = 1 };
enum class Split { Train, Validation, Test1, Test2 };

Label label_from_string(const std::string& s);    // closed vocabulary
Split split_from_string(const std::string& s);
const char* label_to_string(Label l);
const char* split_to_string(Split s);

struct ManifestEntry {
    std::filesystem::path path;  // resolved against the manifest directory
    Label label = Label::NotCovid;
    Split split = Split::Train;
};

// Parses a `path,label,split` CSV, validating vocabulary, duplicates and file
// existence. Errors carry the offending row number or path list.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& file);

struct ChannelStats {
    float mean = 0.0f;
    float stddev = 1.0f;
};

// Decodes, reduces to luminance, resizes to target x target, scales to [0,1].
GrayImage load_image_gray(const std::filesystem::path& file, int target);

// Standardizes by train statistics and replicates to `channels` identical
// planes, producing a (1, channels, target, target) network input.
Tensor image_to_input(const GrayImage& img, const ChannelStats& stats, int channels = 3);

// Convenience: full pipeline for a single file.
Tensor load_image(const std::filesystem::path& file, int target, const ChannelStats& stats,
                  int channels = 3);

// Manifest-backed dataset with an in-memory cache of decoded originals and
// lazily computed train-split statistics.
class Dataset {
public:
    explicit Dataset(const std::filesystem::path& manifest_file, int target = 224);
    // In-memory variant used by tests.
    Dataset(std::vector<ManifestEntry> entries, int target = 224);

    const std::vector<ManifestEntry>& entries() const { return entries_; }
    int target() const { return target_; }
    std::vector<int> split_indices(Split s) const;

    // [0,1] luminance original at dataset resolution, cached after first load.
    const GrayImage& original(int index) const;

    // Per-channel standardization statistics over train-split originals only.
    const ChannelStats& train_stats() const;

    // Stacks standardized 3-channel inputs into one batch tensor.
    Tensor make_batch(const std::vector<const GrayImage*>& images) const;

private:
    std::vector<ManifestEntry> entries_;
    int target_;
    mutable std::vector<GrayImage> cache_;
    mutable std::vector<char> cached_;
    mutable std::optional<ChannelStats> stats_;
};

}  // namespace ctnet
