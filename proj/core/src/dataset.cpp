#include "ctnet/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ctnet/error.hpp"

namespace ctnet {

Label label_from_string(const std::string& s) {
    if (s == "covid") return Label::Covid;
    if (s == "not_covid") return Label::NotCovid;
    throw IoError("unknown label '" + s + "' (expected covid|not_covid)");
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "validation") return Split::Validation;
    if (s == "test1") return Split::Test1;
    if (s == "test2") return Split::Test2;
    throw IoError("unknown split '" + s + "' (expected train|validation|test1|test2)");
}

const char* label_to_string(Label l) {
    return l == Label::Covid ? "covid" : "not_covid";
}

const char* split_to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test1: return "test1";
        case Split::Test2: return "test2";
    }
    return "?";
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open manifest: " + file.string());
    const std::filesystem::path root = file.parent_path();

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty manifest: " + file.string());
    // Tolerate trailing CR from CRLF files.
    auto strip = [](std::string& s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    };
    strip(line);
    if (line != "path,label,split")
        throw IoError("manifest header must be 'path,label,split', got '" + line + "'");

    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        strip(line);
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string path, label, split;
        if (!std::getline(ss, path, ',') || !std::getline(ss, label, ',') ||
            !std::getline(ss, split, ','))
            throw IoError("manifest row " + std::to_string(row) + ": expected 3 fields");
        strip(split);
        if (!seen.insert(path).second)
            throw IoError("manifest row " + std::to_string(row) + ": duplicate path '" + path +
                          "'");
        ManifestEntry e;
        std::filesystem::path p(path);
        e.path = p.is_absolute() ? p : root / p;
        try {
            e.label = label_from_string(label);
            e.split = split_from_string(split);
        } catch (const IoError& err) {
            throw IoError("manifest row " + std::to_string(row) + ": " + err.what());
        }
        entries.push_back(std::move(e));
    }

    std::vector<std::string> missing;
    for (const auto& e : entries)
        if (!std::filesystem::exists(e.path)) missing.push_back(e.path.string());
    if (!missing.empty()) {
        std::string msg = "manifest references missing files:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw IoError(msg);
    }
    return entries;
}

GrayImage load_image_gray(const std::filesystem::path& file, int target) {
    GrayImage img = decode_image(file);
    if (img.width != target || img.height != target)
        img = resize_bilinear(img, target, target);
    return img;
}

Tensor image_to_input(const GrayImage& img, const ChannelStats& stats, int channels) {
    Tensor t({1, channels, img.height, img.width});
    const std::size_t plane = img.pix.size();
    const float inv = stats.stddev > 0.0f ? 1.0f / stats.stddev : 1.0f;
    for (std::size_t i = 0; i < plane; ++i) {
        const float v = (img.pix[i] - stats.mean) * inv;
        for (int c = 0; c < channels; ++c) t[c * plane + i] = v;
    }
    return t;
}

Tensor load_image(const std::filesystem::path& file, int target, const ChannelStats& stats,
                  int channels) {
    return image_to_input(load_image_gray(file, target), stats, channels);
}

Dataset::Dataset(const std::filesystem::path& manifest_file, int target)
    : Dataset(load_manifest(manifest_file), target) {}

Dataset::Dataset(std::vector<ManifestEntry> entries, int target)
    : entries_(std::move(entries)),
      target_(target),
      cache_(entries_.size()),
      cached_(entries_.size(), 0) {}

std::vector<int> Dataset::split_indices(Split s) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].split == s) idx.push_back(static_cast<int>(i));
    return idx;
}

const GrayImage& Dataset::original(int index) const {
    if (!cached_[index]) {
        cache_[index] = load_image_gray(entries_[index].path, target_);
        cached_[index] = 1;
    }
    return cache_[index];
}

const ChannelStats& Dataset::train_stats() const {
    if (!stats_) {
        const std::vector<int> train = split_indices(Split::Train);
        if (train.empty()) throw EmptyDataError("dataset has no train split");
        double sum = 0.0, count = 0.0;
        for (int i : train) {
            const GrayImage& img = original(i);
            for (float v : img.pix) sum += v;
            count += static_cast<double>(img.pix.size());
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (int i : train) {
            const GrayImage& img = original(i);
            for (float v : img.pix) {
                const double d = v - mean;
                sq += d * d;
            }
        }
        ChannelStats st;
        st.mean = static_cast<float>(mean);
        st.stddev = static_cast<float>(std::sqrt(sq / count));
        if (st.stddev < 1e-6f) st.stddev = 1.0f;
        stats_ = st;
    }
    return *stats_;
}

Tensor Dataset::make_batch(const std::vector<const GrayImage*>& images) const {
    if (images.empty()) throw EmptyDataError("make_batch: no images");
    const ChannelStats& st = train_stats();
    const int n = static_cast<int>(images.size());
    Tensor batch({n, 3, target_, target_});
    const std::size_t plane = static_cast<std::size_t>(target_) * target_;
    const float inv = st.stddev > 0.0f ? 1.0f / st.stddev : 1.0f;
    for (int b = 0; b < n; ++b) {
        const GrayImage& img = *images[b];
        if (img.width != target_ || img.height != target_)
            throw ShapeError("make_batch: image extent mismatch");
        float* dst = batch.data() + static_cast<std::size_t>(b) * 3 * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            const float v = (img.pix[i] - st.mean) * inv;
            dst[i] = v;
            dst[plane + i] = v;
            dst[2 * plane + i] = v;
        }
    }
    return batch;
}

}  // namespace ctnet
