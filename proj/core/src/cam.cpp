#include "ctnet/cam.hpp"

#include <algorithm>
#include <cmath>

namespace ctnet {

namespace {

void normalize_and_upsample(CamHeatmap& h, int target) {
    float lo = h.raw[0], hi = h.raw[0];
    for (float v : h.raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    h.normalized.resize(h.raw.size());
    const float range = hi - lo;
    if (range < 1e-12f) {
        // Flat map: no spatial preference to display.
        std::fill(h.normalized.begin(), h.normalized.end(), 0.5f);
    } else {
        const float inv = 1.0f / range;
        for (std::size_t i = 0; i < h.raw.size(); ++i) h.normalized[i] = (h.raw[i] - lo) * inv;
    }
    GrayImage feat(h.feat_w, h.feat_h);
    feat.pix = h.normalized;
    h.upsampled = resize_bilinear(feat, target, target);
}

// 256-step blue -> red ramp through the green midband.
void ramp_color(float t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    t = std::clamp(t, 0.0f, 1.0f);
    const float r_f = std::clamp(1.5f - std::fabs(4.0f * t - 3.0f), 0.0f, 1.0f);
    const float g_f = std::clamp(1.5f - std::fabs(4.0f * t - 2.0f), 0.0f, 1.0f);
    const float b_f = std::clamp(1.5f - std::fabs(4.0f * t - 1.0f), 0.0f, 1.0f);
    r = static_cast<std::uint8_t>(std::lround(r_f * 255.0f));
    g = static_cast<std::uint8_t>(std::lround(g_f * 255.0f));
    b = static_cast<std::uint8_t>(std::lround(b_f * 255.0f));
}

}  // namespace

CamHeatmap cam_from_features(const Tensor& features, const std::vector<float>& weights,
                             int class_index, int upsample_to) {
    const Shape s = features.shape();
    if (s.n != 1) throw ShapeError("cam: expected a single-image feature stack");
    if (static_cast<int>(weights.size()) != s.c)
        throw ShapeError("cam: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(s.c) + " feature maps");
    CamHeatmap h;
    h.class_index = class_index;
    h.feat_h = s.h;
    h.feat_w = s.w;
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    h.raw.assign(plane, 0.0f);
    for (int k = 0; k < s.c; ++k) {
        const float wk = weights[k];
        if (wk == 0.0f) continue;
        const float* fk = features.data() + k * plane;
        for (std::size_t i = 0; i < plane; ++i) h.raw[i] += wk * fk[i];
    }
    normalize_and_upsample(h, upsample_to);
    return h;
}

CamHeatmap cam(const NetworkGraph& g, const Tensor& image, int class_index) {
    if (class_index < 0 || class_index >= g.class_count)
        throw UsageError("cam: class index " + std::to_string(class_index) +
                         " out of range [0," + std::to_string(g.class_count) + ")");
    if (image.shape().n != 1) throw ShapeError("cam: expected a batch of one");

    Tensor features;
    g.forward(image, &features);
    if (features.empty()) throw std::logic_error("cam: graph has no feature node");

    const int k = features.shape().c;
    std::vector<float> weights;
    if (g.head_style == HeadStyle::DenseHead) {
        const Param* head = g.find_param("head.weight");
        if (!head) throw std::logic_error("cam: dense head weights not found");
        weights.assign(head->value.data() + static_cast<std::size_t>(class_index) * k,
                       head->value.data() + static_cast<std::size_t>(class_index + 1) * k);
    } else {
        // Conv-head baselines: the feature stack is already per-class maps.
        weights.assign(k, 0.0f);
        weights[class_index] = 1.0f;
    }
    return cam_from_features(features, weights, class_index, image.shape().h);
}

void write_cam_overlay_png(const std::filesystem::path& file, const GrayImage& input,
                           const CamHeatmap& heat, float alpha) {
    if (input.width != heat.upsampled.width || input.height != heat.upsampled.height)
        throw ShapeError("cam overlay: input and heatmap extents differ");
    const int w = input.width;
    const int h = input.height;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float gray = std::clamp(input.at(x, y), 0.0f, 1.0f);
            std::uint8_t cr, cg, cb;
            ramp_color(heat.upsampled.at(x, y), cr, cg, cb);
            const std::size_t o = (static_cast<std::size_t>(y) * w + x) * 3;
            rgb[o + 0] = static_cast<std::uint8_t>(std::lround(
                (1.0f - alpha) * gray * 255.0f + alpha * static_cast<float>(cr)));
            rgb[o + 1] = static_cast<std::uint8_t>(std::lround(
                (1.0f - alpha) * gray * 255.0f + alpha * static_cast<float>(cg)));
            rgb[o + 2] = static_cast<std::uint8_t>(std::lround(
                (1.0f - alpha) * gray * 255.0f + alpha * static_cast<float>(cb)));
        }
    }
    write_png_rgb(file, w, h, rgb);
}

}  // namespace ctnet
