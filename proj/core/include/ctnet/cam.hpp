#pragma once

#include <filesystem>
#include <vector>

#include "ctnet/graph.hpp"
#include "ctnet/image.hpp"

namespace ctnet {

struct CamHeatmap {
    int class_index = 0;
    int feat_h = 0;
    int feat_w = 0;
    std::vector<float> raw;         // head-weighted sum of pre-GAP feature maps
    std::vector<float> normalized;  // min-max scaled to [0,1]; flat maps become 0.5
    GrayImage upsampled;            // bilinear upsample to the input extent
};

// Class activation map for one image (batch of one). For the dense-head
// network the raw map is sum_k w[c,k] * F_k; for conv-head baselines it is
// the head convolution's pre-GAP output channel c.
CamHeatmap cam(const NetworkGraph& g, const Tensor& image, int class_index);

// Weighted sum over an externally supplied feature stack (features: 1xKxHxW,
// weights: one coefficient per feature map). Exposed so callers can reuse the
// normalization/upsampling pipeline on custom maps.
CamHeatmap cam_from_features(const Tensor& features, const std::vector<float>& weights,
                             int class_index, int upsample_to);

// Blends a blue->red ramp over the grayscale input and writes a PNG.
void write_cam_overlay_png(const std::filesystem::path& file, const GrayImage& input,
                           const CamHeatmap& heat, float alpha = 0.4f);

}  // namespace ctnet
