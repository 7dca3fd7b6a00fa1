#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ctnet/rng.hpp"

namespace ctnet {

// Grayscale image with float pixels, nominally in [0, 1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pix;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), pix(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return pix[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return pix[static_cast<std::size_t>(y) * width + x]; }
};

// Decodes a PNG or JPEG file (sniffed by magic bytes) to luminance in [0, 1].
// Color sources are reduced with Rec.601 weights.
GrayImage decode_image(const std::filesystem::path& file);

void write_png_gray(const std::filesystem::path& file, const GrayImage& img);
void write_png_rgb(const std::filesystem::path& file, int width, int height,
                   const std::vector<std::uint8_t>& rgb);
void write_jpeg_gray(const std::filesystem::path& file, const GrayImage& img, int quality = 90);

// Bilinear resampling at half-pixel centers, clamped at the borders.
GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h);

// Counter-clockwise rotation about the image center; samples outside the
// source are zero.
GrayImage rotate_bilinear(const GrayImage& src, double degrees_ccw);

// Zoom about the center by factor >= 1 (equivalent to upscale + center crop).
GrayImage scale_center(const GrayImage& src, double factor);

void add_gaussian_noise(GrayImage& img, double sigma, Rng& rng);

}  // namespace ctnet
