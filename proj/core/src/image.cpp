#include "ctnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>

#include <jpeglib.h>
#include <png.h>

#include "ctnet/error.hpp"

namespace ctnet {

namespace {

GrayImage luminance_from_rgb8(const std::uint8_t* rgb, int w, int h) {
    GrayImage img(w, h);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    for (std::size_t i = 0; i < n; ++i) {
        const float r = rgb[3 * i + 0];
        const float g = rgb[3 * i + 1];
        const float b = rgb[3 * i + 2];
        img.pix[i] = (0.299f * r + 0.587f * g + 0.114f * b) / 255.0f;
    }
    return img;
}

GrayImage decode_png(const std::filesystem::path& file) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, file.string().c_str()))
        throw IoError("undecodable PNG: " + file.string() + " (" + png.message + ")");
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("undecodable PNG: " + file.string() + " (" + msg + ")");
    }
    return luminance_from_rgb8(buf.data(), static_cast<int>(png.width),
                               static_cast<int>(png.height));
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

GrayImage decode_jpeg(const std::filesystem::path& file) {
    std::FILE* fp = std::fopen(file.string().c_str(), "rb");
    if (!fp) throw IoError("cannot open image: " + file.string());

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(fp);
        throw IoError("undecodable JPEG: " + file.string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    return luminance_from_rgb8(buf.data(), w, h);
}

std::uint8_t to_byte(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

float sample_clamped(const GrayImage& img, double x, double y) {
    // Bilinear at (x, y) in pixel coordinates, clamped to the border.
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto pget = [&](int xi, int yi) {
        xi = std::clamp(xi, 0, img.width - 1);
        yi = std::clamp(yi, 0, img.height - 1);
        return static_cast<double>(img.at(xi, yi));
    };
    const double top = pget(x0, y0) * (1.0 - fx) + pget(x0 + 1, y0) * fx;
    const double bot = pget(x0, y0 + 1) * (1.0 - fx) + pget(x0 + 1, y0 + 1) * fx;
    return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

float sample_zero_outside(const GrayImage& img, double x, double y) {
    if (x < -1.0 || y < -1.0 || x > img.width || y > img.height) return 0.0f;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto pget = [&](int xi, int yi) {
        if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return 0.0;
        return static_cast<double>(img.at(xi, yi));
    };
    const double top = pget(x0, y0) * (1.0 - fx) + pget(x0 + 1, y0) * fx;
    const double bot = pget(x0, y0 + 1) * (1.0 - fx) + pget(x0 + 1, y0 + 1) * fx;
    return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

}  // namespace

GrayImage decode_image(const std::filesystem::path& file) {
    std::FILE* fp = std::fopen(file.string().c_str(), "rb");
    if (!fp) throw IoError("cannot open image: " + file.string());
    std::uint8_t magic[4] = {0, 0, 0, 0};
    const std::size_t got = std::fread(magic, 1, 4, fp);
    std::fclose(fp);
    if (got >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        return decode_png(file);
    if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) return decode_jpeg(file);
    throw IoError("unsupported image format (need PNG or JPEG): " + file.string());
}

void write_png_gray(const std::filesystem::path& file, const GrayImage& img) {
    std::vector<std::uint8_t> bytes(img.pix.size());
    for (std::size_t i = 0; i < img.pix.size(); ++i) bytes[i] = to_byte(img.pix[i]);
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, file.string().c_str(), 0, bytes.data(), 0, nullptr))
        throw IoError("cannot write PNG: " + file.string() + " (" + png.message + ")");
}

void write_png_rgb(const std::filesystem::path& file, int width, int height,
                   const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw IoError("write_png_rgb: buffer size does not match extent");
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, file.string().c_str(), 0, rgb.data(), 0, nullptr))
        throw IoError("cannot write PNG: " + file.string() + " (" + png.message + ")");
}

void write_jpeg_gray(const std::filesystem::path& file, const GrayImage& img, int quality) {
    std::FILE* fp = std::fopen(file.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write JPEG: " + file.string());
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, fp);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 1;
    cinfo.in_color_space = JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<std::uint8_t> row(img.width);
    while (cinfo.next_scanline < cinfo.image_height) {
        const float* src = img.pix.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width;
        for (int x = 0; x < img.width; ++x) row[x] = to_byte(src[x]);
        std::uint8_t* rp = row.data();
        jpeg_write_scanlines(&cinfo, &rp, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(fp);
}

GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw IoError("resize_bilinear: non-positive target extent");
    GrayImage dst(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double srcy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double srcx = (x + 0.5) * sx - 0.5;
            dst.at(x, y) = sample_clamped(src, srcx, srcy);
        }
    }
    return dst;
}

GrayImage rotate_bilinear(const GrayImage& src, double degrees_ccw) {
    GrayImage dst(src.width, src.height);
    const double rad = degrees_ccw * M_PI / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double cx = (src.width - 1) * 0.5;
    const double cy = (src.height - 1) * 0.5;
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            // Inverse map: rotate destination coordinates clockwise.
            const double dx = x - cx;
            const double dy = y - cy;
            const double sxp = cx + c * dx + s * dy;
            const double syp = cy - s * dx + c * dy;
            dst.at(x, y) = sample_zero_outside(src, sxp, syp);
        }
    }
    return dst;
}

GrayImage scale_center(const GrayImage& src, double factor) {
    if (factor < 1.0) throw IoError("scale_center: factor must be >= 1");
    GrayImage dst(src.width, src.height);
    const double inv = 1.0 / factor;
    const double cx = (src.width - 1) * 0.5;
    const double cy = (src.height - 1) * 0.5;
    for (int y = 0; y < src.height; ++y) {
        const double syp = cy + (y - cy) * inv;
        for (int x = 0; x < src.width; ++x) {
            const double sxp = cx + (x - cx) * inv;
            dst.at(x, y) = sample_clamped(src, sxp, syp);
        }
    }
    return dst;
}

void add_gaussian_noise(GrayImage& img, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (float& p : img.pix) p = static_cast<float>(p + sigma * rng.normal());
}

}  // namespace ctnet
