#include "ctnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctnet/error.hpp"
#include "ctnet/image.hpp"
#include "ctnet/rng.hpp"

namespace ctnet {

namespace {

struct Ellipse {
    double cx, cy, a, b, angle;

    bool contains(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = ((x - cx) * c + (y - cy) * s) / a;
        const double v = (-(x - cx) * s + (y - cy) * c) / b;
        return u * u + v * v <= 1.0;
    }
};

Ellipse random_lung(Rng& rng, int extent, double cx_frac) {
    Ellipse e;
    e.cx = extent * (cx_frac + rng.uniform(-0.03, 0.03));
    e.cy = extent * (0.52 + rng.uniform(-0.04, 0.04));
    e.a = extent * rng.uniform(0.12, 0.17);
    e.b = extent * rng.uniform(0.25, 0.33);
    e.angle = rng.uniform(-0.25, 0.25);
    return e;
}

GrayImage render(Rng& rng, int extent, bool blotches) {
    GrayImage img(extent, extent, 0.08f);
    const Ellipse left = random_lung(rng, extent, 0.32);
    const Ellipse right = random_lung(rng, extent, 0.68);
    const float lung = static_cast<float>(0.42 + rng.uniform(-0.04, 0.04));

    for (int y = 0; y < extent; ++y)
        for (int x = 0; x < extent; ++x)
            if (left.contains(x, y) || right.contains(x, y)) img.at(x, y) = lung;

    if (blotches) {
        const int count = 3 + static_cast<int>(rng.uniform_index(4));
        for (int i = 0; i < count; ++i) {
            const Ellipse& host = rng.uniform() < 0.5 ? left : right;
            // Parametric point inside the ellipse.
            const double t = rng.uniform(0.0, 2.0 * M_PI);
            const double r = std::sqrt(rng.uniform());
            const double c = std::cos(host.angle), s = std::sin(host.angle);
            const double u = r * std::cos(t) * host.a * 0.8;
            const double v = r * std::sin(t) * host.b * 0.8;
            const double bx = host.cx + u * c - v * s;
            const double by = host.cy + u * s + v * c;
            const double radius = rng.uniform(5.0, 12.0);
            const double amp = rng.uniform(0.35, 0.5);
            const int lo_x = std::max(0, static_cast<int>(bx - 3 * radius));
            const int hi_x = std::min(extent - 1, static_cast<int>(bx + 3 * radius));
            const int lo_y = std::max(0, static_cast<int>(by - 3 * radius));
            const int hi_y = std::min(extent - 1, static_cast<int>(by + 3 * radius));
            for (int y = lo_y; y <= hi_y; ++y)
                for (int x = lo_x; x <= hi_x; ++x) {
                    const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
                    img.at(x, y) += static_cast<float>(amp * std::exp(-d2 / (2 * radius * radius)));
                }
        }
    }

    add_gaussian_noise(img, 0.03, rng);
    for (float& p : img.pix) p = std::clamp(p, 0.0f, 1.0f);
    return img;
}

const char* split_of(int i, int n) {
    const int train = 6 * n / 10;
    const int val = 2 * n / 10;
    if (i < train) return "train";
    if (i < train + val) return "validation";
    return "test1";
}

}  // namespace

SyntheticResult make_synthetic_dataset(const std::filesystem::path& out_dir, int n_per_class,
                                       std::uint64_t seed, int extent) {
    if (n_per_class < 1) throw UsageError("make_synthetic_dataset: n_per_class must be >= 1");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    SyntheticResult result;
    result.manifest = out_dir / "manifest.csv";
    std::ofstream csv(result.manifest);
    if (!csv) throw IoError("cannot write manifest: " + result.manifest.string());
    csv << "path,label,split\n";

    char name[64];
    for (int cls = 0; cls < 2; ++cls) {
        const bool covid = cls == 1;
        for (int i = 0; i < n_per_class; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls),
                                static_cast<std::uint64_t>(i)));
            const GrayImage img = render(rng, extent, covid);
            std::snprintf(name, sizeof(name), "%s_%04d.png", covid ? "covid" : "not_covid", i);
            write_png_gray(out_dir / name, img);
            csv << name << "," << (covid ? "covid" : "not_covid") << ","
                << split_of(i, n_per_class) << "\n";
            ++result.images;
        }
    }
    if (!csv) throw IoError("failed writing manifest: " + result.manifest.string());
    return result;
}

}  // namespace ctnet
