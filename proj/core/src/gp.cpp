#include "ctnet/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctnet/error.hpp"

namespace ctnet {

namespace {

double kernel(const std::vector<double>& a, const std::vector<double>& b,
              const std::vector<double>& ls, double signal_var) {
    double q = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double r = (a[d] - b[d]) / ls[d];
        q += r * r;
    }
    return signal_var * std::exp(-0.5 * q);
}

// In-place lower Cholesky of a row-major n x n matrix; false when not PD.
bool cholesky(std::vector<double>& m, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m[i * n + j];
            for (int k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                m[i * n + i] = std::sqrt(s);
            } else {
                m[i * n + j] = s / m[j * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
    }
    return true;
}

void solve_lower(const std::vector<double>& l, int n, std::vector<double>& b) {
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
}

void solve_upper_t(const std::vector<double>& l, int n, std::vector<double>& b) {
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
        b[i] = s / l[i * n + i];
    }
}

struct Factorization {
    std::vector<double> chol;
    std::vector<double> alpha;
    double log_ml = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

Factorization factorize(const std::vector<std::vector<double>>& x,
                        const std::vector<double>& yc, const std::vector<double>& ls,
                        double signal_var, double noise_var) {
    const int n = static_cast<int>(x.size());
    Factorization f;
    std::vector<double> base(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double k = kernel(x[i], x[j], ls, signal_var);
            base[i * n + j] = k;
            base[j * n + i] = k;
        }
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        f.chol = base;
        for (int i = 0; i < n; ++i) f.chol[i * n + i] += noise_var + jitter;
        if (cholesky(f.chol, n)) {
            f.ok = true;
            break;
        }
        jitter = jitter == 0.0 ? 1e-10 * signal_var : jitter * 100.0;
    }
    if (!f.ok) return f;

    f.alpha = yc;
    solve_lower(f.chol, n, f.alpha);
    double quad = 0.0, log_det = 0.0;
    for (int i = 0; i < n; ++i) {
        quad += f.alpha[i] * f.alpha[i];
        log_det += std::log(f.chol[i * n + i]);
    }
    solve_upper_t(f.chol, n, f.alpha);
    f.log_ml = -0.5 * quad - log_det - 0.5 * n * std::log(2.0 * M_PI);
    return f;
}

}  // namespace

Surrogate Surrogate::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         const GpConfig& cfg) {
    if (x.size() < 2) throw UsageError("Surrogate::fit: need at least 2 observations");
    if (x.size() != y.size()) throw UsageError("Surrogate::fit: x/y size mismatch");

    Surrogate s;
    s.dim_ = static_cast<int>(x[0].size());
    for (const auto& row : x)
        if (static_cast<int>(row.size()) != s.dim_)
            throw UsageError("Surrogate::fit: inconsistent point dimensions");
    s.x_ = x;
    s.y_ = y;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    s.y_mean_ = mean;
    s.best_ = *std::max_element(y.begin(), y.end());

    std::vector<double> yc(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yc[i] = y[i] - mean;

    GpConfig chosen = cfg;
    if (cfg.auto_fit) {
        double var = 0.0;
        for (double v : yc) var += v * v;
        var /= static_cast<double>(yc.size());
        chosen.signal_var = std::max(var, 1e-12);

        static const double kLsGrid[] = {0.1, 0.2, 0.5, 1.0};
        static const double kNoiseGrid[] = {1e-4, 1e-3, 1e-2};
        double best_ml = -std::numeric_limits<double>::infinity();
        std::vector<double> ls(s.dim_);
        std::vector<int> pick(s.dim_, 0);
        // Full per-dimension grid (4^dim combinations) times the noise grid.
        const int combos = static_cast<int>(std::pow(4, s.dim_));
        for (int c = 0; c < combos; ++c) {
            int rest = c;
            for (int d = 0; d < s.dim_; ++d) {
                ls[d] = kLsGrid[rest % 4];
                rest /= 4;
            }
            for (double nv : kNoiseGrid) {
                const Factorization f = factorize(s.x_, yc, ls, chosen.signal_var, nv);
                if (f.ok && f.log_ml > best_ml) {
                    best_ml = f.log_ml;
                    chosen.length_scales = ls;
                    chosen.noise_var = nv;
                }
            }
        }
        if (chosen.length_scales.empty())
            throw NumericError("Surrogate::fit: no kernel configuration factorizes");
        (void)pick;
    } else {
        if (static_cast<int>(cfg.length_scales.size()) != s.dim_)
            throw UsageError("Surrogate::fit: length_scales size must match dimension");
    }

    const Factorization f =
        factorize(s.x_, yc, chosen.length_scales, chosen.signal_var, chosen.noise_var);
    if (!f.ok)
        throw NumericError("Surrogate::fit: kernel matrix not positive definite after jitter");
    s.cfg_ = chosen;
    s.chol_ = f.chol;
    s.alpha_ = f.alpha;
    return s;
}

Surrogate::Posterior Surrogate::posterior(const std::vector<double>& q) const {
    if (static_cast<int>(q.size()) != dim_)
        throw UsageError("Surrogate::posterior: wrong query dimension");
    const int n = static_cast<int>(y_.size());
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i) k[i] = kernel(x_[i], q, cfg_.length_scales, cfg_.signal_var);

    Posterior p;
    p.mean = y_mean_;
    for (int i = 0; i < n; ++i) p.mean += k[i] * alpha_[i];

    std::vector<double> v = k;
    solve_lower(chol_, n, v);
    double reduce = 0.0;
    for (int i = 0; i < n; ++i) reduce += v[i] * v[i];
    const double var = std::max(0.0, cfg_.signal_var - reduce);
    p.stddev = std::sqrt(var);
    return p;
}

}  // namespace ctnet
