#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ctnet/gemm.hpp"
#include "ctnet/ops.hpp"

namespace ctnet {

namespace {

void check_channel_vec(const Tensor& v, int c, const char* what) {
    if (static_cast<int>(v.size()) != c)
        throw ShapeError(std::string(what) + ": per-channel vector length " +
                         std::to_string(v.size()) + " does not match channel count " +
                         std::to_string(c));
}

}  // namespace

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, float epsilon,
                         float momentum_stat, bool training, BatchNormCache* cache) {
    const Shape s = x.shape();
    check_channel_vec(gamma, s.c, "batchnorm gamma");
    check_channel_vec(beta, s.c, "batchnorm beta");
    check_channel_vec(running_mean, s.c, "batchnorm running_mean");
    check_channel_vec(running_var, s.c, "batchnorm running_var");
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    const std::size_t m = static_cast<std::size_t>(s.n) * plane;
    if (m == 0) throw ShapeError("batchnorm: zero batch*spatial elements");

    Tensor y(s);
    if (cache) {
        cache->xhat = Tensor(s);
        cache->inv_std.assign(s.c, 0.0f);
    }

    for (int c = 0; c < s.c; ++c) {
        float mean, inv_std;
        if (training) {
            // Two-pass batch statistics over (N, H, W).
            double sum = 0.0;
            for (int n = 0; n < s.n; ++n) {
                const float* row = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) sum += row[i];
            }
            mean = static_cast<float>(sum / static_cast<double>(m));
            double sq = 0.0;
            for (int n = 0; n < s.n; ++n) {
                const float* row = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double d = static_cast<double>(row[i]) - mean;
                    sq += d * d;
                }
            }
            const float var = static_cast<float>(sq / static_cast<double>(m));
            inv_std = 1.0f / std::sqrt(var + epsilon);
            const float mom = momentum_stat;
            running_mean[c] = mom * running_mean[c] + (1.0f - mom) * mean;
            running_var[c] = mom * running_var[c] + (1.0f - mom) * var;
        } else {
            mean = running_mean[c];
            inv_std = 1.0f / std::sqrt(running_var[c] + epsilon);
        }
        if (cache) cache->inv_std[c] = inv_std;
        const float g = gamma[c];
        const float b = beta[c];
        for (int n = 0; n < s.n; ++n) {
            const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
            const float* xr = x.data() + off;
            float* yr = y.data() + off;
            float* hr = cache ? cache->xhat.data() + off : nullptr;
            for (std::size_t i = 0; i < plane; ++i) {
                const float xh = (xr[i] - mean) * inv_std;
                if (hr) hr[i] = xh;
                yr[i] = g * xh + b;
            }
        }
    }
    return y;
}

Tensor batchnorm_infer(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       const Tensor& running_mean, const Tensor& running_var, float epsilon) {
    // Inference never mutates the running statistics; the const_cast only
    // feeds the non-training branch above.
    return batchnorm_forward(x, gamma, beta, const_cast<Tensor&>(running_mean),
                             const_cast<Tensor&>(running_var), epsilon, 0.0f, false, nullptr);
}

BatchNormGrads batchnorm_backward(const Tensor& gamma, const BatchNormCache& cache,
                                  const Tensor& dy) {
    const Shape s = dy.shape();
    check_same_shape(cache.xhat.shape(), s, "batchnorm_backward");
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    const double m = static_cast<double>(s.n) * plane;

    BatchNormGrads g;
    g.dx = Tensor(s);
    g.dgamma = Tensor(gamma.shape());
    g.dbeta = Tensor(gamma.shape());

    for (int c = 0; c < s.c; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
            const float* dyr = dy.data() + off;
            const float* hr = cache.xhat.data() + off;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dyr[i];
                sum_dy_xhat += static_cast<double>(dyr[i]) * hr[i];
            }
        }
        g.dgamma[c] = static_cast<float>(sum_dy_xhat);
        g.dbeta[c] = static_cast<float>(sum_dy);
        const float k = gamma[c] * cache.inv_std[c];
        const float mean_dy = static_cast<float>(sum_dy / m);
        const float mean_dy_xhat = static_cast<float>(sum_dy_xhat / m);
        for (int n = 0; n < s.n; ++n) {
            const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
            const float* dyr = dy.data() + off;
            const float* hr = cache.xhat.data() + off;
            float* dxr = g.dx.data() + off;
            for (std::size_t i = 0; i < plane; ++i)
                dxr[i] = k * (dyr[i] - mean_dy - hr[i] * mean_dy_xhat);
        }
    }
    return g;
}

Tensor elu(const Tensor& x, float alpha) {
    Tensor y(x.shape());
    const float* xp = x.data();
    float* yp = y.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        yp[i] = xp[i] > 0.0f ? xp[i] : alpha * (std::exp(xp[i]) - 1.0f);
    return y;
}

Tensor elu_backward(const Tensor& y, const Tensor& dy, float alpha) {
    check_same_shape(y.shape(), dy.shape(), "elu_backward");
    Tensor dx(y.shape());
    const float* yp = y.data();
    const float* dp = dy.data();
    float* xp = dx.data();
    // x > 0 iff y > 0, and for x <= 0 the derivative alpha*exp(x) equals y + alpha.
    for (std::size_t i = 0; i < y.size(); ++i)
        xp[i] = yp[i] > 0.0f ? dp[i] : dp[i] * (yp[i] + alpha);
    return dx;
}

Tensor relu(const Tensor& x) {
    Tensor y(x.shape());
    const float* xp = x.data();
    float* yp = y.data();
    for (std::size_t i = 0; i < x.size(); ++i) yp[i] = xp[i] > 0.0f ? xp[i] : 0.0f;
    return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
    check_same_shape(y.shape(), dy.shape(), "relu_backward");
    Tensor dx(y.shape());
    const float* yp = y.data();
    const float* dp = dy.data();
    float* xp = dx.data();
    for (std::size_t i = 0; i < y.size(); ++i) xp[i] = yp[i] > 0.0f ? dp[i] : 0.0f;
    return dx;
}

Shape maxpool2d_out_shape(const Shape& x, const PoolSpec& s) {
    if (s.window > x.h || s.window > x.w)
        throw ShapeError("maxpool2d: window " + std::to_string(s.window) +
                         " larger than input " + std::to_string(x.h) + "x" + std::to_string(x.w));
    const int hout = (x.h + 2 * s.padding - s.window) / s.stride + 1;
    const int wout = (x.w + 2 * s.padding - s.window) / s.stride + 1;
    if (hout < 1 || wout < 1) throw ShapeError("maxpool2d: empty output");
    return {x.n, x.c, hout, wout};
}

Tensor maxpool2d(const Tensor& x, const PoolSpec& s, std::vector<std::int32_t>* argmax) {
    const Shape in = x.shape();
    const Shape out = maxpool2d_out_shape(in, s);
    Tensor y(out);
    if (argmax) argmax->assign(y.size(), -1);
    const std::size_t in_plane = static_cast<std::size_t>(in.h) * in.w;
    const std::size_t out_plane = static_cast<std::size_t>(out.h) * out.w;
    std::size_t o = 0;
    for (int n = 0; n < in.n; ++n) {
        for (int c = 0; c < in.c; ++c) {
            const std::size_t base = (static_cast<std::size_t>(n) * in.c + c) * in_plane;
            const float* plane = x.data() + base;
            for (int i = 0; i < out.h; ++i) {
                for (int j = 0; j < out.w; ++j, ++o) {
                    float best = -std::numeric_limits<float>::infinity();
                    std::int32_t best_idx = -1;
                    for (int u = 0; u < s.window; ++u) {
                        const int hi = i * s.stride + u - s.padding;
                        if (hi < 0 || hi >= in.h) continue;
                        for (int v = 0; v < s.window; ++v) {
                            const int wi = j * s.stride + v - s.padding;
                            if (wi < 0 || wi >= in.w) continue;
                            const float val = plane[static_cast<std::size_t>(hi) * in.w + wi];
                            // Strict > keeps the first maximum in scan order.
                            if (val > best) {
                                best = val;
                                best_idx = static_cast<std::int32_t>(base +
                                                                     static_cast<std::size_t>(hi) * in.w + wi);
                            }
                        }
                    }
                    y[o] = best;
                    if (argmax) (*argmax)[o] = best_idx;
                }
            }
        }
    }
    (void)out_plane;
    return y;
}

Tensor maxpool2d_backward(const Shape& x_shape, const std::vector<std::int32_t>& argmax,
                          const Tensor& dy) {
    if (argmax.size() != dy.size())
        throw ShapeError("maxpool2d_backward: argmax length does not match dy");
    Tensor dx(x_shape);
    const float* dp = dy.data();
    for (std::size_t o = 0; o < dy.size(); ++o) {
        if (argmax[o] >= 0) dx[static_cast<std::size_t>(argmax[o])] += dp[o];
    }
    return dx;
}

Tensor concat_depth(const std::vector<const Tensor*>& xs) {
    if (xs.empty()) throw ShapeError("concat_depth: no inputs");
    const Shape first = xs[0]->shape();
    int channels = 0;
    for (const Tensor* t : xs) {
        const Shape s = t->shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w)
            throw ShapeError("concat_depth: spatial mismatch " + s.str() + " vs " + first.str());
        channels += s.c;
    }
    Tensor y({first.n, channels, first.h, first.w});
    const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
    for (int n = 0; n < first.n; ++n) {
        std::size_t dst = (static_cast<std::size_t>(n) * channels) * plane;
        for (const Tensor* t : xs) {
            const std::size_t chunk = static_cast<std::size_t>(t->shape().c) * plane;
            const float* src = t->data() + static_cast<std::size_t>(n) * chunk;
            std::copy(src, src + chunk, y.data() + dst);
            dst += chunk;
        }
    }
    return y;
}

std::vector<Tensor> concat_depth_backward(const std::vector<Shape>& input_shapes,
                                          const Tensor& dy) {
    std::vector<Tensor> grads;
    grads.reserve(input_shapes.size());
    for (const Shape& s : input_shapes) grads.emplace_back(s);
    const Shape out = dy.shape();
    const std::size_t plane = static_cast<std::size_t>(out.h) * out.w;
    for (int n = 0; n < out.n; ++n) {
        std::size_t src = (static_cast<std::size_t>(n) * out.c) * plane;
        for (std::size_t i = 0; i < input_shapes.size(); ++i) {
            const std::size_t chunk = static_cast<std::size_t>(input_shapes[i].c) * plane;
            std::copy(dy.data() + src, dy.data() + src + chunk,
                      grads[i].data() + static_cast<std::size_t>(n) * chunk);
            src += chunk;
        }
    }
    return grads;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a.shape(), b.shape(), "add");
    Tensor y(a.shape());
    const float* ap = a.data();
    const float* bp = b.data();
    float* yp = y.data();
    for (std::size_t i = 0; i < a.size(); ++i) yp[i] = ap[i] + bp[i];
    return y;
}

Tensor global_avg_pool(const Tensor& x) {
    const Shape s = x.shape();
    Tensor y({s.n, s.c, 1, 1});
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    const float scale = 1.0f / static_cast<float>(plane);
    for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
            const float* row = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
            float sum = 0.0f;
            for (std::size_t i = 0; i < plane; ++i) sum += row[i];
            y.at(n, c, 0, 0) = sum * scale;
        }
    return y;
}

Tensor global_avg_pool_backward(const Shape& x_shape, const Tensor& dy) {
    check_same_shape(dy.shape(), {x_shape.n, x_shape.c, 1, 1}, "global_avg_pool_backward");
    Tensor dx(x_shape);
    const std::size_t plane = static_cast<std::size_t>(x_shape.h) * x_shape.w;
    const float scale = 1.0f / static_cast<float>(plane);
    for (int n = 0; n < x_shape.n; ++n)
        for (int c = 0; c < x_shape.c; ++c) {
            const float g = dy.at(n, c, 0, 0) * scale;
            float* row = dx.data() + (static_cast<std::size_t>(n) * x_shape.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) row[i] = g;
        }
    return dx;
}

Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    const Shape s = x.shape();
    const int in_dim = s.c * s.h * s.w;
    const int out_dim = weight.shape().n;
    if (weight.shape().c != in_dim)
        throw ShapeError("dense: weight columns " + std::to_string(weight.shape().c) +
                         " do not match input dim " + std::to_string(in_dim));
    if (static_cast<int>(bias.size()) != out_dim)
        throw ShapeError("dense: bias length does not match output dim");
    Tensor y({s.n, out_dim, 1, 1});
    std::vector<float> wt(static_cast<std::size_t>(in_dim) * out_dim);
    transpose(wt.data(), weight.data(), out_dim, in_dim);
    gemm(y.data(), x.data(), wt.data(), s.n, out_dim, in_dim);
    for (int n = 0; n < s.n; ++n)
        for (int o = 0; o < out_dim; ++o) y.at(n, o, 0, 0) += bias[o];
    return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dy) {
    const Shape s = x.shape();
    const int in_dim = s.c * s.h * s.w;
    const int out_dim = weight.shape().n;
    check_same_shape(dy.shape(), {s.n, out_dim, 1, 1}, "dense_backward");
    DenseGrads g;
    g.dx = Tensor(s);
    gemm(g.dx.data(), dy.data(), weight.data(), s.n, in_dim, out_dim);
    g.dw = Tensor(weight.shape());
    std::vector<float> dyt(static_cast<std::size_t>(out_dim) * s.n);
    transpose(dyt.data(), dy.data(), s.n, out_dim);
    gemm(g.dw.data(), dyt.data(), x.data(), out_dim, in_dim, s.n);
    g.db = Tensor({out_dim, 1, 1, 1});
    for (int n = 0; n < s.n; ++n)
        for (int o = 0; o < out_dim; ++o) g.db[o] += dy.at(n, o, 0, 0);
    return g;
}

Tensor softmax_rows(const Tensor& logits) {
    const Shape s = logits.shape();
    const int k = s.c * s.h * s.w;
    Tensor y(s);
    for (int n = 0; n < s.n; ++n) {
        const float* row = logits.data() + static_cast<std::size_t>(n) * k;
        float* out = y.data() + static_cast<std::size_t>(n) * k;
        float mx = row[0];
        for (int i = 1; i < k; ++i) mx = std::max(mx, row[i]);
        float sum = 0.0f;
        for (int i = 0; i < k; ++i) {
            out[i] = std::exp(row[i] - mx);
            sum += out[i];
        }
        const float inv = 1.0f / sum;
        for (int i = 0; i < k; ++i) out[i] *= inv;
    }
    return y;
}

CrossEntropyResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const Shape s = logits.shape();
    const int k = s.c * s.h * s.w;
    if (static_cast<int>(labels.size()) != s.n)
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for batch " + std::to_string(s.n));
    for (int n = 0; n < s.n; ++n)
        if (labels[n] < 0 || labels[n] >= k)
            throw NumericError("softmax_cross_entropy: label " + std::to_string(labels[n]) +
                               " out of range [0," + std::to_string(k) + ") at row " +
                               std::to_string(n));
    CrossEntropyResult r;
    r.dlogits = Tensor(s);
    const float inv_n = 1.0f / static_cast<float>(s.n);
    double loss = 0.0;
    for (int n = 0; n < s.n; ++n) {
        const float* row = logits.data() + static_cast<std::size_t>(n) * k;
        float* drow = r.dlogits.data() + static_cast<std::size_t>(n) * k;
        float mx = row[0];
        for (int i = 1; i < k; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (int i = 0; i < k; ++i) sum += std::exp(static_cast<double>(row[i]) - mx);
        const double log_sum = std::log(sum);
        loss -= (static_cast<double>(row[labels[n]]) - mx) - log_sum;
        for (int i = 0; i < k; ++i) {
            const float p =
                static_cast<float>(std::exp((static_cast<double>(row[i]) - mx) - log_sum));
            drow[i] = (p - (i == labels[n] ? 1.0f : 0.0f)) * inv_n;
        }
    }
    r.loss = loss / static_cast<double>(s.n);
    return r;
}

}  // namespace ctnet
