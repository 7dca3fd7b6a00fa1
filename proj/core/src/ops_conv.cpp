#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "ctnet/gemm.hpp"
#include "ctnet/ops.hpp"

namespace ctnet {

namespace {

struct ConvDims {
    int cin, cout, k, stride, pad;
    int hin, win, hout, wout;
    std::size_t cols_k() const { return static_cast<std::size_t>(cin) * k * k; }
    std::size_t pixels() const { return static_cast<std::size_t>(hout) * wout; }
};

ConvDims conv_dims(const Shape& x, const Shape& w, int stride, int padding) {
    if (w.h != w.w) throw ShapeError("conv2d: non-square kernel " + w.str());
    ConvDims d;
    d.cout = w.n;
    d.cin = w.c;
    d.k = w.h;
    d.stride = stride;
    d.pad = padding;
    d.hin = x.h;
    d.win = x.w;
    if (x.c != d.cin)
        throw ShapeError("conv2d: input channels " + std::to_string(x.c) +
                         " do not match kernel channels " + std::to_string(d.cin));
    d.hout = (x.h + 2 * d.pad - d.k) / d.stride + 1;
    d.wout = (x.w + 2 * d.pad - d.k) / d.stride + 1;
    if (d.hout < 1 || d.wout < 1)
        throw ShapeError("conv2d: output extent " + std::to_string(d.hout) + "x" +
                         std::to_string(d.wout) + " for input " + x.str());
    return d;
}

// Gathers the receptive fields of one sample into a (Cin*k*k) x (Hout*Wout)
// matrix so that convolution becomes a single GEMM against the filter matrix.
void im2col(const float* x, const ConvDims& d, float* cols) {
    const std::size_t plane = static_cast<std::size_t>(d.hin) * d.win;
    const std::size_t npix = d.pixels();
    for (int c = 0; c < d.cin; ++c) {
        const float* src = x + c * plane;
        for (int u = 0; u < d.k; ++u) {
            for (int v = 0; v < d.k; ++v) {
                float* dst = cols + ((static_cast<std::size_t>(c) * d.k + u) * d.k + v) * npix;
                for (int i = 0; i < d.hout; ++i) {
                    const int hi = i * d.stride + u - d.pad;
                    float* row = dst + static_cast<std::size_t>(i) * d.wout;
                    if (hi < 0 || hi >= d.hin) {
                        std::fill(row, row + d.wout, 0.0f);
                        continue;
                    }
                    const float* srow = src + static_cast<std::size_t>(hi) * d.win;
                    for (int j = 0; j < d.wout; ++j) {
                        const int wi = j * d.stride + v - d.pad;
                        row[j] = (wi >= 0 && wi < d.win) ? srow[wi] : 0.0f;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-adds column gradients back onto the input plane.
void col2im(const float* cols, const ConvDims& d, float* x) {
    const std::size_t plane = static_cast<std::size_t>(d.hin) * d.win;
    const std::size_t npix = d.pixels();
    std::fill(x, x + static_cast<std::size_t>(d.cin) * plane, 0.0f);
    for (int c = 0; c < d.cin; ++c) {
        float* dst = x + c * plane;
        for (int u = 0; u < d.k; ++u) {
            for (int v = 0; v < d.k; ++v) {
                const float* src = cols + ((static_cast<std::size_t>(c) * d.k + u) * d.k + v) * npix;
                for (int i = 0; i < d.hout; ++i) {
                    const int hi = i * d.stride + u - d.pad;
                    if (hi < 0 || hi >= d.hin) continue;
                    float* drow = dst + static_cast<std::size_t>(hi) * d.win;
                    const float* srow = src + static_cast<std::size_t>(i) * d.wout;
                    for (int j = 0; j < d.wout; ++j) {
                        const int wi = j * d.stride + v - d.pad;
                        if (wi >= 0 && wi < d.win) drow[wi] += srow[j];
                    }
                }
            }
        }
    }
}

void check_bias(const Tensor& bias, int channels, const char* what) {
    if (static_cast<int>(bias.size()) != channels)
        throw ShapeError(std::string(what) + ": bias length " + std::to_string(bias.size()) +
                         " does not match output channels " + std::to_string(channels));
}

// y[n] = W * cols(x[n]) (+ bias per output channel when given).
void conv_forward_impl(const float* x, int batch, const float* weights, const float* bias,
                       const ConvDims& d, float* y) {
    const std::size_t npix = d.pixels();
    const std::size_t kdim = d.cols_k();
    std::vector<float> cols(kdim * npix);
    const std::size_t in_stride = static_cast<std::size_t>(d.cin) * d.hin * d.win;
    const std::size_t out_stride = static_cast<std::size_t>(d.cout) * npix;
    for (int n = 0; n < batch; ++n) {
        im2col(x + n * in_stride, d, cols.data());
        float* yn = y + n * out_stride;
        gemm(yn, weights, cols.data(), d.cout, static_cast<int>(npix), static_cast<int>(kdim));
        if (bias) {
            for (int co = 0; co < d.cout; ++co) {
                const float b = bias[co];
                float* row = yn + co * npix;
                for (std::size_t i = 0; i < npix; ++i) row[i] += b;
            }
        }
    }
}

// dx[n] = col2im(W^T * dy[n])
void conv_input_grad_impl(const float* dy, int batch, const float* weights, const ConvDims& d,
                          float* dx) {
    const std::size_t npix = d.pixels();
    const std::size_t kdim = d.cols_k();
    std::vector<float> wt(kdim * d.cout);
    transpose(wt.data(), weights, d.cout, static_cast<int>(kdim));
    std::vector<float> dcols(kdim * npix);
    const std::size_t in_stride = static_cast<std::size_t>(d.cin) * d.hin * d.win;
    const std::size_t out_stride = static_cast<std::size_t>(d.cout) * npix;
    for (int n = 0; n < batch; ++n) {
        gemm(dcols.data(), wt.data(), dy + n * out_stride, static_cast<int>(kdim),
             static_cast<int>(npix), d.cout);
        col2im(dcols.data(), d, dx + n * in_stride);
    }
}

// dw += sum_n dy[n] * cols(x[n])^T; db (when given) += per-channel sums of dy.
void conv_param_grads_impl(const float* x, const float* dy, int batch, const ConvDims& d,
                           float* dw, float* db) {
    const std::size_t npix = d.pixels();
    const std::size_t kdim = d.cols_k();
    std::vector<float> cols(kdim * npix);
    std::vector<float> colsT(npix * kdim);
    const std::size_t in_stride = static_cast<std::size_t>(d.cin) * d.hin * d.win;
    const std::size_t out_stride = static_cast<std::size_t>(d.cout) * npix;
    for (int n = 0; n < batch; ++n) {
        im2col(x + n * in_stride, d, cols.data());
        transpose(colsT.data(), cols.data(), static_cast<int>(kdim), static_cast<int>(npix));
        const float* dyn = dy + n * out_stride;
        gemm(dw, dyn, colsT.data(), d.cout, static_cast<int>(kdim), static_cast<int>(npix),
             /*accumulate=*/n > 0);
        if (db) {
            for (int co = 0; co < d.cout; ++co) {
                const float* row = dyn + co * npix;
                float s = 0.0f;
                for (std::size_t i = 0; i < npix; ++i) s += row[i];
                db[co] += s;
            }
        }
    }
}

}  // namespace

Shape conv2d_out_shape(const Shape& x, const Shape& weights, int stride, int padding) {
    const ConvDims d = conv_dims(x, weights, stride, padding);
    return {x.n, d.cout, d.hout, d.wout};
}

Tensor conv2d_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, int stride,
                      int padding) {
    const ConvDims d = conv_dims(x.shape(), weights.shape(), stride, padding);
    check_bias(bias, d.cout, "conv2d");
    Tensor y({x.shape().n, d.cout, d.hout, d.wout});
    conv_forward_impl(x.data(), x.shape().n, weights.data(), bias.data(), d, y.data());
    return y;
}

ConvGrads conv2d_backward(const Tensor& x, const Tensor& weights, int stride, int padding,
                          const Tensor& dy, bool need_dx) {
    const ConvDims d = conv_dims(x.shape(), weights.shape(), stride, padding);
    check_same_shape(dy.shape(), {x.shape().n, d.cout, d.hout, d.wout}, "conv2d_backward");
    ConvGrads g;
    g.dw = Tensor(weights.shape());
    g.db = Tensor({d.cout, 1, 1, 1});
    conv_param_grads_impl(x.data(), dy.data(), x.shape().n, d, g.dw.data(), g.db.data());
    if (need_dx) {
        g.dx = Tensor(x.shape());
        conv_input_grad_impl(dy.data(), x.shape().n, weights.data(), d, g.dx.data());
    }
    return g;
}

Shape conv_transpose2d_out_shape(const Shape& x, const Shape& w, int stride, int padding) {
    if (x.c != w.n)
        throw ShapeError("conv_transpose2d: input channels " + std::to_string(x.c) +
                         " do not match kernel dim0 " + std::to_string(w.n));
    const int hout = (x.h - 1) * stride + w.h - 2 * padding;
    const int wout = (x.w - 1) * stride + w.w - 2 * padding;
    if (hout < 1 || wout < 1)
        throw ShapeError("conv_transpose2d: non-positive output extent " + std::to_string(hout) +
                         "x" + std::to_string(wout));
    return {x.n, w.c, hout, wout};
}

Tensor conv_transpose2d_forward(const Tensor& x, const Tensor& weights, const Tensor& bias,
                                int stride, int padding) {
    const Shape out = conv_transpose2d_out_shape(x.shape(), weights.shape(), stride, padding);
    check_bias(bias, out.c, "conv_transpose2d");
    // The transpose op is the adjoint of conv2d with the same weights, so its
    // forward pass is the conv input-gradient path plus the bias.
    const ConvDims d = conv_dims(out, weights.shape(), stride, padding);
    Tensor y(out);
    conv_input_grad_impl(x.data(), x.shape().n, weights.data(), d, y.data());
    const std::size_t plane = static_cast<std::size_t>(out.h) * out.w;
    for (int n = 0; n < out.n; ++n) {
        for (int c = 0; c < out.c; ++c) {
            const float b = bias[c];
            float* row = y.data() + (static_cast<std::size_t>(n) * out.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) row[i] += b;
        }
    }
    return y;
}

ConvGrads conv_transpose2d_backward(const Tensor& x, const Tensor& weights, int stride,
                                    int padding, const Tensor& dy, bool need_dx) {
    const Shape out = conv_transpose2d_out_shape(x.shape(), weights.shape(), stride, padding);
    check_same_shape(dy.shape(), out, "conv_transpose2d_backward");
    const ConvDims d = conv_dims(out, weights.shape(), stride, padding);
    ConvGrads g;
    if (need_dx) {
        // Adjoint of the adjoint: the input gradient is a plain convolution of dy.
        g.dx = Tensor(x.shape());
        conv_forward_impl(dy.data(), x.shape().n, weights.data(), nullptr, d, g.dx.data());
    }
    // Weight gradient has the conv2d form with the roles of the convolution's
    // input (here dy) and output gradient (here x) swapped.
    g.dw = Tensor(weights.shape());
    conv_param_grads_impl(dy.data(), x.data(), x.shape().n, d, g.dw.data(), nullptr);
    g.db = Tensor({out.c, 1, 1, 1});
    const std::size_t plane = static_cast<std::size_t>(out.h) * out.w;
    for (int n = 0; n < out.n; ++n)
        for (int c = 0; c < out.c; ++c) {
            const float* row = dy.data() + (static_cast<std::size_t>(n) * out.c + c) * plane;
            float s = 0.0f;
            for (std::size_t i = 0; i < plane; ++i) s += row[i];
            g.db[c] += s;
        }
    return g;
}

}  // namespace ctnet
