#pragma once

#include <cstdint>
#include <vector>

#include "ctnet/tensor.hpp"

namespace ctnet {

// Convolution parameters. For conv2d the weight layout is (Cout, Cin, kH, kW).
// For conv_transpose2d the same struct is used with layout (Cin, Cout, kH, kW),
// which makes the transpose op the exact adjoint of conv2d over a shared
// weight tensor. bias has one entry per output channel.
struct ConvParams {
    Tensor weights;
    Tensor bias;
    int stride = 1;
    int padding = 0;
};

struct ConvGrads {
    Tensor dx;
    Tensor dw;
    Tensor db;
};

Shape conv2d_out_shape(const Shape& x, const Shape& weights, int stride, int padding);
Tensor conv2d_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, int stride,
                      int padding);
ConvGrads conv2d_backward(const Tensor& x, const Tensor& weights, int stride, int padding,
                          const Tensor& dy, bool need_dx = true);

Shape conv_transpose2d_out_shape(const Shape& x, const Shape& weights, int stride, int padding);
Tensor conv_transpose2d_forward(const Tensor& x, const Tensor& weights, const Tensor& bias,
                                int stride, int padding);
ConvGrads conv_transpose2d_backward(const Tensor& x, const Tensor& weights, int stride,
                                    int padding, const Tensor& dy, bool need_dx = true);

inline Shape conv2d_out_shape(const Shape& x, const ConvParams& p) {
    return conv2d_out_shape(x, p.weights.shape(), p.stride, p.padding);
}
inline Tensor conv2d_forward(const Tensor& x, const ConvParams& p) {
    return conv2d_forward(x, p.weights, p.bias, p.stride, p.padding);
}
inline ConvGrads conv2d_backward(const Tensor& x, const ConvParams& p, const Tensor& dy) {
    return conv2d_backward(x, p.weights, p.stride, p.padding, dy);
}
inline Shape conv_transpose2d_out_shape(const Shape& x, const ConvParams& p) {
    return conv_transpose2d_out_shape(x, p.weights.shape(), p.stride, p.padding);
}
inline Tensor conv_transpose2d_forward(const Tensor& x, const ConvParams& p) {
    return conv_transpose2d_forward(x, p.weights, p.bias, p.stride, p.padding);
}
inline ConvGrads conv_transpose2d_backward(const Tensor& x, const ConvParams& p,
                                           const Tensor& dy) {
    return conv_transpose2d_backward(x, p.weights, p.stride, p.padding, dy);
}

struct BatchNormParams {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    float epsilon = 1e-5f;
    float momentum_stat = 0.9f;  // running <- m*running + (1-m)*batch
};

// Training-mode cache needed by the backward pass.
struct BatchNormCache {
    Tensor xhat;
    std::vector<float> inv_std;
};

// Training mode standardizes by batch statistics over (N,H,W) and updates the
// running statistics in place; inference mode standardizes by the running
// statistics and leaves them untouched.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, float epsilon,
                         float momentum_stat, bool training, BatchNormCache* cache = nullptr);
Tensor batchnorm_infer(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       const Tensor& running_mean, const Tensor& running_var, float epsilon);

inline Tensor batchnorm_forward(const Tensor& x, BatchNormParams& p, bool training,
                                BatchNormCache* cache = nullptr) {
    return batchnorm_forward(x, p.gamma, p.beta, p.running_mean, p.running_var, p.epsilon,
                             p.momentum_stat, training, cache);
}

struct BatchNormGrads {
    Tensor dx;
    Tensor dgamma;
    Tensor dbeta;
};

BatchNormGrads batchnorm_backward(const Tensor& gamma, const BatchNormCache& cache,
                                  const Tensor& dy);
inline BatchNormGrads batchnorm_backward(const BatchNormParams& p, const BatchNormCache& cache,
                                         const Tensor& dy) {
    return batchnorm_backward(p.gamma, cache, dy);
}

Tensor elu(const Tensor& x, float alpha = 1.0f);
// y is the elu output; the derivative is recoverable from it alone.
Tensor elu_backward(const Tensor& y, const Tensor& dy, float alpha = 1.0f);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& y, const Tensor& dy);

struct PoolSpec {
    int window = 2;
    int stride = 2;
    int padding = 0;
};

Shape maxpool2d_out_shape(const Shape& x, const PoolSpec& s);
// argmax, when given, records the flat input index of the selected element per
// output element (first maximum in row-major scan order).
Tensor maxpool2d(const Tensor& x, const PoolSpec& s, std::vector<std::int32_t>* argmax = nullptr);
Tensor maxpool2d_backward(const Shape& x_shape, const std::vector<std::int32_t>& argmax,
                          const Tensor& dy);

Tensor concat_depth(const std::vector<const Tensor*>& xs);
std::vector<Tensor> concat_depth_backward(const std::vector<Shape>& input_shapes, const Tensor& dy);

Tensor add(const Tensor& a, const Tensor& b);

Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Shape& x_shape, const Tensor& dy);

// Fully connected head over (N, C, 1, 1) activations. weight is (out, in, 1, 1).
struct DenseParams {
    Tensor weight;
    Tensor bias;
};

struct DenseGrads {
    Tensor dx;
    Tensor dw;
    Tensor db;
};

Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);
DenseGrads dense_backward(const Tensor& x, const Tensor& weight, const Tensor& dy);

inline Tensor dense_forward(const Tensor& x, const DenseParams& p) {
    return dense_forward(x, p.weight, p.bias);
}
inline DenseGrads dense_backward(const Tensor& x, const DenseParams& p, const Tensor& dy) {
    return dense_backward(x, p.weight, dy);
}

// Row softmax over (N, K, 1, 1); rows sum to 1.
Tensor softmax_rows(const Tensor& logits);

struct CrossEntropyResult {
    double loss = 0.0;
    Tensor dlogits;
};

// Mean negative log-likelihood with log-sum-exp stabilization.
CrossEntropyResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

}  // namespace ctnet
