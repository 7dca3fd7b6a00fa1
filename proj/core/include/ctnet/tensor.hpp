#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctnet/error.hpp"

namespace ctnet {

// Extents of a rank-4 tensor in (batch, channels, height, width) order.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t elems() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

// Dense float32 rank-4 array in row-major (N,C,H,W) layout with an optional
// gradient buffer of identical shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape s) : shape_(s), data_(s.elems(), 0.0f) {}
    Tensor(Shape s, float fill) : shape_(s), data_(s.elems(), fill) {}

    static Tensor zeros(Shape s) { return Tensor(s); }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }
    float& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    float at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

    // Gradient buffer handling. The buffer is lazily allocated and zeroed.
    bool has_grad() const { return !grad_.empty(); }
    void ensure_grad() {
        if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0f);
    }
    void zero_grad() {
        if (has_grad()) grad_.assign(grad_.size(), 0.0f);
    }
    void drop_grad() { grad_.clear(); grad_.shrink_to_fit(); }
    float* grad() { return grad_.data(); }
    const float* grad() const { return grad_.data(); }

    void fill(float v) { data_.assign(data_.size(), v); }

    // True when every stored value is finite.
    bool finite() const;

private:
    Shape shape_{};
    std::vector<float> data_;
    std::vector<float> grad_;
};

inline void check_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a == b) return;
    throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

}  // namespace ctnet
