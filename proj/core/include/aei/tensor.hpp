#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aei::nn {

// Computation runs in double precision; on-disk payloads are float32.
using Real = double;

using Shape = std::vector<int>;

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int e : s) n *= e;
    return n;
}

/// Dense row-major tensor. Rank 1 and 2 cover almost everything in this
/// project; conv kernels are rank 3 ({out_ch, in_ch, k}).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0) {
        for (int e : shape_)
            if (e < 0) throw std::invalid_argument("Tensor: negative extent in " + shape_str(shape_));
    }
    Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<int64_t>(data_.size()) != shape_numel(shape_))
            throw std::invalid_argument("Tensor: data length does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, Real v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }
    static Tensor scalar(Real v) { return Tensor({1}, {v}); }

    /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static Tensor uniform_fan_in(Shape shape, int fan_in, std::mt19937& rng) {
        Tensor t(std::move(shape));
        const Real bound = 1.0 / std::sqrt(static_cast<Real>(fan_in > 0 ? fan_in : 1));
        std::uniform_real_distribution<Real> dist(-bound, bound);
        for (auto& x : t.data_) x = dist(rng);
        return t;
    }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    int rows() const { return rank() >= 1 ? shape_[0] : 1; }
    int cols() const { return rank() >= 2 ? shape_[1] : 1; }

    Real* data() { return data_.data(); }
    const Real* data() const { return data_.data(); }
    std::vector<Real>& vec() { return data_; }
    const std::vector<Real>& vec() const { return data_; }

    Real& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    Real operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
    Real& at(int i, int j) { return data_[static_cast<size_t>(i) * cols() + j]; }
    Real at(int i, int j) const { return data_[static_cast<size_t>(i) * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    Shape shape_;
    std::vector<Real> data_;
};

}  // namespace aei::nn
