#pragma once

#include <map>
#include <memory>
#include <string>

#include "aei/tensor.hpp"

namespace aei::nn {

/// A named trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;

    explicit Parameter(std::string n, Tensor val)
        : name(std::move(n)),
          value(std::move(val)),
          grad(Tensor::zeros(value.shape())),
          m(Tensor::zeros(value.shape())),
          v(Tensor::zeros(value.shape())) {}
};

/// Flat parameter store shared by the model heads. Owns every Parameter;
/// graphs hold non-owning pointers, so the store must outlive them.
class ParamStore {
public:
    Parameter& create(const std::string& name, Shape shape, int fan_in, std::mt19937& rng);
    Parameter& create_zeros(const std::string& name, Shape shape);
    Parameter& create_const(const std::string& name, Shape shape, Real v);

    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) > 0; }

    void zero_grad();

    /// Bias-corrected Adam update over every parameter; increments the step
    /// counter once per call.
    void adam_step(Real lr, Real beta1 = 0.9, Real beta2 = 0.999, Real eps = 1e-8);

    int64_t step_count() const { return step_; }

    /// Deterministic (name-sorted) iteration.
    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& [name, p] : params_) fn(*p);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [name, p] : params_) fn(*p);
    }

    size_t size() const { return params_.size(); }

    /// Checkpoint container: magic "AEIP", version byte, parameter names,
    /// shapes and float32 payload.
    void save(const std::string& path) const;
    void load(const std::string& path);

private:
    std::map<std::string, std::unique_ptr<Parameter>> params_;
    int64_t step_ = 0;
};

}  // namespace aei::nn
