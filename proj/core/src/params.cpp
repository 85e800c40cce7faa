#include "aei/params.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "aei/errors.hpp"

namespace aei::nn {

namespace {

constexpr char kMagic[4] = {'A', 'E', 'I', 'P'};
constexpr uint8_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

Parameter& ParamStore::create(const std::string& name, Shape shape, int fan_in, std::mt19937& rng) {
    if (params_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    auto p = std::make_unique<Parameter>(name, Tensor::uniform_fan_in(std::move(shape), fan_in, rng));
    return *(params_[name] = std::move(p));
}

Parameter& ParamStore::create_zeros(const std::string& name, Shape shape) {
    return create_const(name, std::move(shape), 0.0);
}

Parameter& ParamStore::create_const(const std::string& name, Shape shape, Real v) {
    if (params_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    auto p = std::make_unique<Parameter>(name, Tensor::full(std::move(shape), v));
    return *(params_[name] = std::move(p));
}

Parameter& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
    return *it->second;
}

const Parameter& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
    return *it->second;
}

void ParamStore::zero_grad() {
    for (auto& [name, p] : params_)
        for (int64_t i = 0; i < p->grad.numel(); ++i) p->grad[i] = 0.0;
}

void ParamStore::adam_step(Real lr, Real beta1, Real beta2, Real eps) {
    ++step_;
    const Real bc1 = 1.0 - std::pow(beta1, static_cast<Real>(step_));
    const Real bc2 = 1.0 - std::pow(beta2, static_cast<Real>(step_));
    for (auto& [name, p] : params_) {
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            const Real g = p->grad[i];
            p->m[i] = beta1 * p->m[i] + (1.0 - beta1) * g;
            p->v[i] = beta2 * p->v[i] + (1.0 - beta2) * g * g;
            const Real mhat = p->m[i] / bc1;
            const Real vhat = p->v[i] / bc2;
            p->value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

void ParamStore::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("ParamStore::save: cannot open " + path);
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    write_u32(os, static_cast<uint32_t>(params_.size()));
    for (const auto& [name, p] : params_) {
        write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<uint32_t>(p->value.rank()));
        for (int d : p->value.shape()) write_u32(os, static_cast<uint32_t>(d));
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            const float f = static_cast<float>(p->value[i]);
            os.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!os) throw DataError("ParamStore::save: write failed for " + path);
}

void ParamStore::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("ParamStore::load: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kMagic, 4))
        throw DataError("ParamStore::load: bad magic in " + path);
    const int version = is.get();
    if (version != kVersion)
        throw DataError("ParamStore::load: unsupported version " + std::to_string(version));
    const uint32_t count = read_u32(is);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t nlen = read_u32(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const uint32_t rank = read_u32(is);
        Shape shape;
        for (uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(read_u32(is)));
        Tensor t(shape);
        for (int64_t j = 0; j < t.numel(); ++j) {
            float f = 0.0f;
            is.read(reinterpret_cast<char*>(&f), 4);
            t[j] = static_cast<Real>(f);
        }
        if (!is) throw DataError("ParamStore::load: truncated payload in " + path);
        auto it = params_.find(name);
        if (it != params_.end()) {
            if (it->second->value.shape() != shape)
                throw DataError("ParamStore::load: shape mismatch for " + name);
            it->second->value = std::move(t);
        } else {
            params_[name] = std::make_unique<Parameter>(name, std::move(t));
        }
    }
}

}  // namespace aei::nn
