#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace t2c::nn {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// Adam with decoupled weight decay.
template <class T>
struct AdamState {
    AdamConfig config;
    std::vector<T> m;
    std::vector<T> v;
    std::uint64_t step = 0;

    /// Updates `params` in place where `trainable[i]` is set (all entries when the mask is empty).
    void apply(std::span<T> params, std::span<const T> grads, std::span<const std::uint8_t> trainable = {}) {
        if (m.size() != params.size()) {
            m.assign(params.size(), T(0));
            v.assign(params.size(), T(0));
        }
        ++step;
        const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
        const auto b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!trainable.empty() && !trainable[i]) continue;
            const T g = grads[i];
            m[i] = b1 * m[i] + (T(1) - b1) * g;
            v[i] = b2 * v[i] + (T(1) - b2) * g * g;
            const double mhat = static_cast<double>(m[i]) / c1;
            const double vhat = static_cast<double>(v[i]) / c2;
            const double p = static_cast<double>(params[i]);
            params[i] = static_cast<T>(p - config.lr * (mhat / (std::sqrt(vhat) + config.eps) +
                                                        config.weight_decay * p));
        }
    }
};

}  // namespace t2c::nn
