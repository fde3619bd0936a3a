#pragma once
// Adam optimizer over MlpParams. Bias-corrected, deterministic given inputs.

#include <cmath>
#include <cstdint>

#include "careflow/mlp.hpp"

namespace careflow {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    MlpGrads m;  // first moments, shaped like the parameters
    MlpGrads v;  // second moments
    std::int64_t step = 0;
};

inline AdamState make_adam_state(const MlpParams& params) {
    return AdamState{zero_grads(params), zero_grads(params), 0};
}

inline void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
    if (grads.size() != params.layers.size() || state.m.size() != params.layers.size())
        throw ShapeError("adam_step: shape mismatch between params, grads, and state");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    auto update = [&](double& theta, double g, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        theta -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    };

    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        Layer& layer = params.layers[k];
        if (!grads[k].weight.same_shape(layer.weight))
            throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(k));
        for (std::size_t i = 0; i < layer.weight.data.size(); ++i)
            update(layer.weight.data[i], grads[k].weight.data[i], state.m[k].weight.data[i],
                   state.v[k].weight.data[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            update(layer.bias[i], grads[k].bias[i], state.m[k].bias[i], state.v[k].bias[i]);
        ensure_finite(layer.weight, "adam_step");
    }
}

}  // namespace careflow
