#pragma once
// Time-conditioned velocity networks: sinusoidal time embedding concatenated
// with features, then a small MLP. One model per flow direction.

#include <cstddef>
#include <string>
#include <vector>

#include "careflow/mlp.hpp"

namespace careflow {

// Sinusoidal embedding: out[2i] = sin(t*1000 / 10000^(2i/d)),
// out[2i+1] = cos(...). Parameter-free; entries in [-1, 1].
inline std::vector<double> time_embed(double t, std::size_t d) {
    if (d == 0 || d % 2 != 0)
        throw ConfigError("time_embed: dimension must be even and positive, got " +
                          std::to_string(d));
    if (!(t >= 0.0 && t <= 1.0))
        throw ConfigError("time_embed: t must lie in [0, 1]");
    std::vector<double> out(d);
    for (std::size_t i = 0; 2 * i < d; ++i) {
        const double freq = 1000.0 / std::pow(10000.0, (2.0 * static_cast<double>(i)) /
                                                           static_cast<double>(d));
        out[2 * i] = std::sin(t * freq);
        out[2 * i + 1] = std::cos(t * freq);
    }
    return out;
}

enum class FlowDirection { Forward, Backward };

struct DriftModel {
    MlpParams net;            // input width = feature_dim + embed_dim, output = feature_dim
    std::size_t feature_dim = 0;
    std::size_t embed_dim = 0;  // feature_dim rounded up to even
    FlowDirection direction = FlowDirection::Forward;
};

// Network shape: (d + e) -> 2d tanh -> 2d tanh -> d identity.
inline DriftModel make_drift_model(std::size_t d, FlowDirection direction, Rng& rng) {
    if (d == 0) throw ConfigError("make_drift_model: feature dim must be positive");
    DriftModel model;
    model.feature_dim = d;
    model.embed_dim = (d % 2 == 0) ? d : d + 1;
    model.direction = direction;
    const std::size_t hidden = 2 * d;
    model.net = init_params({d + model.embed_dim, hidden, hidden, d},
                            {Activation::Tanh, Activation::Tanh, Activation::Identity}, rng);
    return model;
}

// Concatenates each feature row with the embedding of its own time value.
inline Matrix drift_input(const DriftModel& model, const Matrix& x,
                          const std::vector<double>& ts) {
    if (x.cols != model.feature_dim)
        throw ShapeError("drift_input: feature width " + std::to_string(x.cols) +
                         " != model dim " + std::to_string(model.feature_dim));
    if (ts.size() != x.rows) throw ShapeError("drift_input: one time value per row required");
    Matrix input(x.rows, model.feature_dim + model.embed_dim);
    for (std::size_t b = 0; b < x.rows; ++b) {
        std::copy(x.row(b), x.row(b) + x.cols, input.row(b));
        const std::vector<double> te = time_embed(ts[b], model.embed_dim);
        std::copy(te.begin(), te.end(), input.row(b) + model.feature_dim);
    }
    return input;
}

// Velocity of every row at its own time value.
inline Matrix drift_eval_each(const DriftModel& model, const Matrix& x,
                              const std::vector<double>& ts, MlpCache* cache = nullptr) {
    return mlp_forward(model.net, drift_input(model, x, ts), cache);
}

// Velocity of the whole batch at one shared time value.
inline Matrix drift_eval(const DriftModel& model, const Matrix& x, double t,
                         MlpCache* cache = nullptr) {
    return drift_eval_each(model, x, std::vector<double>(x.rows, t), cache);
}

// Backward pass for the velocity network. Parameter gradients accumulate into
// `grads`; the returned matrix is the gradient w.r.t. the feature slice only.
// The time-embedding slice carries no parameters and its gradient is dropped.
inline Matrix drift_backward(const DriftModel& model, const MlpCache& cache,
                             const Matrix& grad_out, MlpGrads& grads) {
    Matrix grad_full = mlp_backward(model.net, cache, grad_out, grads);
    return slice_cols(grad_full, 0, model.feature_dim);
}

}  // namespace careflow
