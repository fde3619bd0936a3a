#pragma once
// Feed-forward networks with hand-derived reverse-mode gradients. Batched
// inputs are [batch x in_dim] matrices; weights are [out_dim x in_dim].

#include <cstddef>
#include <string>
#include <vector>

#include "careflow/matrix.hpp"
#include "careflow/rng.hpp"

namespace careflow {

enum class Activation { Tanh, Identity };

struct Layer {
    Matrix weight;               // [out x in]
    std::vector<double> bias;    // [out]
    Activation activation = Activation::Identity;
};

struct MlpParams {
    std::vector<Layer> layers;

    std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().weight.cols; }
    std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().weight.rows; }
};

// Activation record produced by mlp_forward and consumed by mlp_backward.
// outputs[k] is the post-activation of layer k; inputs[k] its input batch.
struct MlpCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> outputs;
};

struct LayerGrads {
    Matrix weight;             // same shape as Layer::weight
    std::vector<double> bias;  // same length as Layer::bias
};

using MlpGrads = std::vector<LayerGrads>;

inline MlpGrads zero_grads(const MlpParams& params) {
    MlpGrads grads;
    grads.reserve(params.layers.size());
    for (const Layer& layer : params.layers) {
        grads.push_back({Matrix(layer.weight.rows, layer.weight.cols),
                         std::vector<double>(layer.bias.size(), 0.0)});
    }
    return grads;
}

inline void accumulate(MlpGrads& into, const MlpGrads& from, double scale = 1.0) {
    if (into.size() != from.size()) throw ShapeError("accumulate: layer count mismatch");
    for (std::size_t k = 0; k < into.size(); ++k) {
        axpy(into[k].weight, scale, from[k].weight);
        for (std::size_t i = 0; i < into[k].bias.size(); ++i)
            into[k].bias[i] += scale * from[k].bias[i];
    }
}

// Xavier-uniform weights in +-sqrt(6/(in+out)), zero biases.
inline MlpParams init_params(const std::vector<std::size_t>& dims,
                             const std::vector<Activation>& activations, Rng& rng) {
    if (dims.size() < 2) throw ConfigError("init_params: need at least one layer");
    if (activations.size() != dims.size() - 1)
        throw ConfigError("init_params: one activation per layer required");
    MlpParams params;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer layer;
        layer.weight = Matrix(dims[k + 1], dims[k]);
        layer.bias.assign(dims[k + 1], 0.0);
        layer.activation = activations[k];
        const double bound = std::sqrt(6.0 / static_cast<double>(dims[k] + dims[k + 1]));
        for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

inline Matrix mlp_forward(const MlpParams& params, const Matrix& x, MlpCache* cache = nullptr) {
    if (params.layers.empty()) throw ConfigError("mlp_forward: empty network");
    if (x.cols != params.in_dim())
        throw ShapeError("mlp_forward: input width " + std::to_string(x.cols) +
                         " does not match layer 0 in-dim " + std::to_string(params.in_dim()));
    if (cache) {
        cache->inputs.clear();
        cache->outputs.clear();
    }
    Matrix current = x;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const Layer& layer = params.layers[k];
        if (current.cols != layer.weight.cols)
            throw ShapeError("mlp_forward: width mismatch at layer " + std::to_string(k));
        if (cache) cache->inputs.push_back(current);
        Matrix next(current.rows, layer.weight.rows);
        for (std::size_t b = 0; b < current.rows; ++b) {
            const double* in = current.row(b);
            double* out = next.row(b);
            for (std::size_t o = 0; o < layer.weight.rows; ++o) {
                double sum = layer.bias[o];
                const double* w = layer.weight.row(o);
                for (std::size_t i = 0; i < layer.weight.cols; ++i) sum += w[i] * in[i];
                out[o] = (layer.activation == Activation::Tanh) ? std::tanh(sum) : sum;
            }
        }
        if (cache) cache->outputs.push_back(next);
        current = std::move(next);
    }
    ensure_finite(current, "mlp_forward");
    return current;
}

// Reverse-mode pass. grad_out is dLoss/d(output); parameter gradients are
// accumulated into `grads` (which must be shaped by zero_grads) and the
// gradient with respect to the input batch is returned.
inline Matrix mlp_backward(const MlpParams& params, const MlpCache& cache,
                           const Matrix& grad_out, MlpGrads& grads) {
    const std::size_t n_layers = params.layers.size();
    if (cache.inputs.size() != n_layers || cache.outputs.size() != n_layers)
        throw ShapeError("mlp_backward: cache does not match network (stale cache?)");
    if (grads.size() != n_layers) throw ShapeError("mlp_backward: grads shape mismatch");
    if (!grad_out.same_shape(cache.outputs.back()))
        throw ShapeError("mlp_backward: grad_out shape does not match forward output");

    Matrix grad = grad_out;
    for (std::size_t k = n_layers; k-- > 0;) {
        const Layer& layer = params.layers[k];
        const Matrix& input = cache.inputs[k];
        const Matrix& output = cache.outputs[k];
        if (input.cols != layer.weight.cols || output.cols != layer.weight.rows)
            throw ShapeError("mlp_backward: cache shape mismatch at layer " + std::to_string(k));

        // d(pre-activation) from d(post-activation)
        Matrix dpre = grad;
        if (layer.activation == Activation::Tanh) {
            for (std::size_t i = 0; i < dpre.data.size(); ++i) {
                const double a = output.data[i];
                dpre.data[i] *= (1.0 - a * a);
            }
        }

        LayerGrads& lg = grads[k];
        for (std::size_t b = 0; b < input.rows; ++b) {
            const double* in = input.row(b);
            const double* dp = dpre.row(b);
            for (std::size_t o = 0; o < layer.weight.rows; ++o) {
                double* dw = lg.weight.row(o);
                const double d = dp[o];
                for (std::size_t i = 0; i < layer.weight.cols; ++i) dw[i] += d * in[i];
                lg.bias[o] += d;
            }
        }

        Matrix grad_in(input.rows, input.cols);
        for (std::size_t b = 0; b < input.rows; ++b) {
            const double* dp = dpre.row(b);
            double* gi = grad_in.row(b);
            for (std::size_t o = 0; o < layer.weight.rows; ++o) {
                const double d = dp[o];
                const double* w = layer.weight.row(o);
                for (std::size_t i = 0; i < layer.weight.cols; ++i) gi[i] += d * w[i];
            }
        }
        grad = std::move(grad_in);
    }
    return grad;
}

// Fixed-order scalar views over all parameters of a network; used by the
// optimizer plumbing and the finite-difference oracle.
inline void append_param_view(std::vector<double*>& view, MlpParams& params) {
    for (Layer& layer : params.layers) {
        for (double& w : layer.weight.data) view.push_back(&w);
        for (double& b : layer.bias) view.push_back(&b);
    }
}

inline void append_grad_view(std::vector<const double*>& view, const MlpGrads& grads) {
    for (const LayerGrads& lg : grads) {
        for (const double& w : lg.weight.data) view.push_back(&w);
        for (const double& b : lg.bias) view.push_back(&b);
    }
}

inline std::size_t param_count(const MlpParams& params) {
    std::size_t n = 0;
    for (const Layer& layer : params.layers) n += layer.weight.data.size() + layer.bias.size();
    return n;
}

}  // namespace careflow
