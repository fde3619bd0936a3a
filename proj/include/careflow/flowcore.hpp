#pragma once
// Core flow mathematics: interpolation, one-to-many pair sampling with
// adaptive margins, the hinged forward loss, the cyclic backward loss, and
// multi-step Euler transport with an exact reverse-mode pass.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "careflow/driftnet.hpp"
#include "careflow/matrix.hpp"
#include "careflow/rng.hpp"

namespace careflow {

enum class Task { Regression, Classification };

inline const char* task_name(Task t) {
    return t == Task::Regression ? "regression" : "classification";
}

inline Task parse_task(const std::string& s) {
    if (s == "regression") return Task::Regression;
    if (s == "classification") return Task::Classification;
    throw ConfigError("unknown task '" + s + "' (expected regression or classification)");
}

enum class Modality { Audio = 0, Visual = 1, Language = 2 };

inline const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Audio: return "a";
        case Modality::Visual: return "v";
        default: return "l";
    }
}

struct FlowConfig {
    double epsilon = 0.1;  // base margin for cross-sample pairs
    int beta = 4;          // cross-sample pairs per same-sample pair
    int euler_steps = 2;
    Task task = Task::Regression;
};

struct FlowPair {
    std::vector<double> x_src;
    std::vector<double> x_tgt;
    double eta = 0.0;        // margin; zero iff same_sample
    double t = 0.0;          // interpolation time in [0, 1]
    bool same_sample = true;
};

struct PairBatch {
    std::vector<FlowPair> pairs;
    Modality src = Modality::Audio;
    Modality tgt = Modality::Language;
    int warnings = 0;  // incremented when cross-sample pairs were requested but B == 1
};

inline std::vector<double> interpolate(const std::vector<double>& x1,
                                       const std::vector<double>& x2, double t) {
    if (x1.size() != x2.size()) throw ShapeError("interpolate: dimension mismatch");
    std::vector<double> out(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) out[i] = (1.0 - t) * x1[i] + t * x2[i];
    return out;
}

// Margin schedule: 0 for same-sample pairs, epsilon + squared label distance
// otherwise. The label distance is 1 between different classes and 0 within
// a class for classification.
inline double margin(double y_i, double y_j, bool same_sample, double epsilon, Task task) {
    if (same_sample) return 0.0;
    double dist_sq;
    if (task == Task::Classification) {
        dist_sq = (y_i == y_j) ? 0.0 : 1.0;
    } else {
        const double diff = y_i - y_j;
        dist_sq = diff * diff;
    }
    return epsilon + dist_sq;
}

// Builds B same-sample pairs followed by beta*B cross-sample pairs drawn
// uniformly over ordered index pairs (i != j) within the minibatch. Every
// pair gets an independent t ~ Uniform[0, 1]. Pair features are value
// copies, which is exactly the detach contract of the forward loss.
inline PairBatch sample_pairs(const Matrix& src_feats, const Matrix& tgt_feats,
                              const std::vector<double>& labels, Modality src, Modality tgt,
                              const FlowConfig& config, Rng& rng) {
    if (src_feats.rows != tgt_feats.rows || src_feats.rows != labels.size())
        throw ShapeError("sample_pairs: batch size mismatch across modalities/labels");
    if (src_feats.rows == 0) throw ShapeError("sample_pairs: empty batch");
    if (config.beta < 0) throw ConfigError("sample_pairs: beta must be >= 0");

    const std::size_t batch = src_feats.rows;
    PairBatch out;
    out.src = src;
    out.tgt = tgt;
    out.pairs.reserve(batch * static_cast<std::size_t>(1 + config.beta));

    for (std::size_t i = 0; i < batch; ++i) {
        FlowPair pair;
        pair.x_src = src_feats.row_vec(i);
        pair.x_tgt = tgt_feats.row_vec(i);
        pair.eta = 0.0;
        pair.same_sample = true;
        pair.t = rng.uniform();
        out.pairs.push_back(std::move(pair));
    }

    const std::size_t n_cross = batch * static_cast<std::size_t>(config.beta);
    if (n_cross > 0 && batch == 1) {
        out.warnings += 1;
        return out;
    }
    for (std::size_t k = 0; k < n_cross; ++k) {
        const std::size_t i = rng.below(batch);
        std::size_t j = rng.below(batch - 1);
        if (j >= i) ++j;
        FlowPair pair;
        pair.x_src = src_feats.row_vec(i);
        pair.x_tgt = tgt_feats.row_vec(j);
        pair.eta = margin(labels[i], labels[j], false, config.epsilon, config.task);
        pair.same_sample = false;
        pair.t = rng.uniform();
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

// Hinged flow-matching loss: mean over pairs of
//   max(||V(x^t, t) - (x_tgt - x_src)||^2 - eta, 0).
// Pair features are constants, so only the drift parameters receive
// gradients (accumulated into *grads when given).
inline double forward_loss(const DriftModel& drift, const PairBatch& batch,
                           MlpGrads* grads = nullptr) {
    if (drift.direction != FlowDirection::Forward)
        throw ConfigError("forward_loss: drift model must be tagged forward");
    if (batch.pairs.empty()) throw ShapeError("forward_loss: empty pair batch");
    const std::size_t n = batch.pairs.size();
    const std::size_t d = drift.feature_dim;

    Matrix points(n, d);
    std::vector<double> ts(n);
    for (std::size_t p = 0; p < n; ++p) {
        const FlowPair& pair = batch.pairs[p];
        if (pair.x_src.size() != d || pair.x_tgt.size() != d)
            throw ShapeError("forward_loss: pair dimension mismatch");
        points.set_row(p, interpolate(pair.x_src, pair.x_tgt, pair.t));
        ts[p] = pair.t;
    }

    MlpCache cache;
    const Matrix velocity = drift_eval_each(drift, points, ts, grads ? &cache : nullptr);

    double loss = 0.0;
    Matrix grad_v(n, d);
    for (std::size_t p = 0; p < n; ++p) {
        const FlowPair& pair = batch.pairs[p];
        double residual_sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double r = velocity(p, c) - (pair.x_tgt[c] - pair.x_src[c]);
            residual_sq += r * r;
        }
        const double hinged = residual_sq - pair.eta;
        if (hinged > 0.0) {
            loss += hinged;
            if (grads) {
                for (std::size_t c = 0; c < d; ++c) {
                    const double r = velocity(p, c) - (pair.x_tgt[c] - pair.x_src[c]);
                    grad_v(p, c) = 2.0 * r / static_cast<double>(n);
                }
            }
        }
    }
    loss /= static_cast<double>(n);
    if (grads) drift_backward(drift, cache, grad_v, *grads);  // input grad dropped: detached
    return loss;
}

// Forward Euler simulation record; step_caches are kept only when the caller
// wants to differentiate through the transport.
struct EulerCache {
    std::vector<Matrix> trajectory;  // N+1 states, trajectory[0] == x0
    std::vector<MlpCache> step_caches;
    int steps = 0;
};

// x_{k+1} = x_k + V(x_k, k/N) / N for k = 0..N-1.
inline Matrix euler_map(const DriftModel& drift, const Matrix& x0, int steps,
                        EulerCache* cache = nullptr) {
    if (steps < 1) throw ConfigError("euler_map: need at least one step");
    if (x0.cols != drift.feature_dim) throw ShapeError("euler_map: feature width mismatch");
    const double dt = 1.0 / static_cast<double>(steps);
    Matrix x = x0;
    if (cache) {
        cache->trajectory.clear();
        cache->step_caches.assign(static_cast<std::size_t>(steps), MlpCache{});
        cache->trajectory.push_back(x);
        cache->steps = steps;
    }
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps);
        const Matrix v =
            drift_eval(drift, x, t, cache ? &cache->step_caches[static_cast<std::size_t>(k)]
                                          : nullptr);
        axpy(x, dt, v);
        if (cache) cache->trajectory.push_back(x);
    }
    ensure_finite(x, "euler_map");
    return x;
}

// Reverse-mode pass through the Euler chain. Accumulates drift parameter
// gradients and returns the gradient w.r.t. the start state x0.
inline Matrix euler_backward(const DriftModel& drift, const EulerCache& cache,
                             const Matrix& grad_end, MlpGrads& grads) {
    if (cache.steps <= 0 || cache.step_caches.size() != static_cast<std::size_t>(cache.steps))
        throw ShapeError("euler_backward: cache does not hold a simulated trajectory");
    const double dt = 1.0 / static_cast<double>(cache.steps);
    Matrix grad = grad_end;
    for (int k = cache.steps; k-- > 0;) {
        Matrix grad_v = grad;
        for (double& g : grad_v.data) g *= dt;
        const Matrix grad_x =
            drift_backward(drift, cache.step_caches[static_cast<std::size_t>(k)], grad_v, grads);
        axpy(grad, 1.0, grad_x);
    }
    return grad;
}

// Cyclic loss: mean over samples of ||Vhat(xhat^t, t) - (x_src - x_mapped)||^2
// with xhat^t = (1-t) x_mapped + t x_src. x_src is a constant; the returned
// grad_x_mapped carries the gradient that flows back into the forward flow.
struct BackwardLossResult {
    double value = 0.0;
    Matrix grad_x_mapped;
};

inline BackwardLossResult backward_loss_at(const DriftModel& drift_hat, const Matrix& x_src,
                                           const Matrix& x_mapped, const std::vector<double>& ts,
                                           MlpGrads* grads = nullptr) {
    if (drift_hat.direction != FlowDirection::Backward)
        throw ConfigError("backward_loss: drift model must be tagged backward");
    if (!x_src.same_shape(x_mapped)) throw ShapeError("backward_loss: shape mismatch");
    if (x_src.rows == 0) throw ShapeError("backward_loss: empty batch");
    if (ts.size() != x_src.rows) throw ShapeError("backward_loss: one t per sample required");
    const std::size_t n = x_src.rows;
    const std::size_t d = x_src.cols;

    Matrix points(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c)
            points(i, c) = (1.0 - ts[i]) * x_mapped(i, c) + ts[i] * x_src(i, c);

    MlpCache cache;
    const bool want_grads = grads != nullptr;
    const Matrix velocity = drift_eval_each(drift_hat, points, ts, want_grads ? &cache : nullptr);

    BackwardLossResult result;
    Matrix grad_v(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            const double r = velocity(i, c) - (x_src(i, c) - x_mapped(i, c));
            result.value += r * r;
            grad_v(i, c) = 2.0 * r / static_cast<double>(n);
        }
    }
    result.value /= static_cast<double>(n);

    if (want_grads) {
        const Matrix grad_points = drift_backward(drift_hat, cache, grad_v, *grads);
        result.grad_x_mapped = Matrix(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c)
                result.grad_x_mapped(i, c) = (1.0 - ts[i]) * grad_points(i, c) + grad_v(i, c);
    }
    return result;
}

inline BackwardLossResult backward_loss(const DriftModel& drift_hat, const Matrix& x_src,
                                        const Matrix& x_mapped, Rng& rng,
                                        MlpGrads* grads = nullptr) {
    std::vector<double> ts(x_src.rows);
    for (double& t : ts) t = rng.uniform();
    return backward_loss_at(drift_hat, x_src, x_mapped, ts, grads);
}

// Path length over chord length, pooled across the batch. 1 means perfectly
// straight transport.
struct Straightness {
    double ratio = 1.0;
    bool degenerate = false;  // zero chord (constant or closed trajectory)
};

inline Straightness straightness_ratio(const std::vector<Matrix>& trajectory) {
    if (trajectory.size() < 2)
        throw ShapeError("straightness_ratio: need at least two trajectory states");
    const Matrix& first = trajectory.front();
    const Matrix& last = trajectory.back();
    double path_sum = 0.0;
    double chord_sum = 0.0;
    for (std::size_t i = 0; i < first.rows; ++i) {
        for (std::size_t k = 0; k + 1 < trajectory.size(); ++k)
            path_sum += euclidean_distance(trajectory[k].row(i), trajectory[k + 1].row(i),
                                           first.cols);
        chord_sum += euclidean_distance(first.row(i), last.row(i), first.cols);
    }
    Straightness s;
    if (chord_sum == 0.0) {
        s.degenerate = true;
        s.ratio = (path_sum > 0.0) ? std::numeric_limits<double>::infinity() : 1.0;
    } else {
        s.ratio = path_sum / chord_sum;
    }
    return s;
}

}  // namespace careflow
