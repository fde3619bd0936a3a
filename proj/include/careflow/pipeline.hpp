#pragma once
// End-to-end model: per-modality encoders, the two cyclic flow mappings
// (a->l and v->l), concat fusion, prediction head, the combined objective
// with its stop-gradient contracts, and the training loop.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "careflow/adam.hpp"
#include "careflow/flowcore.hpp"
#include "careflow/metrics.hpp"
#include "careflow/synthdata.hpp"

namespace careflow {

struct AblationFlags {
    bool no_alignment = false;    // fuse encoded features directly; train main loss only
    bool no_cyclic = false;       // force alpha_b to 0 (rng consumption unchanged)
    bool no_adaptive = false;     // force every pair margin to 0
    bool no_one_to_many = false;  // force beta to 0 (same-sample pairs only)
};

struct RunConfig {
    std::uint64_t seed = 101;
    int d = 16;              // shared feature dim
    int encoder_hidden = 32;
    int fusion_hidden = 32;
    int epochs = 45;
    int batch = 32;
    double lr = 1e-3;
    double alpha_f = 1.0;    // forward-loss weight
    double alpha_b = 0.1;    // backward-loss weight
    double epsilon = 0.1;    // base cross-sample margin
    int beta = 4;            // cross-sample pairs per same-sample pair
    int euler_steps = 2;
    int acc_bins = 7;        // AccK bin count for regression metrics
    int ablate_seeds = 5;
    Task task = Task::Regression;
    AblationFlags ablation;
    // Treat the euler_map input as a constant: neither the main loss nor the
    // cyclic pull then reaches the source encoder through the transport.
    bool detach_main_path = false;
};

inline void validate_run_config(const RunConfig& cfg) {
    if (cfg.d < 2 || cfg.d % 2 != 0)
        throw ConfigError("config: d must be even and >= 2, got " + std::to_string(cfg.d));
    if (cfg.encoder_hidden < 1) throw ConfigError("config: encoder_hidden must be >= 1");
    if (cfg.fusion_hidden < 1) throw ConfigError("config: fusion_hidden must be >= 1");
    if (cfg.epochs < 0) throw ConfigError("config: epochs must be >= 0");
    if (cfg.batch < 1) throw ConfigError("config: batch must be >= 1");
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("config: lr must be > 0");
    if (cfg.alpha_f < 0.0) throw ConfigError("config: alpha_f must be >= 0");
    if (cfg.alpha_b < 0.0) throw ConfigError("config: alpha_b must be >= 0");
    if (cfg.epsilon < 0.0) throw ConfigError("config: epsilon must be >= 0");
    if (cfg.beta < 0) throw ConfigError("config: beta must be >= 0");
    if (cfg.euler_steps < 1) throw ConfigError("config: euler_steps must be >= 1");
    if (cfg.acc_bins < 2) throw ConfigError("config: acc_bins must be >= 2");
    if (cfg.ablate_seeds < 1) throw ConfigError("config: ablate_seeds must be >= 1");
}

struct ModelBundle {
    std::array<MlpParams, 3> encoders;  // indexed by Modality {a, v, l}
    DriftModel fwd_a2l, fwd_v2l;
    DriftModel bwd_a2l, bwd_v2l;
    MlpParams fusion;     // 3d -> d
    MlpParams predictor;  // d -> out_dim
    int d = 0;
    int out_dim = 0;      // 1 (regression) or class count
    Task task = Task::Regression;
};

// Initialization order is fixed so a given seed always produces the same
// bundle: encoders a, v, l; forward drifts a2l, v2l; backward drifts a2l,
// v2l; fusion; predictor.
inline ModelBundle make_bundle(const RunConfig& cfg, const DatasetSpec& spec) {
    if (cfg.d < 1) throw ConfigError("make_bundle: d must be positive");
    ModelBundle bundle;
    bundle.d = cfg.d;
    bundle.task = spec.task;
    bundle.out_dim = spec.task == Task::Classification ? spec.classes : 1;
    Rng rng(mix_seed(cfg.seed, 0x696e6974ULL));
    const std::size_t d = static_cast<std::size_t>(cfg.d);
    const std::size_t eh = static_cast<std::size_t>(cfg.encoder_hidden);
    const std::size_t fh = static_cast<std::size_t>(cfg.fusion_hidden);
    for (std::size_t m = 0; m < 3; ++m) {
        const std::size_t raw = static_cast<std::size_t>(
            spec.raw_dim(static_cast<Modality>(m)));
        bundle.encoders[m] =
            init_params({raw, eh, d}, {Activation::Tanh, Activation::Identity}, rng);
    }
    bundle.fwd_a2l = make_drift_model(d, FlowDirection::Forward, rng);
    bundle.fwd_v2l = make_drift_model(d, FlowDirection::Forward, rng);
    bundle.bwd_a2l = make_drift_model(d, FlowDirection::Backward, rng);
    bundle.bwd_v2l = make_drift_model(d, FlowDirection::Backward, rng);
    bundle.fusion =
        init_params({3 * d, fh, d}, {Activation::Tanh, Activation::Identity}, rng);
    bundle.predictor =
        init_params({d, static_cast<std::size_t>(bundle.out_dim)}, {Activation::Identity}, rng);
    return bundle;
}

struct BundleGrads {
    std::array<MlpGrads, 3> encoders;
    MlpGrads fwd_a2l, fwd_v2l, bwd_a2l, bwd_v2l;
    MlpGrads fusion, predictor;
};

inline BundleGrads make_bundle_grads(const ModelBundle& bundle) {
    BundleGrads g;
    for (std::size_t m = 0; m < 3; ++m) g.encoders[m] = zero_grads(bundle.encoders[m]);
    g.fwd_a2l = zero_grads(bundle.fwd_a2l.net);
    g.fwd_v2l = zero_grads(bundle.fwd_v2l.net);
    g.bwd_a2l = zero_grads(bundle.bwd_a2l.net);
    g.bwd_v2l = zero_grads(bundle.bwd_v2l.net);
    g.fusion = zero_grads(bundle.fusion);
    g.predictor = zero_grads(bundle.predictor);
    return g;
}

// Scalar views over every parameter / gradient, in matching order.
inline std::vector<double*> bundle_param_views(ModelBundle& bundle) {
    std::vector<double*> view;
    for (std::size_t m = 0; m < 3; ++m) append_param_view(view, bundle.encoders[m]);
    append_param_view(view, bundle.fwd_a2l.net);
    append_param_view(view, bundle.fwd_v2l.net);
    append_param_view(view, bundle.bwd_a2l.net);
    append_param_view(view, bundle.bwd_v2l.net);
    append_param_view(view, bundle.fusion);
    append_param_view(view, bundle.predictor);
    return view;
}

inline std::vector<const double*> bundle_grad_views(const BundleGrads& grads) {
    std::vector<const double*> view;
    for (std::size_t m = 0; m < 3; ++m) append_grad_view(view, grads.encoders[m]);
    append_grad_view(view, grads.fwd_a2l);
    append_grad_view(view, grads.fwd_v2l);
    append_grad_view(view, grads.bwd_a2l);
    append_grad_view(view, grads.bwd_v2l);
    append_grad_view(view, grads.fusion);
    append_grad_view(view, grads.predictor);
    return view;
}

struct Batch {
    std::array<Matrix, 3> raw;   // one [B x d_m] block per modality
    std::vector<double> labels;  // length B
};

inline Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw ShapeError("make_batch: empty index set");
    Batch batch;
    for (std::size_t m = 0; m < 3; ++m) {
        const std::size_t dm = samples[idx[0]].raw[m].size();
        batch.raw[m] = Matrix(idx.size(), dm);
        for (std::size_t i = 0; i < idx.size(); ++i)
            batch.raw[m].set_row(i, samples[idx[i]].raw[m]);
    }
    batch.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) batch.labels[i] = samples[idx[i]].label;
    return batch;
}

inline Batch full_batch(const std::vector<Sample>& samples) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return make_batch(samples, idx);
}

struct ForwardResult {
    std::array<Matrix, 3> encoded;  // X_a, X_v, X_l
    Matrix mapped_a, mapped_v;      // transported features (empty under no_alignment)
    Matrix fused_in, fused, predictions;
};

struct ForwardCaches {
    std::array<MlpCache, 3> enc;
    EulerCache euler_a, euler_v;
    MlpCache fusion, predictor;
};

// Fusion consumes [X_l | X_{a,l} | X_{v,l}], or [X_l | X_a | X_v] when
// alignment is ablated.
inline ForwardResult forward_pass(const ModelBundle& bundle, const Batch& batch,
                                  const RunConfig& cfg, ForwardCaches* caches = nullptr) {
    if (batch.labels.empty()) throw ShapeError("forward_pass: empty batch");
    ForwardResult fr;
    for (std::size_t m = 0; m < 3; ++m)
        fr.encoded[m] =
            mlp_forward(bundle.encoders[m], batch.raw[m], caches ? &caches->enc[m] : nullptr);
    const Matrix* slot_a = &fr.encoded[0];
    const Matrix* slot_v = &fr.encoded[1];
    if (!cfg.ablation.no_alignment) {
        fr.mapped_a = euler_map(bundle.fwd_a2l, fr.encoded[0], cfg.euler_steps,
                                caches ? &caches->euler_a : nullptr);
        fr.mapped_v = euler_map(bundle.fwd_v2l, fr.encoded[1], cfg.euler_steps,
                                caches ? &caches->euler_v : nullptr);
        slot_a = &fr.mapped_a;
        slot_v = &fr.mapped_v;
    }
    fr.fused_in = hconcat({&fr.encoded[2], slot_a, slot_v});
    fr.fused = mlp_forward(bundle.fusion, fr.fused_in, caches ? &caches->fusion : nullptr);
    fr.predictions =
        mlp_forward(bundle.predictor, fr.fused, caches ? &caches->predictor : nullptr);
    return fr;
}

// Mean squared error (regression) or softmax cross-entropy (classification).
// When `grad` is given it receives dLoss/d(predictions).
inline double main_loss(const Matrix& predictions, const std::vector<double>& labels, Task task,
                        Matrix* grad = nullptr) {
    if (predictions.rows != labels.size()) throw ShapeError("main_loss: batch size mismatch");
    if (predictions.rows == 0) throw ShapeError("main_loss: empty batch");
    const double n = static_cast<double>(predictions.rows);
    if (grad) *grad = Matrix(predictions.rows, predictions.cols);

    if (task == Task::Regression) {
        if (predictions.cols != 1)
            throw ShapeError("main_loss: regression expects a single output column");
        double loss = 0.0;
        for (std::size_t i = 0; i < predictions.rows; ++i) {
            const double e = predictions(i, 0) - labels[i];
            loss += e * e;
            if (grad) (*grad)(i, 0) = 2.0 * e / n;
        }
        return loss / n;
    }

    const std::size_t c = predictions.cols;
    if (c < 2) throw ShapeError("main_loss: classification expects >= 2 logits");
    double loss = 0.0;
    for (std::size_t i = 0; i < predictions.rows; ++i) {
        const long cls = std::lround(labels[i]);
        if (cls < 0 || static_cast<std::size_t>(cls) >= c ||
            labels[i] != static_cast<double>(cls))
            throw ConfigError("main_loss: label " + std::to_string(labels[i]) +
                              " outside class range [0, " + std::to_string(c) + ")");
        double hi = predictions(i, 0);
        for (std::size_t j = 1; j < c; ++j) hi = std::max(hi, predictions(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(predictions(i, j) - hi);
        const double log_z = hi + std::log(z);
        loss += log_z - predictions(i, static_cast<std::size_t>(cls));
        if (grad)
            for (std::size_t j = 0; j < c; ++j)
                (*grad)(i, j) = (std::exp(predictions(i, j) - log_z) -
                                 (j == static_cast<std::size_t>(cls) ? 1.0 : 0.0)) /
                                n;
    }
    return loss / n;
}

// Frozen randomness and frozen detached values for one optimization step.
// Pair features and the cyclic-loss source points are value copies taken
// here, which is exactly what the stop-gradient contracts require; the same
// plan then serves both the analytic pass and finite-difference probing.
struct LossPlan {
    bool has_alignment = true;
    double alpha_f_eff = 0.0;
    double alpha_b_eff = 0.0;
    PairBatch pairs_a, pairs_v;
    Matrix x_src_a, x_src_v;        // constants for the cyclic loss
    std::vector<double> ts_a, ts_v; // cyclic-loss time draws
};

// Draw order is fixed: pairs a, pairs v, cyclic ts a, cyclic ts v. The
// cyclic ts are drawn even when alpha_b is zeroed so that the no_cyclic flag
// and alpha_b=0 consume identical rng streams.
inline LossPlan make_loss_plan(const ModelBundle& bundle, const Batch& batch,
                               const RunConfig& cfg, Rng& rng) {
    LossPlan plan;
    plan.has_alignment = !cfg.ablation.no_alignment;
    plan.alpha_f_eff = plan.has_alignment ? cfg.alpha_f : 0.0;
    plan.alpha_b_eff = (plan.has_alignment && !cfg.ablation.no_cyclic) ? cfg.alpha_b : 0.0;
    if (!plan.has_alignment) return plan;

    const Matrix x_a = mlp_forward(bundle.encoders[0], batch.raw[0]);
    const Matrix x_v = mlp_forward(bundle.encoders[1], batch.raw[1]);
    const Matrix x_l = mlp_forward(bundle.encoders[2], batch.raw[2]);

    FlowConfig fc;
    fc.epsilon = cfg.epsilon;
    fc.beta = cfg.ablation.no_one_to_many ? 0 : cfg.beta;
    fc.euler_steps = cfg.euler_steps;
    fc.task = cfg.task;

    plan.pairs_a = sample_pairs(x_a, x_l, batch.labels, Modality::Audio, Modality::Language,
                                fc, rng);
    plan.pairs_v = sample_pairs(x_v, x_l, batch.labels, Modality::Visual, Modality::Language,
                                fc, rng);
    if (cfg.ablation.no_adaptive) {
        for (FlowPair& p : plan.pairs_a.pairs) p.eta = 0.0;
        for (FlowPair& p : plan.pairs_v.pairs) p.eta = 0.0;
    }
    plan.x_src_a = x_a;
    plan.x_src_v = x_v;
    plan.ts_a.resize(batch.labels.size());
    for (double& t : plan.ts_a) t = rng.uniform();
    plan.ts_v.resize(batch.labels.size());
    for (double& t : plan.ts_v) t = rng.uniform();
    return plan;
}

// Per-term multipliers used by tests to isolate gradient paths.
struct LossWeights {
    double main = 1.0;
    double forward = 1.0;
    double backward = 1.0;
};

struct LossParts {
    double total = 0.0;
    double main = 0.0;
    double fwd_a = 0.0, fwd_v = 0.0;
    double bwd_a = 0.0, bwd_v = 0.0;
    int pair_warnings = 0;
};

// L_total = L + sum over mappings of (alpha_f L^f + alpha_b L^b), Gradient
// routing:
//   - main loss: predictor -> fusion -> {encoder_l; euler chains -> source
//     encoders (unless detach_main_path)}
//   - forward losses: drift parameters only (pair features are constants)
//   - backward losses: backward drift parameters, plus the pull on x_mapped
//     through the forward euler chain; the source points are constants.
inline LossParts total_loss(const ModelBundle& bundle, const Batch& batch, const RunConfig& cfg,
                            const LossPlan& plan, BundleGrads* grads = nullptr,
                            const LossWeights& weights = LossWeights{}) {
    ForwardCaches caches;
    const ForwardResult fr = forward_pass(bundle, batch, cfg, grads ? &caches : nullptr);
    LossParts parts;
    parts.pair_warnings = plan.pairs_a.warnings + plan.pairs_v.warnings;

    const bool want_main = grads && weights.main != 0.0;
    Matrix grad_pred;
    parts.main = main_loss(fr.predictions, batch.labels, cfg.task,
                           want_main ? &grad_pred : nullptr);

    Matrix cycle_grad_a, cycle_grad_v;  // alpha-scaled dL/d(x_mapped)
    if (plan.has_alignment) {
        const double f_scale = plan.alpha_f_eff * weights.forward;
        const double b_scale = plan.alpha_b_eff * weights.backward;

        if (grads && f_scale != 0.0) {
            MlpGrads tmp = zero_grads(bundle.fwd_a2l.net);
            parts.fwd_a = forward_loss(bundle.fwd_a2l, plan.pairs_a, &tmp);
            accumulate(grads->fwd_a2l, tmp, f_scale);
            tmp = zero_grads(bundle.fwd_v2l.net);
            parts.fwd_v = forward_loss(bundle.fwd_v2l, plan.pairs_v, &tmp);
            accumulate(grads->fwd_v2l, tmp, f_scale);
        } else {
            parts.fwd_a = forward_loss(bundle.fwd_a2l, plan.pairs_a);
            parts.fwd_v = forward_loss(bundle.fwd_v2l, plan.pairs_v);
        }

        if (grads && b_scale != 0.0) {
            MlpGrads tmp = zero_grads(bundle.bwd_a2l.net);
            BackwardLossResult res =
                backward_loss_at(bundle.bwd_a2l, plan.x_src_a, fr.mapped_a, plan.ts_a, &tmp);
            parts.bwd_a = res.value;
            accumulate(grads->bwd_a2l, tmp, b_scale);
            cycle_grad_a = std::move(res.grad_x_mapped);
            for (double& g : cycle_grad_a.data) g *= b_scale;

            tmp = zero_grads(bundle.bwd_v2l.net);
            res = backward_loss_at(bundle.bwd_v2l, plan.x_src_v, fr.mapped_v, plan.ts_v, &tmp);
            parts.bwd_v = res.value;
            accumulate(grads->bwd_v2l, tmp, b_scale);
            cycle_grad_v = std::move(res.grad_x_mapped);
            for (double& g : cycle_grad_v.data) g *= b_scale;
        } else {
            parts.bwd_a =
                backward_loss_at(bundle.bwd_a2l, plan.x_src_a, fr.mapped_a, plan.ts_a).value;
            parts.bwd_v =
                backward_loss_at(bundle.bwd_v2l, plan.x_src_v, fr.mapped_v, plan.ts_v).value;
        }
    }

    parts.total = weights.main * parts.main +
                  plan.alpha_f_eff * weights.forward * (parts.fwd_a + parts.fwd_v) +
                  plan.alpha_b_eff * weights.backward * (parts.bwd_a + parts.bwd_v);
    if (!grads) return parts;

    const std::size_t n = batch.labels.size();
    const std::size_t d = static_cast<std::size_t>(bundle.d);
    Matrix grad_l(n, d), grad_slot_a(n, d), grad_slot_v(n, d);
    if (want_main) {
        const Matrix grad_fused =
            mlp_backward(bundle.predictor, caches.predictor, grad_pred, grads->predictor);
        const Matrix grad_in =
            mlp_backward(bundle.fusion, caches.fusion, grad_fused, grads->fusion);
        grad_l = slice_cols(grad_in, 0, d);
        grad_slot_a = slice_cols(grad_in, d, d);
        grad_slot_v = slice_cols(grad_in, 2 * d, d);
        mlp_backward(bundle.encoders[2], caches.enc[2], grad_l, grads->encoders[2]);
    }

    if (plan.has_alignment) {
        if (want_main || cycle_grad_a.rows != 0) {
            Matrix grad_end = std::move(grad_slot_a);
            if (cycle_grad_a.rows != 0) axpy(grad_end, 1.0, cycle_grad_a);
            const Matrix grad_x0 =
                euler_backward(bundle.fwd_a2l, caches.euler_a, grad_end, grads->fwd_a2l);
            if (!cfg.detach_main_path)
                mlp_backward(bundle.encoders[0], caches.enc[0], grad_x0, grads->encoders[0]);
        }
        if (want_main || cycle_grad_v.rows != 0) {
            Matrix grad_end = std::move(grad_slot_v);
            if (cycle_grad_v.rows != 0) axpy(grad_end, 1.0, cycle_grad_v);
            const Matrix grad_x0 =
                euler_backward(bundle.fwd_v2l, caches.euler_v, grad_end, grads->fwd_v2l);
            if (!cfg.detach_main_path)
                mlp_backward(bundle.encoders[1], caches.enc[1], grad_x0, grads->encoders[1]);
        }
    } else if (want_main) {
        mlp_backward(bundle.encoders[0], caches.enc[0], grad_slot_a, grads->encoders[0]);
        mlp_backward(bundle.encoders[1], caches.enc[1], grad_slot_v, grads->encoders[1]);
    }
    return parts;
}

inline std::vector<double> scalar_predictions(const Matrix& predictions, Task task) {
    std::vector<double> out(predictions.rows);
    if (task == Task::Regression) {
        for (std::size_t i = 0; i < predictions.rows; ++i) out[i] = predictions(i, 0);
        return out;
    }
    for (std::size_t i = 0; i < predictions.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < predictions.cols; ++j)
            if (predictions(i, j) > predictions(i, best)) best = j;
        out[i] = static_cast<double>(best);
    }
    return out;
}

inline std::vector<double> predict(const ModelBundle& bundle, const std::vector<Sample>& samples,
                                   const RunConfig& cfg) {
    const Batch batch = full_batch(samples);
    return scalar_predictions(forward_pass(bundle, batch, cfg).predictions, cfg.task);
}

struct MappingEval {
    double pre_energy = 0.0, post_energy = 0.0;
    double pre_centroid = 0.0, post_centroid = 0.0;
    double cycle = 0.0;          // round-trip through the backward flow
    double straightness = 1.0;   // pooled path/chord of the forward transport
    bool straightness_degenerate = false;
};

struct EvalReport {
    std::size_t samples = 0;
    double main = 0.0;
    TaskMetrics task;
    bool has_alignment = true;
    MappingEval map_a, map_v;  // a->l and v->l against the language cloud
};

inline MappingEval eval_mapping(const DriftModel& fwd, const DriftModel& bwd,
                                const Matrix& x_src, const Matrix& x_tgt, int steps) {
    MappingEval e;
    EulerCache cache;
    const Matrix mapped = euler_map(fwd, x_src, steps, &cache);
    e.pre_energy = energy_distance(x_src, x_tgt);
    e.post_energy = energy_distance(mapped, x_tgt);
    e.pre_centroid = centroid_gap(x_src, x_tgt);
    e.post_centroid = centroid_gap(mapped, x_tgt);
    e.cycle = cycle_error(x_src, euler_map(bwd, mapped, steps));
    const Straightness s = straightness_ratio(cache.trajectory);
    e.straightness = s.ratio;
    e.straightness_degenerate = s.degenerate;
    return e;
}

// Scores a split without touching any parameter. Language features never
// enter the a->l / v->l transports; they only serve as the target cloud.
inline EvalReport evaluate(const ModelBundle& bundle, const std::vector<Sample>& samples,
                           const RunConfig& cfg, const DatasetSpec& spec,
                           int euler_steps_override = 0) {
    if (samples.empty()) throw ShapeError("evaluate: empty split");
    RunConfig ecfg = cfg;
    if (euler_steps_override > 0) ecfg.euler_steps = euler_steps_override;
    const Batch batch = full_batch(samples);
    const ForwardResult fr = forward_pass(bundle, batch, ecfg);

    EvalReport rep;
    rep.samples = samples.size();
    rep.main = main_loss(fr.predictions, batch.labels, cfg.task);
    rep.task = task_metrics(scalar_predictions(fr.predictions, cfg.task), batch.labels, cfg.task,
                            spec.label_range, cfg.acc_bins, spec.classes);
    rep.has_alignment = !cfg.ablation.no_alignment;
    if (rep.has_alignment && samples.size() >= 2) {
        rep.map_a = eval_mapping(bundle.fwd_a2l, bundle.bwd_a2l, fr.encoded[0], fr.encoded[2],
                                 ecfg.euler_steps);
        rep.map_v = eval_mapping(bundle.fwd_v2l, bundle.bwd_v2l, fr.encoded[1], fr.encoded[2],
                                 ecfg.euler_steps);
    }
    return rep;
}

struct BundleAdam {
    std::array<AdamState, 3> encoders;
    AdamState fwd_a2l, fwd_v2l, bwd_a2l, bwd_v2l;
    AdamState fusion, predictor;
};

inline BundleAdam make_bundle_adam(const ModelBundle& bundle) {
    BundleAdam st;
    for (std::size_t m = 0; m < 3; ++m) st.encoders[m] = make_adam_state(bundle.encoders[m]);
    st.fwd_a2l = make_adam_state(bundle.fwd_a2l.net);
    st.fwd_v2l = make_adam_state(bundle.fwd_v2l.net);
    st.bwd_a2l = make_adam_state(bundle.bwd_a2l.net);
    st.bwd_v2l = make_adam_state(bundle.bwd_v2l.net);
    st.fusion = make_adam_state(bundle.fusion);
    st.predictor = make_adam_state(bundle.predictor);
    return st;
}

inline void bundle_adam_step(ModelBundle& bundle, const BundleGrads& grads, BundleAdam& st,
                             double lr) {
    for (std::size_t m = 0; m < 3; ++m)
        adam_step(bundle.encoders[m], grads.encoders[m], st.encoders[m], lr);
    adam_step(bundle.fwd_a2l.net, grads.fwd_a2l, st.fwd_a2l, lr);
    adam_step(bundle.fwd_v2l.net, grads.fwd_v2l, st.fwd_v2l, lr);
    adam_step(bundle.bwd_a2l.net, grads.bwd_a2l, st.bwd_a2l, lr);
    adam_step(bundle.bwd_v2l.net, grads.bwd_v2l, st.bwd_v2l, lr);
    adam_step(bundle.fusion, grads.fusion, st.fusion, lr);
    adam_step(bundle.predictor, grads.predictor, st.predictor, lr);
}

struct EpochRow {
    int epoch = 0;
    double train_total = 0.0, train_main = 0.0;
    double train_fwd_a = 0.0, train_fwd_v = 0.0;
    double train_bwd_a = 0.0, train_bwd_v = 0.0;
    double val_main = 0.0;
    TaskMetrics val;
};

struct TrainReport {
    std::vector<EpochRow> epochs;
    int best_epoch = -1;
    double best_val_main = std::numeric_limits<double>::infinity();
    EvalReport test_eval;       // scored with the restored best parameters
    double wall_seconds = 0.0;  // informational only; never serialized
};

// Seeded-shuffle minibatch loop with Adam updates and per-epoch validation.
// The parameters that scored the best validation main loss are restored
// before the final test evaluation. Deterministic given (config, dataset).
inline TrainReport train(ModelBundle& bundle, const Dataset& data, const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    TrainReport report;
    if (cfg.epochs == 0) return report;
    if (data.train.empty() || data.val.empty() || data.test.empty())
        throw ConfigError("train: all three splits must be nonempty");

    Rng rng(mix_seed(cfg.seed, 0x747261696eULL));
    BundleAdam adam = make_bundle_adam(bundle);
    ModelBundle best = bundle;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        EpochRow row;
        row.epoch = epoch;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Batch batch = make_batch(data.train, idx);
            const LossPlan plan = make_loss_plan(bundle, batch, cfg, rng);
            BundleGrads grads = make_bundle_grads(bundle);
            LossParts parts;
            try {
                parts = total_loss(bundle, batch, cfg, plan, &grads);
            } catch (const NumericError& e) {
                throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                                   std::to_string(epoch) + " batch " + std::to_string(batches));
            }
            if (!std::isfinite(parts.total))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(batches));
            bundle_adam_step(bundle, grads, adam, cfg.lr);
            row.train_total += parts.total;
            row.train_main += parts.main;
            row.train_fwd_a += parts.fwd_a;
            row.train_fwd_v += parts.fwd_v;
            row.train_bwd_a += parts.bwd_a;
            row.train_bwd_v += parts.bwd_v;
            ++batches;
        }
        const double inv = 1.0 / static_cast<double>(batches);
        row.train_total *= inv;
        row.train_main *= inv;
        row.train_fwd_a *= inv;
        row.train_fwd_v *= inv;
        row.train_bwd_a *= inv;
        row.train_bwd_v *= inv;

        const EvalReport val = evaluate(bundle, data.val, cfg, data.spec);
        row.val_main = val.main;
        row.val = val.task;
        report.epochs.push_back(row);
        if (val.main < report.best_val_main) {
            report.best_val_main = val.main;
            report.best_epoch = epoch;
            best = bundle;
        }
    }

    bundle = best;
    report.test_eval = evaluate(bundle, data.test, cfg, data.spec);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace careflow
