#pragma once
// The finite-difference audit: every loss term is re-derived numerically on
// a small instance (d=3, batch 4) and compared against the hand-written
// reverse-mode gradients. A deliberate fault-injection mode corrupts one
// analytic coordinate to prove the audit actually bites.

#include <functional>
#include <string>
#include <vector>

#include "careflow/gradcheck.hpp"
#include "careflow/jsonio.hpp"
#include "careflow/pipeline.hpp"

namespace careflow {

inline constexpr double kGradCheckTol = 1e-4;
inline constexpr double kGradCheckStep = 1e-5;

struct GradCheckItem {
    std::string name;
    std::size_t parameters = 0;
    double max_rel_err = 0.0;
    std::size_t worst_coordinate = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckItem> items;
    bool all_pass = true;
};

namespace detail {

inline GradCheckItem check_item(const std::string& name, std::vector<double*> params,
                                const std::vector<double>& analytic,
                                const std::function<double()>& f) {
    if (params.size() != analytic.size())
        throw ShapeError("gradcheck: parameter/gradient count mismatch in " + name);
    const std::vector<double> numeric = finite_diff_grad(f, params, kGradCheckStep);
    GradCheckItem item;
    item.name = name;
    item.parameters = params.size();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double err = grad_rel_err(analytic[i], numeric[i]);
        if (err > item.max_rel_err) {
            item.max_rel_err = err;
            item.worst_coordinate = i;
            item.worst_analytic = analytic[i];
            item.worst_numeric = numeric[i];
        }
    }
    item.pass = item.max_rel_err < kGradCheckTol;
    return item;
}

inline std::vector<double> copy_grads(const std::vector<const double*>& views) {
    std::vector<double> out(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) out[i] = *views[i];
    return out;
}

// Small pipeline instance: odd shared dim (exercises the padded time
// embedding), batch of 4, both tasks available.
inline RunConfig toy_run_config(Task task) {
    RunConfig cfg;
    cfg.seed = 11;
    cfg.d = 3;
    cfg.encoder_hidden = 5;
    cfg.fusion_hidden = 5;
    cfg.batch = 4;
    cfg.task = task;
    return cfg;
}

inline DatasetSpec toy_spec(Task task) {
    DatasetSpec spec = default_benchmark_spec(2, task, 5);
    spec.train_samples = 4;
    spec.val_samples = 4;
    spec.test_samples = 4;
    return spec;
}

inline GradCheckItem check_total_loss(const std::string& name, Task task,
                                      const LossWeights& weights) {
    const RunConfig cfg = toy_run_config(task);
    const DatasetSpec spec = toy_spec(task);
    ModelBundle bundle = make_bundle(cfg, spec);
    const std::vector<Sample> samples = generate(spec, Split::Train);
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Batch batch = make_batch(samples, idx);

    Rng plan_rng(mix_seed(cfg.seed, 0x706c616eULL));
    const LossPlan plan = make_loss_plan(bundle, batch, cfg, plan_rng);

    BundleGrads grads = make_bundle_grads(bundle);
    total_loss(bundle, batch, cfg, plan, &grads, weights);
    std::vector<double> analytic = copy_grads(bundle_grad_views(grads));

    return check_item(
        name, bundle_param_views(bundle), analytic,
        [&bundle, &batch, &cfg, &plan, &weights]() {
            return total_loss(bundle, batch, cfg, plan, nullptr, weights).total;
        });
}

}  // namespace detail

// inject_fault corrupts one analytic coordinate of the forward-loss check;
// the report must then fail and name that coordinate.
inline GradCheckReport run_gradcheck(bool inject_fault = false) {
    GradCheckReport report;
    auto add = [&report](GradCheckItem item) {
        report.all_pass = report.all_pass && item.pass;
        report.items.push_back(std::move(item));
    };

    // Harness sanity: quadratic with a known hand gradient.
    {
        Rng rng(3);
        const std::size_t n = 6;
        Matrix a(n, n);
        for (double& x : a.data) x = rng.uniform(-1.0, 1.0);
        std::vector<double> x(n);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        std::vector<double*> params;
        for (double& v : x) params.push_back(&v);
        std::vector<double> analytic(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                analytic[i] += (a(i, j) + a(j, i)) * x[j];
            }
        add(detail::check_item("numkit/quadratic-form", params, analytic, [&a, &x, n]() {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) s += x[i] * a(i, j) * x[j];
            return s;
        }));
    }

    // Bare network under a squared-error head.
    {
        Rng rng(17);
        MlpParams net = init_params({3, 5, 2}, {Activation::Tanh, Activation::Identity}, rng);
        Matrix x(4, 3);
        for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
        Matrix target(4, 2);
        for (double& v : target.data) v = rng.uniform(-1.0, 1.0);
        auto loss_of = [&net, &x, &target](MlpGrads* grads) {
            MlpCache cache;
            const Matrix y = mlp_forward(net, x, grads ? &cache : nullptr);
            double loss = 0.0;
            Matrix grad_y(y.rows, y.cols);
            for (std::size_t i = 0; i < y.data.size(); ++i) {
                const double r = y.data[i] - target.data[i];
                loss += r * r;
                grad_y.data[i] = 2.0 * r;
            }
            if (grads) mlp_backward(net, cache, grad_y, *grads);
            return loss;
        };
        MlpGrads grads = zero_grads(net);
        loss_of(&grads);
        std::vector<const double*> gview;
        append_grad_view(gview, grads);
        std::vector<double*> pview;
        append_param_view(pview, net);
        add(detail::check_item("mlp/squared-error", pview, detail::copy_grads(gview),
                               [&loss_of]() { return loss_of(nullptr); }));
    }

    // Velocity network at mixed times, including the odd-dim padded embedding.
    {
        Rng rng(29);
        DriftModel drift = make_drift_model(3, FlowDirection::Forward, rng);
        Matrix x(4, 3);
        for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
        const std::vector<double> ts = {0.0, 0.25, 0.625, 1.0};
        Matrix weight(4, 3);
        for (double& v : weight.data) v = rng.uniform(-1.0, 1.0);
        auto loss_of = [&drift, &x, &ts, &weight](MlpGrads* grads) {
            MlpCache cache;
            const Matrix v = drift_eval_each(drift, x, ts, grads ? &cache : nullptr);
            double loss = 0.0;
            for (std::size_t i = 0; i < v.data.size(); ++i) loss += weight.data[i] * v.data[i];
            if (grads) drift_backward(drift, cache, weight, *grads);
            return loss;
        };
        MlpGrads grads = zero_grads(drift.net);
        loss_of(&grads);
        std::vector<const double*> gview;
        append_grad_view(gview, grads);
        std::vector<double*> pview;
        append_param_view(pview, drift.net);
        add(detail::check_item("driftnet/weighted-velocity", pview, detail::copy_grads(gview),
                               [&loss_of]() { return loss_of(nullptr); }));
    }

    // Hinged pairwise alignment loss (drift parameters; pairs are constants).
    {
        Rng rng(41);
        DriftModel drift = make_drift_model(3, FlowDirection::Forward, rng);
        Matrix src(4, 3), tgt(4, 3);
        for (double& v : src.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : tgt.data) v = rng.uniform(-1.0, 1.0);
        std::vector<double> labels = {0.1, -0.4, 0.9, 0.3};
        FlowConfig fc;
        fc.epsilon = 0.05;
        fc.beta = 2;
        PairBatch pairs = sample_pairs(src, tgt, labels, Modality::Audio, Modality::Language,
                                       fc, rng);
        // Force one pair inside its margin so the clamp branch is exercised.
        if (pairs.pairs.size() > 4) pairs.pairs[4].eta = 1e6;

        MlpGrads grads = zero_grads(drift.net);
        forward_loss(drift, pairs, &grads);
        std::vector<const double*> gview;
        append_grad_view(gview, grads);
        std::vector<double> analytic = detail::copy_grads(gview);
        if (inject_fault && analytic.size() > 7) analytic[7] += 0.01;
        std::vector<double*> pview;
        append_param_view(pview, drift.net);
        add(detail::check_item("flowcore/forward-loss", pview, analytic,
                               [&drift, &pairs]() { return forward_loss(drift, pairs); }));
    }

    // Cyclic loss: backward drift parameters plus the pull on the mapped
    // points (the source points are constants by contract).
    {
        Rng rng(53);
        DriftModel drift = make_drift_model(3, FlowDirection::Backward, rng);
        Matrix x_src(4, 3), x_mapped(4, 3);
        for (double& v : x_src.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : x_mapped.data) v = rng.uniform(-1.0, 1.0);
        const std::vector<double> ts = {0.9, 0.5, 0.125, 0.0};

        MlpGrads grads = zero_grads(drift.net);
        const BackwardLossResult res = backward_loss_at(drift, x_src, x_mapped, ts, &grads);
        std::vector<const double*> gview;
        append_grad_view(gview, grads);
        add(detail::check_item("flowcore/backward-loss-params", [&]() {
                std::vector<double*> pview;
                append_param_view(pview, drift.net);
                return pview;
            }(),
            detail::copy_grads(gview), [&drift, &x_src, &x_mapped, &ts]() {
                return backward_loss_at(drift, x_src, x_mapped, ts).value;
            }));

        std::vector<double*> xview;
        for (double& v : x_mapped.data) xview.push_back(&v);
        std::vector<double> xgrad(res.grad_x_mapped.data.begin(), res.grad_x_mapped.data.end());
        add(detail::check_item("flowcore/backward-loss-mapped-points", xview, xgrad,
                               [&drift, &x_src, &x_mapped, &ts]() {
                                   return backward_loss_at(drift, x_src, x_mapped, ts).value;
                               }));
    }

    // Multi-step transport chain: parameters and start state together.
    {
        Rng rng(67);
        DriftModel drift = make_drift_model(3, FlowDirection::Forward, rng);
        Matrix x0(4, 3);
        for (double& v : x0.data) v = rng.uniform(-1.0, 1.0);
        Matrix weight(4, 3);
        for (double& v : weight.data) v = rng.uniform(-1.0, 1.0);
        const int steps = 3;
        auto loss_of = [&](MlpGrads* grads, Matrix* grad_x0) {
            EulerCache cache;
            const Matrix end = euler_map(drift, x0, steps, grads ? &cache : nullptr);
            double loss = 0.0;
            for (std::size_t i = 0; i < end.data.size(); ++i)
                loss += weight.data[i] * end.data[i];
            if (grads) {
                const Matrix gx0 = euler_backward(drift, cache, weight, *grads);
                if (grad_x0) *grad_x0 = gx0;
            }
            return loss;
        };
        MlpGrads grads = zero_grads(drift.net);
        Matrix grad_x0;
        loss_of(&grads, &grad_x0);
        std::vector<const double*> gview;
        append_grad_view(gview, grads);
        std::vector<double> analytic = detail::copy_grads(gview);
        for (double g : grad_x0.data) analytic.push_back(g);
        std::vector<double*> pview;
        append_param_view(pview, drift.net);
        for (double& v : x0.data) pview.push_back(&v);
        add(detail::check_item("flowcore/euler-chain", pview, analytic,
                               [&loss_of]() { return loss_of(nullptr, nullptr); }));
    }

    // Whole-pipeline objective, isolated and combined, both task heads.
    add(detail::check_total_loss("pipeline/main-loss", Task::Regression,
                                 LossWeights{1.0, 0.0, 0.0}));
    add(detail::check_total_loss("pipeline/forward-loss", Task::Regression,
                                 LossWeights{0.0, 1.0, 0.0}));
    add(detail::check_total_loss("pipeline/backward-loss", Task::Regression,
                                 LossWeights{0.0, 0.0, 1.0}));
    add(detail::check_total_loss("pipeline/total-loss", Task::Regression, LossWeights{}));
    add(detail::check_total_loss("pipeline/total-loss-classification", Task::Classification,
                                 LossWeights{}));

    return report;
}

inline std::string write_gradcheck_report(const GradCheckReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("format").value("careflow-gradcheck");
    w.key("version").value(1);
    w.key("tolerance").value(kGradCheckTol);
    w.key("step").value(kGradCheckStep);
    w.key("all_pass").value(report.all_pass);
    w.key("checks");
    w.begin_array();
    for (const GradCheckItem& item : report.items) {
        w.begin_object();
        w.key("name").value(item.name);
        w.key("parameters").value(item.parameters);
        w.key("max_rel_err").value(item.max_rel_err);
        w.key("worst_coordinate").value(item.worst_coordinate);
        w.key("worst_analytic").value(item.worst_analytic);
        w.key("worst_numeric").value(item.worst_numeric);
        w.key("pass").value(item.pass);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace careflow
