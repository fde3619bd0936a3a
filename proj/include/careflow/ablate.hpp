#pragma once
// Ablation sweep: the full model plus its four switch-off variants, each
// trained under a matched list of seeds. Runs are independent, so they may
// execute on a small thread pool; results are stored by index and aggregated
// in a fixed order, keeping the output identical for any thread count.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "careflow/jsonio.hpp"
#include "careflow/pipeline.hpp"

namespace careflow {

inline const std::vector<std::string>& ablation_variants() {
    static const std::vector<std::string> v = {"full", "no_alignment", "no_cyclic",
                                               "no_adaptive", "no_one_to_many"};
    return v;
}

inline RunConfig variant_config(RunConfig base, const std::string& variant) {
    base.ablation = AblationFlags{};
    if (variant == "full") return base;
    if (variant == "no_alignment")
        base.ablation.no_alignment = true;
    else if (variant == "no_cyclic")
        base.ablation.no_cyclic = true;
    else if (variant == "no_adaptive")
        base.ablation.no_adaptive = true;
    else if (variant == "no_one_to_many")
        base.ablation.no_one_to_many = true;
    else
        throw ConfigError("unknown ablation variant '" + variant + "'");
    return base;
}

// Parses CAREFLOW_THREADS; falls back to the hardware count. Always within
// [1, jobs].
inline std::size_t resolve_threads(std::size_t jobs) {
    std::size_t n = 0;
    if (const char* env = std::getenv("CAREFLOW_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
    }
    if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::min(n, std::max<std::size_t>(1, jobs));
}

struct AblationRun {
    std::string variant;
    std::uint64_t seed = 0;
    TrainReport report;
};

// Seed k of every variant uses run seed base.seed + k, so variants are
// compared under matched seeds.
inline std::vector<AblationRun> run_ablation(const Dataset& data, const RunConfig& base) {
    const std::vector<std::string>& variants = ablation_variants();
    const std::size_t seeds = static_cast<std::size_t>(base.ablate_seeds);
    const std::size_t jobs = variants.size() * seeds;
    std::vector<AblationRun> runs(jobs);

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= jobs) return;
            try {
                AblationRun& run = runs[i];
                run.variant = variants[i / seeds];
                RunConfig cfg = variant_config(base, run.variant);
                cfg.seed = base.seed + (i % seeds);
                run.seed = cfg.seed;
                ModelBundle bundle = make_bundle(cfg, data.spec);
                run.report = train(bundle, data, cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t n_threads = resolve_threads(jobs);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

inline const std::vector<std::string>& ablation_metric_names() {
    static const std::vector<std::string> names = {
        "main_loss", "acc_k",         "acc_2",         "f1",
        "mae",       "corr",          "cycle_a",       "cycle_v",
        "pre_energy_a", "post_energy_a", "pre_energy_v", "post_energy_v"};
    return names;
}

inline std::vector<double> ablation_metric_values(const EvalReport& rep) {
    const double nan = std::nan("");
    std::vector<double> v = {rep.main,     rep.task.acc_k, rep.task.acc_2, rep.task.f1,
                             rep.task.mae, rep.task.corr};
    if (rep.has_alignment) {
        v.insert(v.end(), {rep.map_a.cycle, rep.map_v.cycle, rep.map_a.pre_energy,
                           rep.map_a.post_energy, rep.map_v.pre_energy, rep.map_v.post_energy});
    } else {
        v.insert(v.end(), 6, nan);
    }
    return v;
}

struct AblationRow {
    std::string variant;
    int seeds = 0;
    std::vector<double> mean, sd;  // aligned with ablation_metric_names()
};

inline std::vector<AblationRow> summarize_ablation(const std::vector<AblationRun>& runs) {
    const std::vector<std::string>& variants = ablation_variants();
    const std::size_t n_metrics = ablation_metric_names().size();
    std::vector<AblationRow> rows;
    for (const std::string& variant : variants) {
        AblationRow row;
        row.variant = variant;
        std::vector<std::vector<double>> values(n_metrics);
        for (const AblationRun& run : runs) {
            if (run.variant != variant) continue;
            const std::vector<double> v = ablation_metric_values(run.report.test_eval);
            for (std::size_t k = 0; k < n_metrics; ++k) values[k].push_back(v[k]);
            ++row.seeds;
        }
        row.mean.assign(n_metrics, std::nan(""));
        row.sd.assign(n_metrics, std::nan(""));
        for (std::size_t k = 0; k < n_metrics; ++k) {
            const std::vector<double>& xs = values[k];
            if (xs.empty() || !std::isfinite(xs[0])) continue;
            double m = 0.0;
            for (double x : xs) m += x;
            m /= static_cast<double>(xs.size());
            double s = 0.0;
            for (double x : xs) s += (x - m) * (x - m);
            row.mean[k] = m;
            row.sd[k] = xs.size() > 1 ? std::sqrt(s / static_cast<double>(xs.size() - 1)) : 0.0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string write_ablation_csv(const std::vector<AblationRow>& rows) {
    const std::vector<std::string>& names = ablation_metric_names();
    std::string out = "variant,seeds";
    for (const std::string& n : names) out += ',' + n + "_mean," + n + "_sd";
    out += '\n';
    for (const AblationRow& row : rows) {
        out += row.variant + ',' + std::to_string(row.seeds);
        for (std::size_t k = 0; k < names.size(); ++k) {
            out += ',';
            if (std::isfinite(row.mean[k])) out += fmt_double(row.mean[k]);
            out += ',';
            if (std::isfinite(row.sd[k])) out += fmt_double(row.sd[k]);
        }
        out += '\n';
    }
    return out;
}

inline std::string write_ablation_json(const std::vector<AblationRow>& rows) {
    const std::vector<std::string>& names = ablation_metric_names();
    JsonWriter w;
    w.begin_object();
    w.key("format").value("careflow-ablation");
    w.key("version").value(1);
    w.key("metrics");
    w.begin_array();
    for (const std::string& n : names) w.value(n);
    w.end_array();
    w.key("rows");
    w.begin_array();
    for (const AblationRow& row : rows) {
        w.begin_object();
        w.key("variant").value(row.variant);
        w.key("seeds").value(row.seeds);
        w.key("mean");
        w.begin_object();
        for (std::size_t k = 0; k < names.size(); ++k) {
            w.key(names[k]);
            if (std::isfinite(row.mean[k]))
                w.value(row.mean[k]);
            else
                w.null_value();
        }
        w.end_object();
        w.key("sd");
        w.begin_object();
        for (std::size_t k = 0; k < names.size(); ++k) {
            w.key(names[k]);
            if (std::isfinite(row.sd[k]))
                w.value(row.sd[k]);
            else
                w.null_value();
        }
        w.end_object();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace careflow
