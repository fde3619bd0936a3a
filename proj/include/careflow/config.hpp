#pragma once
// Run/dataset configuration: a single strict JSON document. Unknown keys are
// rejected; emitted documents materialize every field so an artifact fully
// describes the run that produced it.

#include <array>
#include <cstdint>
#include <set>
#include <string>

#include "json.hpp"

#include "careflow/jsonio.hpp"
#include "careflow/pipeline.hpp"

namespace careflow {

// Generator knobs for the built-in benchmark family (4 latent classes on a
// 2-D latent grid; per-modality scaled isometries).
struct DatasetConfig {
    Task task = Task::Classification;
    int raw_dim = 2;
    double latent_std = 0.1;
    double label_noise = 0.05;
    double noise = 0.1;  // observation noise, shared by all three modalities
    std::array<double, 2> label_range{-1.5, 1.5};
    int train_samples = 200;
    int val_samples = 200;
    int test_samples = 500;
    std::uint64_t seed = 1;
};

struct AppConfig {
    DatasetConfig dataset;
    RunConfig run;
};

inline DatasetSpec make_dataset_spec(const DatasetConfig& dc) {
    DatasetSpec spec = default_benchmark_spec(dc.raw_dim, dc.task, dc.seed);
    spec.latent_std = dc.latent_std;
    spec.label_noise = dc.label_noise;
    spec.label_range = dc.label_range;
    spec.train_samples = dc.train_samples;
    spec.val_samples = dc.val_samples;
    spec.test_samples = dc.test_samples;
    for (ModalityChannel& ch : spec.modalities) ch.noise = dc.noise;
    validate_spec(spec);
    return spec;
}

namespace detail {

// Typed field access over one JSON object with unknown-key rejection.
class StrictReader {
   public:
    StrictReader(const nlohmann::json& obj, std::string where)
        : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
    }

    bool has(const char* key) const { return obj_.contains(key); }

    double number(const char* key, double fallback) {
        if (!take(key)) return fallback;
        if (!obj_[key].is_number()) throw ConfigError(path(key) + ": expected a number");
        return obj_[key].get<double>();
    }

    int integer(const char* key, int fallback) {
        if (!take(key)) return fallback;
        if (!obj_[key].is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
        return obj_[key].get<int>();
    }

    std::uint64_t seed(const char* key, std::uint64_t fallback) {
        if (!take(key)) return fallback;
        if (!obj_[key].is_number_unsigned() && !obj_[key].is_number_integer())
            throw ConfigError(path(key) + ": expected a non-negative integer");
        if (obj_[key].is_number_integer() && obj_[key].get<std::int64_t>() < 0)
            throw ConfigError(path(key) + ": expected a non-negative integer");
        return obj_[key].get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) {
        if (!take(key)) return fallback;
        if (!obj_[key].is_boolean()) throw ConfigError(path(key) + ": expected a boolean");
        return obj_[key].get<bool>();
    }

    std::string text(const char* key, const std::string& fallback) {
        if (!take(key)) return fallback;
        if (!obj_[key].is_string()) throw ConfigError(path(key) + ": expected a string");
        return obj_[key].get<std::string>();
    }

    std::array<double, 2> range(const char* key, std::array<double, 2> fallback) {
        if (!take(key)) return fallback;
        const nlohmann::json& arr = obj_[key];
        if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() || !arr[1].is_number())
            throw ConfigError(path(key) + ": expected [lo, hi]");
        return {arr[0].get<double>(), arr[1].get<double>()};
    }

    const nlohmann::json* object(const char* key) {
        if (!take(key)) return nullptr;
        if (!obj_[key].is_object()) throw ConfigError(path(key) + ": expected an object");
        return &obj_[key];
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!consumed_.count(item.key()))
                throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }

   private:
    bool take(const char* key) {
        if (!obj_.contains(key)) return false;
        consumed_.insert(key);
        return true;
    }
    std::string path(const char* key) const { return where_ + "." + key; }

    const nlohmann::json& obj_;
    std::string where_;
    std::set<std::string> consumed_;
};

}  // namespace detail

inline AppConfig parse_app_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: invalid JSON: " + std::string(e.what()));
    }
    AppConfig cfg;
    detail::StrictReader top(doc, "config");

    if (const nlohmann::json* ds = top.object("dataset")) {
        detail::StrictReader r(*ds, "config.dataset");
        // `name` is informational; it is re-derived from raw_dim on emit.
        r.text("name", "");
        cfg.dataset.task = parse_task(r.text("task", task_name(cfg.dataset.task)));
        cfg.dataset.raw_dim = r.integer("raw_dim", cfg.dataset.raw_dim);
        cfg.dataset.latent_std = r.number("latent_std", cfg.dataset.latent_std);
        cfg.dataset.label_noise = r.number("label_noise", cfg.dataset.label_noise);
        cfg.dataset.noise = r.number("noise", cfg.dataset.noise);
        cfg.dataset.label_range = r.range("label_range", cfg.dataset.label_range);
        cfg.dataset.train_samples = r.integer("train_samples", cfg.dataset.train_samples);
        cfg.dataset.val_samples = r.integer("val_samples", cfg.dataset.val_samples);
        cfg.dataset.test_samples = r.integer("test_samples", cfg.dataset.test_samples);
        cfg.dataset.seed = r.seed("seed", cfg.dataset.seed);
        r.finish();
    }

    if (const nlohmann::json* run = top.object("run")) {
        detail::StrictReader r(*run, "config.run");
        cfg.run.seed = r.seed("seed", cfg.run.seed);
        cfg.run.d = r.integer("d", cfg.run.d);
        cfg.run.encoder_hidden = r.integer("encoder_hidden", cfg.run.encoder_hidden);
        cfg.run.fusion_hidden = r.integer("fusion_hidden", cfg.run.fusion_hidden);
        cfg.run.epochs = r.integer("epochs", cfg.run.epochs);
        cfg.run.batch = r.integer("batch", cfg.run.batch);
        cfg.run.lr = r.number("lr", cfg.run.lr);
        cfg.run.alpha_f = r.number("alpha_f", cfg.run.alpha_f);
        cfg.run.alpha_b = r.number("alpha_b", cfg.run.alpha_b);
        cfg.run.epsilon = r.number("epsilon", cfg.run.epsilon);
        cfg.run.beta = r.integer("beta", cfg.run.beta);
        cfg.run.euler_steps = r.integer("euler_steps", cfg.run.euler_steps);
        cfg.run.acc_bins = r.integer("acc_bins", cfg.run.acc_bins);
        cfg.run.ablate_seeds = r.integer("ablate_seeds", cfg.run.ablate_seeds);
        cfg.run.detach_main_path = r.boolean("detach_main_path", cfg.run.detach_main_path);
        if (const nlohmann::json* ab = r.object("ablation")) {
            detail::StrictReader a(*ab, "config.run.ablation");
            cfg.run.ablation.no_alignment = a.boolean("no_alignment", false);
            cfg.run.ablation.no_cyclic = a.boolean("no_cyclic", false);
            cfg.run.ablation.no_adaptive = a.boolean("no_adaptive", false);
            cfg.run.ablation.no_one_to_many = a.boolean("no_one_to_many", false);
            a.finish();
        }
        r.finish();
    }
    top.finish();

    cfg.run.task = cfg.dataset.task;  // the dataset owns the task kind
    validate_run_config(cfg.run);
    return cfg;
}

inline void write_dataset_config(JsonWriter& w, const DatasetConfig& dc) {
    w.begin_object();
    w.key("name").value(dc.raw_dim == 2 ? std::string("shifted-mixture-2d")
                                        : "shifted-mixture-" + std::to_string(dc.raw_dim) + "d");
    w.key("task").value(task_name(dc.task));
    w.key("raw_dim").value(dc.raw_dim);
    w.key("latent_std").value(dc.latent_std);
    w.key("label_noise").value(dc.label_noise);
    w.key("noise").value(dc.noise);
    w.key("label_range");
    w.begin_array();
    w.value(dc.label_range[0]);
    w.value(dc.label_range[1]);
    w.end_array();
    w.key("train_samples").value(dc.train_samples);
    w.key("val_samples").value(dc.val_samples);
    w.key("test_samples").value(dc.test_samples);
    w.key("seed").value(dc.seed);
    w.end_object();
}

inline void write_run_config(JsonWriter& w, const RunConfig& run) {
    w.begin_object();
    w.key("seed").value(run.seed);
    w.key("d").value(run.d);
    w.key("encoder_hidden").value(run.encoder_hidden);
    w.key("fusion_hidden").value(run.fusion_hidden);
    w.key("epochs").value(run.epochs);
    w.key("batch").value(run.batch);
    w.key("lr").value(run.lr);
    w.key("alpha_f").value(run.alpha_f);
    w.key("alpha_b").value(run.alpha_b);
    w.key("epsilon").value(run.epsilon);
    w.key("beta").value(run.beta);
    w.key("euler_steps").value(run.euler_steps);
    w.key("acc_bins").value(run.acc_bins);
    w.key("ablate_seeds").value(run.ablate_seeds);
    w.key("detach_main_path").value(run.detach_main_path);
    w.key("ablation");
    w.begin_object();
    w.key("no_alignment").value(run.ablation.no_alignment);
    w.key("no_cyclic").value(run.ablation.no_cyclic);
    w.key("no_adaptive").value(run.ablation.no_adaptive);
    w.key("no_one_to_many").value(run.ablation.no_one_to_many);
    w.end_object();
    w.end_object();
}

// Every field explicit, defaults included.
inline std::string emit_app_config(const AppConfig& cfg) {
    JsonWriter w;
    w.begin_object();
    w.key("dataset");
    write_dataset_config(w, cfg.dataset);
    w.key("run");
    write_run_config(w, cfg.run);
    w.end_object();
    return w.str();
}

}  // namespace careflow
