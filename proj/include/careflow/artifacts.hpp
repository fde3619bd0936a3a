#pragma once
// Report serialization. Wall-clock time never enters any artifact, so
// repeated runs with one config are byte-identical.

#include <cmath>
#include <string>
#include <vector>

#include "careflow/config.hpp"
#include "careflow/jsonio.hpp"
#include "careflow/pipeline.hpp"

namespace careflow {

namespace detail {

inline void collect_flags(const EvalReport& rep, std::vector<std::string>& flags) {
    if (rep.task.corr_degenerate) flags.push_back("corr_zero_variance");
    if (rep.has_alignment) {
        if (rep.map_a.straightness_degenerate) flags.push_back("straightness_degenerate_a");
        if (rep.map_v.straightness_degenerate) flags.push_back("straightness_degenerate_v");
    }
}

inline void write_metric(JsonWriter& w, const char* name, double v) {
    w.key(name);
    if (std::isfinite(v))
        w.value(v);
    else
        w.null_value();
}

}  // namespace detail

// Flat metric-name -> value map plus a flags array for degenerate cases.
inline void write_metrics_object(JsonWriter& w, const EvalReport& rep) {
    w.begin_object();
    detail::write_metric(w, "main_loss", rep.main);
    detail::write_metric(w, "acc_k", rep.task.acc_k);
    detail::write_metric(w, "acc_2", rep.task.acc_2);
    detail::write_metric(w, "f1", rep.task.f1);
    detail::write_metric(w, "mae", rep.task.mae);
    detail::write_metric(w, "corr", rep.task.corr);
    if (rep.has_alignment) {
        detail::write_metric(w, "pre_energy_a", rep.map_a.pre_energy);
        detail::write_metric(w, "post_energy_a", rep.map_a.post_energy);
        detail::write_metric(w, "pre_centroid_a", rep.map_a.pre_centroid);
        detail::write_metric(w, "post_centroid_a", rep.map_a.post_centroid);
        detail::write_metric(w, "cycle_a", rep.map_a.cycle);
        detail::write_metric(w, "straightness_a", rep.map_a.straightness);
        detail::write_metric(w, "pre_energy_v", rep.map_v.pre_energy);
        detail::write_metric(w, "post_energy_v", rep.map_v.post_energy);
        detail::write_metric(w, "pre_centroid_v", rep.map_v.pre_centroid);
        detail::write_metric(w, "post_centroid_v", rep.map_v.post_centroid);
        detail::write_metric(w, "cycle_v", rep.map_v.cycle);
        detail::write_metric(w, "straightness_v", rep.map_v.straightness);
    }
    w.end_object();
}

inline std::string write_metrics_json(const EvalReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.key("format").value("careflow-metrics");
    w.key("version").value(1);
    w.key("samples").value(rep.samples);
    w.key("metrics");
    write_metrics_object(w, rep);
    w.key("flags");
    w.begin_array();
    std::vector<std::string> flags;
    detail::collect_flags(rep, flags);
    for (const std::string& f : flags) w.value(f);
    w.end_array();
    w.end_object();
    return w.str();
}

inline std::string write_train_report_json(const TrainReport& rep, const AppConfig& cfg) {
    JsonWriter w;
    w.begin_object();
    w.key("format").value("careflow-train-report");
    w.key("version").value(1);
    w.key("config");
    w.begin_object();
    w.key("dataset");
    write_dataset_config(w, cfg.dataset);
    w.key("run");
    write_run_config(w, cfg.run);
    w.end_object();
    w.key("best_epoch").value(rep.best_epoch);
    w.key("best_val_main");
    if (rep.best_epoch >= 0)
        w.value(rep.best_val_main);
    else
        w.null_value();
    w.key("epochs");
    w.begin_array();
    for (const EpochRow& row : rep.epochs) {
        w.begin_object();
        w.key("epoch").value(row.epoch);
        w.key("train_total").value(row.train_total);
        w.key("train_main").value(row.train_main);
        w.key("train_fwd_a").value(row.train_fwd_a);
        w.key("train_fwd_v").value(row.train_fwd_v);
        w.key("train_bwd_a").value(row.train_bwd_a);
        w.key("train_bwd_v").value(row.train_bwd_v);
        w.key("val_main").value(row.val_main);
        w.key("val_acc_k").value(row.val.acc_k);
        w.key("val_acc_2").value(row.val.acc_2);
        w.key("val_f1").value(row.val.f1);
        w.key("val_mae").value(row.val.mae);
        w.key("val_corr").value(row.val.corr);
        w.end_object();
    }
    w.end_array();
    w.key("test");
    w.begin_object();
    w.key("samples").value(rep.test_eval.samples);
    w.key("metrics");
    write_metrics_object(w, rep.test_eval);
    w.key("flags");
    w.begin_array();
    std::vector<std::string> flags;
    detail::collect_flags(rep.test_eval, flags);
    for (const std::string& f : flags) w.value(f);
    w.end_array();
    w.end_object();
    w.end_object();
    return w.str();
}

inline std::string write_epochs_csv(const TrainReport& rep) {
    std::string out =
        "epoch,train_total,train_main,train_fwd_a,train_fwd_v,train_bwd_a,train_bwd_v,"
        "val_main,val_acc_k,val_acc_2,val_f1,val_mae,val_corr\n";
    for (const EpochRow& row : rep.epochs) {
        out += std::to_string(row.epoch);
        for (double v : {row.train_total, row.train_main, row.train_fwd_a, row.train_fwd_v,
                         row.train_bwd_a, row.train_bwd_v, row.val_main, row.val.acc_k,
                         row.val.acc_2, row.val.f1, row.val.mae, row.val.corr})
            out += ',' + fmt_double(v);
        out += '\n';
    }
    return out;
}

inline std::string write_predictions_csv(const std::vector<double>& labels,
                                         const std::vector<double>& predictions) {
    if (labels.size() != predictions.size())
        throw ShapeError("write_predictions_csv: length mismatch");
    std::string out = "sample_id,y,prediction\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out += std::to_string(i) + ',' + fmt_double(labels[i]) + ',' +
               fmt_double(predictions[i]) + '\n';
    return out;
}

}  // namespace careflow
