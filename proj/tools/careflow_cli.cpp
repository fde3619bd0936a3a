// careflow: data generation, training, evaluation, ablation sweeps,
// gradient audits, and plot export for the cyclic flow alignment engine.
// Exit codes: 0 success, 1 usage/IO, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "careflow/ablate.hpp"
#include "careflow/artifacts.hpp"
#include "careflow/checkpoint.hpp"
#include "careflow/config.hpp"
#include "careflow/dataio.hpp"
#include "careflow/gradsuite.hpp"
#include "careflow/pca.hpp"
#include "careflow/svg.hpp"

namespace {

namespace fs = std::filesystem;
using namespace careflow;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    std::string checkpoint_path;
    std::string split = "test";
    std::string ablate_flag;
    std::int64_t seed = -1;
    double alpha_f = -1.0;
    double alpha_b = -1.0;
    int beta = -1;
    int euler_steps = 0;
    bool inject_fault = false;
};

AppConfig load_config(const CommonOpts& opts) {
    AppConfig cfg;
    if (!opts.config_path.empty()) cfg = parse_app_config(read_text_file(opts.config_path));
    if (opts.seed >= 0) {
        cfg.run.seed = static_cast<std::uint64_t>(opts.seed);
        cfg.dataset.seed = static_cast<std::uint64_t>(opts.seed);
    }
    if (!opts.ablate_flag.empty() && opts.ablate_flag != "none")
        cfg.run = variant_config(cfg.run, opts.ablate_flag);
    if (opts.alpha_f >= 0.0) cfg.run.alpha_f = opts.alpha_f;
    if (opts.alpha_b >= 0.0) cfg.run.alpha_b = opts.alpha_b;
    if (opts.beta >= 0) cfg.run.beta = opts.beta;
    if (opts.euler_steps > 0) cfg.run.euler_steps = opts.euler_steps;
    cfg.run.task = cfg.dataset.task;
    validate_run_config(cfg.run);
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("an output directory is required (--out)");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown split '" + name + "' (expected train, val, or test)");
}

int cmd_gen_data(const CommonOpts& opts) {
    const AppConfig cfg = load_config(opts);
    ensure_out_dir(opts.out_dir);
    const DatasetSpec spec = make_dataset_spec(cfg.dataset);
    const Dataset data = generate_dataset(spec);
    save_dataset_dir(opts.out_dir, data);
    write_text_file(opts.out_dir + "/config.json", emit_app_config(cfg));
    std::printf("gen-data: %s -> train=%zu val=%zu test=%zu (rows=%zu)\n", spec.name.c_str(),
                data.train.size(), data.val.size(), data.test.size(),
                3 * (data.train.size() + data.val.size() + data.test.size()));
    return 0;
}

int cmd_train(const CommonOpts& opts) {
    const AppConfig cfg = load_config(opts);
    if (opts.data_dir.empty()) throw ConfigError("train needs a dataset directory (--data)");
    const Dataset data = load_dataset_dir(opts.data_dir);
    if (data.spec.task != cfg.dataset.task)
        throw ConfigError("dataset task does not match config task");
    ensure_out_dir(opts.out_dir);

    RunConfig run = cfg.run;
    run.task = data.spec.task;
    ModelBundle bundle = make_bundle(run, data.spec);
    const TrainReport report = train(bundle, data, run);

    AppConfig echo = cfg;
    echo.run = run;
    write_text_file(opts.out_dir + "/checkpoint.json", save_checkpoint(bundle));
    write_text_file(opts.out_dir + "/report.json", write_train_report_json(report, echo));
    write_text_file(opts.out_dir + "/epochs.csv", write_epochs_csv(report));
    write_text_file(opts.out_dir + "/config.json", emit_app_config(echo));

    const EvalReport& ev = report.test_eval;
    std::printf(
        "train: best_epoch=%d best_val_main=%.6g test_main=%.6g acc_k=%.2f acc_2=%.2f "
        "mae=%.4f (%.1fs)\n",
        report.best_epoch, report.best_val_main, ev.main, ev.task.acc_k, ev.task.acc_2,
        ev.task.mae, report.wall_seconds);
    return 0;
}

int cmd_eval(const CommonOpts& opts) {
    const AppConfig cfg = load_config(opts);
    if (opts.checkpoint_path.empty()) throw ConfigError("eval needs a checkpoint (--checkpoint)");
    if (opts.data_dir.empty()) throw ConfigError("eval needs a dataset directory (--data)");
    const ModelBundle bundle = load_checkpoint(read_text_file(opts.checkpoint_path));
    const Dataset data = load_dataset_dir(opts.data_dir);
    if (bundle.task != data.spec.task)
        throw ConfigError("checkpoint task does not match dataset task");

    RunConfig run = cfg.run;
    run.task = data.spec.task;
    const std::vector<Sample>& samples = data.split(parse_split(opts.split));
    const EvalReport rep = evaluate(bundle, samples, run, data.spec);
    const std::vector<double> preds = predict(bundle, samples, run);
    std::vector<double> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;

    ensure_out_dir(opts.out_dir);
    write_text_file(opts.out_dir + "/metrics.json", write_metrics_json(rep));
    write_text_file(opts.out_dir + "/predictions.csv", write_predictions_csv(labels, preds));
    std::printf("eval[%s]: main=%.6g acc_k=%.2f acc_2=%.2f f1=%.2f mae=%.4f corr=%.4f\n",
                opts.split.c_str(), rep.main, rep.task.acc_k, rep.task.acc_2, rep.task.f1,
                rep.task.mae, rep.task.corr);
    if (rep.has_alignment)
        std::printf("eval[%s]: energy a->l %.4f -> %.4f, v->l %.4f -> %.4f\n",
                    opts.split.c_str(), rep.map_a.pre_energy, rep.map_a.post_energy,
                    rep.map_v.pre_energy, rep.map_v.post_energy);
    return 0;
}

int cmd_ablate(const CommonOpts& opts) {
    const AppConfig cfg = load_config(opts);
    if (opts.data_dir.empty()) throw ConfigError("ablate needs a dataset directory (--data)");
    const Dataset data = load_dataset_dir(opts.data_dir);
    if (data.spec.task != cfg.dataset.task)
        throw ConfigError("dataset task does not match config task");
    ensure_out_dir(opts.out_dir);

    RunConfig base = cfg.run;
    base.task = data.spec.task;
    const std::vector<AblationRun> runs = run_ablation(data, base);

    for (const AblationRun& run : runs) {
        const std::string dir =
            opts.out_dir + "/" + run.variant + "/seed" + std::to_string(run.seed);
        ensure_out_dir(dir);
        AppConfig echo = cfg;
        echo.run = variant_config(base, run.variant);
        echo.run.seed = run.seed;
        write_text_file(dir + "/report.json", write_train_report_json(run.report, echo));
    }
    const std::vector<AblationRow> rows = summarize_ablation(runs);
    write_text_file(opts.out_dir + "/ablation.csv", write_ablation_csv(rows));
    write_text_file(opts.out_dir + "/ablation.json", write_ablation_json(rows));

    const std::vector<std::string>& names = ablation_metric_names();
    std::size_t acck = 0, acc2 = 0;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == "acc_k") acck = k;
        if (names[k] == "acc_2") acc2 = k;
    }
    for (const AblationRow& row : rows)
        std::printf("ablate: %-15s seeds=%d acc_k=%.2f±%.2f acc_2=%.2f±%.2f\n",
                    row.variant.c_str(), row.seeds, row.mean[acck], row.sd[acck],
                    row.mean[acc2], row.sd[acc2]);
    return 0;
}

int cmd_gradcheck(const CommonOpts& opts) {
    const GradCheckReport report = run_gradcheck(opts.inject_fault);
    for (const GradCheckItem& item : report.items)
        std::printf("gradcheck: %-36s params=%-5zu max_rel_err=%.3e worst@%zu %s\n",
                    item.name.c_str(), item.parameters, item.max_rel_err, item.worst_coordinate,
                    item.pass ? "PASS" : "FAIL");
    std::printf("gradcheck: %s (%zu checks, tol %.1e)\n", report.all_pass ? "PASS" : "FAIL",
                report.items.size(), kGradCheckTol);
    if (!opts.out_dir.empty()) {
        ensure_out_dir(opts.out_dir);
        write_text_file(opts.out_dir + "/gradcheck.json", write_gradcheck_report(report));
    }
    return report.all_pass ? 0 : 2;
}

int cmd_export_plot(const CommonOpts& opts) {
    const AppConfig cfg = load_config(opts);
    if (opts.checkpoint_path.empty())
        throw ConfigError("export-plot needs a checkpoint (--checkpoint)");
    if (opts.data_dir.empty()) throw ConfigError("export-plot needs a dataset directory (--data)");
    const ModelBundle bundle = load_checkpoint(read_text_file(opts.checkpoint_path));
    const Dataset data = load_dataset_dir(opts.data_dir);
    if (bundle.task != data.spec.task)
        throw ConfigError("checkpoint task does not match dataset task");

    RunConfig run = cfg.run;
    run.task = data.spec.task;
    const std::vector<Sample>& samples = data.split(parse_split(opts.split));
    const Batch batch = full_batch(samples);
    const ForwardResult fr = forward_pass(bundle, batch, run);

    struct Cloud {
        const char* name;
        const char* color;
        const Matrix* points;
    };
    const std::vector<Cloud> clouds = {{"x_a", "#d62728", &fr.encoded[0]},
                                       {"x_v", "#1f77b4", &fr.encoded[1]},
                                       {"x_l", "#2ca02c", &fr.encoded[2]},
                                       {"x_a2l", "#ff9896", &fr.mapped_a},
                                       {"x_v2l", "#aec7e8", &fr.mapped_v}};

    // Native coordinates for d=2, otherwise one shared top-2 projection
    // fitted on the union of all five clouds.
    const std::size_t d = static_cast<std::size_t>(bundle.d);
    std::vector<Matrix> coords;
    if (d == 2) {
        for (const Cloud& c : clouds) coords.push_back(*c.points);
    } else {
        std::size_t total = 0;
        for (const Cloud& c : clouds) total += c.points->rows;
        Matrix pooled(total, d);
        std::size_t at = 0;
        for (const Cloud& c : clouds)
            for (std::size_t i = 0; i < c.points->rows; ++i) pooled.set_row(at++, c.points->row_vec(i));
        const Pca2 pca = pca_top2(pooled, run.seed);
        for (const Cloud& c : clouds) coords.push_back(pca_project(pca, *c.points));
    }

    ensure_out_dir(opts.out_dir);
    std::string csv = "series,sample_id,px,py\n";
    for (std::size_t s = 0; s < clouds.size(); ++s)
        for (std::size_t i = 0; i < coords[s].rows; ++i)
            csv += std::string(clouds[s].name) + ',' + std::to_string(i) + ',' +
                   fmt_double(coords[s](i, 0)) + ',' + fmt_double(coords[s](i, 1)) + '\n';
    write_text_file(opts.out_dir + "/plot.csv", csv);

    std::vector<ScatterSeries> series;
    for (std::size_t s = 0; s < clouds.size(); ++s)
        series.push_back({clouds[s].name, clouds[s].color, coords[s]});
    write_text_file(opts.out_dir + "/plot.svg",
                    render_scatter_svg(series, "modality features (" + opts.split + ")"));

    const double pre_a = energy_distance(fr.encoded[0], fr.encoded[2]);
    const double post_a = energy_distance(fr.mapped_a, fr.encoded[2]);
    const double pre_v = energy_distance(fr.encoded[1], fr.encoded[2]);
    const double post_v = energy_distance(fr.mapped_v, fr.encoded[2]);
    std::printf("export-plot[%s]: energy a->l %.4f -> %.4f, v->l %.4f -> %.4f\n",
                opts.split.c_str(), pre_a, post_a, pre_v, post_v);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyclic flow alignment engine"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto add_common = [&opts](CLI::App* sub, bool with_overrides) {
        sub->add_option("--config", opts.config_path, "JSON config file");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "seed override");
        if (with_overrides) {
            sub->add_option("--ablate", opts.ablate_flag,
                            "ablation flag (no_alignment, no_cyclic, no_adaptive, "
                            "no_one_to_many, none)");
            sub->add_option("--alpha-f", opts.alpha_f, "forward-loss weight override");
            sub->add_option("--alpha-b", opts.alpha_b, "backward-loss weight override");
            sub->add_option("--beta", opts.beta, "cross-sample pair ratio override");
            sub->add_option("--euler-steps", opts.euler_steps, "transport step count override");
        }
    };

    CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
    add_common(gen, false);

    CLI::App* tr = app.add_subcommand("train", "train a model");
    add_common(tr, true);
    tr->add_option("--data", opts.data_dir, "dataset directory (from gen-data)");

    CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(ev, true);
    ev->add_option("--data", opts.data_dir, "dataset directory");
    ev->add_option("--checkpoint", opts.checkpoint_path, "checkpoint file");
    ev->add_option("--split", opts.split, "split to score (train|val|test)");

    CLI::App* ab = app.add_subcommand("ablate", "run the ablation sweep");
    add_common(ab, true);
    ab->add_option("--data", opts.data_dir, "dataset directory");

    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    add_common(gc, false);
    gc->add_flag("--inject-fault", opts.inject_fault,
                 "corrupt one analytic coordinate (audit self-test)");

    CLI::App* ex = app.add_subcommand("export-plot", "export 2-D feature scatter data");
    add_common(ex, true);
    ex->add_option("--data", opts.data_dir, "dataset directory");
    ex->add_option("--checkpoint", opts.checkpoint_path, "checkpoint file");
    ex->add_option("--split", opts.split, "split to plot (train|val|test)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(opts);
        if (tr->parsed()) return cmd_train(opts);
        if (ev->parsed()) return cmd_eval(opts);
        if (ab->parsed()) return cmd_ablate(opts);
        if (gc->parsed()) return cmd_gradcheck(opts);
        if (ex->parsed()) return cmd_export_plot(opts);
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
