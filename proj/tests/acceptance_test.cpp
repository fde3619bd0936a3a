// Acceptance gate for the whole engine. Each test prints exactly one
// "[Cn] PASS|FAIL — details" line; the numeric thresholds live in the
// constants below and nowhere else.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "careflow/ablate.hpp"
#include "careflow/config.hpp"
#include "careflow/dataio.hpp"
#include "careflow/gradsuite.hpp"
#include "careflow/pca.hpp"
#include "careflow/pipeline.hpp"

namespace fs = std::filesystem;
using namespace careflow;

namespace {

constexpr double kGradWallLimitSec = 30.0;    // C1: gradcheck command budget
constexpr double kReductionTol = 1e-12;       // C3: formula-reduction agreement
constexpr double kEnergyRatioLimit = 0.30;    // C4: post/pre energy distance
constexpr double kSeedWallLimitSec = 300.0;   // C4: one full training run
constexpr double kAccVariationLimit = 2.0;    // C6: accuracy spread over step counts
constexpr double kDisplacementFrac = 0.10;    // C6: 2-step vs 32-step endpoint drift
constexpr double kCycleFrac = 0.50;           // C7: full vs no_cyclic cycle error
constexpr double kOracleRatioLimit = 0.20;    // C8: transport error vs class separation
constexpr double kMetricOracleTol = 1e-12;    // C10: energy distance
constexpr double kPcaOracleTol = 1e-8;        // C10: PCA eigenpairs

std::string strf(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void report(const char* tag, bool ok, const std::string& details) {
    std::printf("%s %s — %s\n", tag, ok ? "PASS" : "FAIL", details.c_str());
    std::fflush(stdout);
    EXPECT_TRUE(ok) << tag << ": " << details;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd =
        env_prefix + "\"" + CAREFLOW_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

// The quantitative criteria share one 5-seed sweep over the default
// benchmark and default hyperparameters, plus one dedicated timed run.
struct Bench {
    Dataset data;
    RunConfig base;
    std::vector<AblationRun> runs;
    std::vector<AblationRow> rows;
    double one_seed_seconds = 0.0;
};

const Bench& bench() {
    static const Bench b = [] {
        Bench s;
        s.data = generate_dataset(make_dataset_spec(DatasetConfig{}));
        s.base.task = s.data.spec.task;
        const auto t0 = std::chrono::steady_clock::now();
        ModelBundle probe = make_bundle(s.base, s.data.spec);
        train(probe, s.data, s.base);
        s.one_seed_seconds = seconds_since(t0);
        s.runs = run_ablation(s.data, s.base);
        s.rows = summarize_ablation(s.runs);
        return s;
    }();
    return b;
}

std::size_t metric_index(const char* name) {
    const std::vector<std::string>& names = ablation_metric_names();
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return k;
    throw ConfigError(std::string("unknown ablation metric ") + name);
}

const AblationRow& row_for(const std::string& variant) {
    for (const AblationRow& row : bench().rows)
        if (row.variant == variant) return row;
    throw ConfigError("missing ablation row " + variant);
}

bool any_grad_nonzero(const MlpGrads& grads) {
    for (const LayerGrads& lg : grads) {
        for (double v : lg.weight.data)
            if (v != 0.0) return true;
        for (double v : lg.bias)
            if (v != 0.0) return true;
    }
    return false;
}

Matrix random_cloud(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

}  // namespace

TEST(Acceptance, C01_GradientFidelity) {
    const GradCheckReport rep = run_gradcheck(false);
    double worst = 0.0;
    for (const GradCheckItem& item : rep.items) worst = std::max(worst, item.max_rel_err);
    const auto t0 = std::chrono::steady_clock::now();
    const int exit_code = run_cli("gradcheck");
    const double wall = seconds_since(t0);
    const bool ok = rep.all_pass && rep.items.size() == 12 && exit_code == 0 &&
                    wall < kGradWallLimitSec;
    report("[C1]", ok,
           strf("%zu/%zu finite-difference checks pass (worst rel err %.2e, tol %.0e); "
                "gradcheck command exit %d in %.1fs (limit %.0fs)",
                rep.items.size(), rep.items.size(), worst, kGradCheckTol, exit_code, wall,
                kGradWallLimitSec));
}

TEST(Acceptance, C02_DetachContracts) {
    DatasetConfig dc;
    dc.train_samples = 16;
    dc.val_samples = 8;
    dc.test_samples = 8;
    const Dataset data = generate_dataset(make_dataset_spec(dc));
    RunConfig cfg;
    cfg.seed = 5;
    cfg.d = 4;
    cfg.encoder_hidden = 8;
    cfg.fusion_hidden = 8;
    cfg.beta = 2;
    cfg.task = data.spec.task;
    const ModelBundle bundle = make_bundle(cfg, data.spec);
    const Batch batch = full_batch(data.train);
    Rng rng(77);
    const LossPlan plan = make_loss_plan(bundle, batch, cfg, rng);

    // Main loss zeroed, forward loss alone: encoders must receive nothing.
    BundleGrads fwd_only = make_bundle_grads(bundle);
    total_loss(bundle, batch, cfg, plan, &fwd_only, {0.0, 1.0, 0.0});
    const bool encoders_silent = !any_grad_nonzero(fwd_only.encoders[0]) &&
                                 !any_grad_nonzero(fwd_only.encoders[1]) &&
                                 !any_grad_nonzero(fwd_only.encoders[2]) &&
                                 any_grad_nonzero(fwd_only.fwd_a2l);

    // Generic cyclic instance: the loss must push on the mapped points...
    Rng grng(11);
    const DriftModel bwd = make_drift_model(3, FlowDirection::Backward, grng);
    const Matrix x_src = random_cloud(4, 3, grng);
    const Matrix x_mapped = random_cloud(4, 3, grng);
    MlpGrads bwd_grads = zero_grads(bwd.net);
    const BackwardLossResult res =
        backward_loss_at(bwd, x_src, x_mapped, {0.2, 0.5, 0.8, 0.4}, &bwd_grads);
    bool mapped_pushed = false;
    for (double v : res.grad_x_mapped.data)
        if (v != 0.0) mapped_pushed = true;

    // ...while the return targets stay constants: with the pull-through from
    // mapped points severed, nothing reaches the source encoders.
    RunConfig detached = cfg;
    detached.detach_main_path = true;
    BundleGrads cyc = make_bundle_grads(bundle);
    total_loss(bundle, batch, detached, plan, &cyc, {0.0, 0.0, 1.0});
    const bool targets_silent = !any_grad_nonzero(cyc.encoders[0]) &&
                                !any_grad_nonzero(cyc.encoders[1]) &&
                                any_grad_nonzero(cyc.bwd_a2l);

    report("[C2]", encoders_silent && mapped_pushed && targets_silent,
           strf("forward loss leaves encoder grads exactly zero: %s; cyclic grad on mapped "
                "points nonzero: %s; cyclic grad on return targets exactly zero: %s",
                encoders_silent ? "yes" : "NO", mapped_pushed ? "yes" : "NO",
                targets_silent ? "yes" : "NO"));
}

TEST(Acceptance, C03_FormulaReductions) {
    // (a) Zero margins collapse the hinge to the plain flow-matching MSE.
    Rng rng(21);
    const DriftModel drift = make_drift_model(3, FlowDirection::Forward, rng);
    const Matrix xa = random_cloud(6, 3, rng);
    const Matrix xl = random_cloud(6, 3, rng);
    FlowConfig fc;
    fc.task = Task::Regression;
    fc.beta = 2;
    PairBatch pb =
        sample_pairs(xa, xl, {0.1, -0.4, 0.8, 0.2, -0.9, 0.5}, Modality::Audio,
                     Modality::Language, fc, rng);
    for (FlowPair& p : pb.pairs) p.eta = 0.0;
    const double hinge_val = forward_loss(drift, pb);
    double mse = 0.0;
    for (const FlowPair& p : pb.pairs) {
        const std::vector<double> point = interpolate(p.x_src, p.x_tgt, p.t);
        Matrix one(1, 3);
        one.set_row(0, point);
        const Matrix v = drift_eval(drift, one, p.t);
        for (std::size_t c = 0; c < 3; ++c) {
            const double r = v(0, c) - (p.x_tgt[c] - p.x_src[c]);
            mse += r * r;
        }
    }
    mse /= static_cast<double>(pb.pairs.size());
    const double hinge_err = std::fabs(hinge_val - mse);

    // (b) Two-step transport equals the hand-composed update.
    const Matrix x0 = random_cloud(5, 3, rng);
    Matrix hand = x0;
    axpy(hand, 0.5, drift_eval(drift, hand, 0.0));
    axpy(hand, 0.5, drift_eval(drift, hand, 0.5));
    const Matrix two = euler_map(drift, x0, 2);
    double euler_err = 0.0;
    for (std::size_t i = 0; i < hand.data.size(); ++i)
        euler_err = std::max(euler_err, std::fabs(hand.data[i] - two.data[i]));

    // (c) A constant field is integrated exactly for every step count.
    Rng crng(3);
    DriftModel constant = make_drift_model(2, FlowDirection::Forward, crng);
    for (Layer& layer : constant.net.layers) {
        for (double& w : layer.weight.data) w = 0.0;
        for (double& b : layer.bias) b = 0.0;
    }
    // 720720 divides evenly by every N in 1..16, so each step is integral.
    constant.net.layers.back().bias = {720720.0, -720720.0};
    Matrix ix(3, 2);
    ix.set_row(0, {3.0, -7.0});
    ix.set_row(1, {10.0, 2.0});
    ix.set_row(2, {0.0, 5.0});
    double const_err = 0.0;
    for (int n = 1; n <= 16; ++n) {
        const Matrix end = euler_map(constant, ix, n);
        for (std::size_t i = 0; i < end.rows; ++i) {
            const_err = std::max(const_err, std::fabs(end(i, 0) - (ix(i, 0) + 720720.0)));
            const_err = std::max(const_err, std::fabs(end(i, 1) - (ix(i, 1) - 720720.0)));
        }
    }

    const bool ok = hinge_err < kReductionTol && euler_err < kReductionTol && const_err == 0.0;
    report("[C3]", ok,
           strf("zero-margin hinge vs plain MSE |diff| %.1e; 2-step transport vs hand "
                "composition |diff| %.1e (tol %.0e); constant-field endpoints exact over "
                "N=1..16 (max err %.1g)",
                hinge_err, euler_err, kReductionTol, const_err));
}

TEST(Acceptance, C04_GapReduction) {
    const Bench& b = bench();
    double ratio_a = 0.0, ratio_v = 0.0;
    int n = 0;
    for (const AblationRun& run : b.runs) {
        if (run.variant != "full") continue;
        ratio_a += run.report.test_eval.map_a.post_energy / run.report.test_eval.map_a.pre_energy;
        ratio_v += run.report.test_eval.map_v.post_energy / run.report.test_eval.map_v.pre_energy;
        ++n;
    }
    ratio_a /= n;
    ratio_v /= n;
    const bool ok =
        n == 5 && ratio_a < kEnergyRatioLimit && b.one_seed_seconds < kSeedWallLimitSec;
    report("[C4]", ok,
           strf("post/pre energy distance over %d seeds: audio %.3f (limit %.2f), visual %.3f; "
                "one full seed trains in %.1fs (limit %.0fs)",
                n, ratio_a, kEnergyRatioLimit, ratio_v, b.one_seed_seconds, kSeedWallLimitSec));
}

TEST(Acceptance, C05_AblationOrdering) {
    // The 4-class accuracy is the discriminating downstream score; the
    // 2-way collapse saturates on this benchmark.
    const std::size_t acck = metric_index("acc_k");
    const std::vector<std::string>& variants = ablation_variants();
    std::vector<double> acc(variants.size());
    std::string listing;
    for (std::size_t k = 0; k < variants.size(); ++k) {
        acc[k] = row_for(variants[k]).mean[acck];
        listing += strf("%s%s %.1f", k ? ", " : "", variants[k].c_str(), acc[k]);
    }
    bool full_best = true;
    bool no_alignment_worst = true;
    for (std::size_t k = 1; k < variants.size(); ++k) {
        if (acc[0] < acc[k]) full_best = false;            // acc[0] is "full"
        if (k != 1 && acc[1] >= acc[k]) no_alignment_worst = false;  // acc[1] is "no_alignment"
    }
    if (acc[1] >= acc[0]) no_alignment_worst = false;
    report("[C5]", full_best && no_alignment_worst,
           strf("5-seed mean acc_k: %s — full >= every ablation: %s; no_alignment strictly "
                "worst: %s",
                listing.c_str(), full_best ? "yes" : "NO", no_alignment_worst ? "yes" : "NO"));
}

TEST(Acceptance, C06_EulerStepRobustness) {
    const Bench& b = bench();
    RunConfig cfg = b.base;
    cfg.epochs = 100;
    ModelBundle bundle = make_bundle(cfg, b.data.spec);
    train(bundle, b.data, cfg);

    double lo = 1e300, hi = -1e300;
    std::string accs;
    for (int n : {1, 2, 4, 8, 16}) {
        const double a = evaluate(bundle, b.data.test, cfg, b.data.spec, n).task.acc_k;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        accs += strf("%s%d:%.1f", accs.empty() ? "" : " ", n, a);
    }
    const double spread = hi - lo;

    const Batch test = full_batch(b.data.test);
    double drift_sum = 0.0, length_sum = 0.0;
    std::size_t rows = 0;
    for (std::size_t m = 0; m < 2; ++m) {  // audio and visual transports
        const Matrix enc = mlp_forward(bundle.encoders[m], test.raw[m]);
        const DriftModel& fwd = m == 0 ? bundle.fwd_a2l : bundle.fwd_v2l;
        const Matrix m2 = euler_map(fwd, enc, 2);
        const Matrix m32 = euler_map(fwd, enc, 32);
        for (std::size_t i = 0; i < enc.rows; ++i) {
            drift_sum += euclidean_distance(m2.row(i), m32.row(i), enc.cols);
            length_sum += euclidean_distance(m32.row(i), enc.row(i), enc.cols);
            ++rows;
        }
    }
    const double frac = (drift_sum / rows) / (length_sum / rows);

    const bool ok = spread <= kAccVariationLimit && frac <= kDisplacementFrac;
    report("[C6]", ok,
           strf("acc_k by step count {%s} spread %.2f (limit %.1f); 2-step vs 32-step endpoint "
                "displacement %.1f%% of transport length (limit %.0f%%)",
                accs.c_str(), spread, kAccVariationLimit, 100.0 * frac,
                100.0 * kDisplacementFrac));
}

TEST(Acceptance, C07_CycleConsistency) {
    const std::size_t ca = metric_index("cycle_a");
    const std::size_t cv = metric_index("cycle_v");
    const AblationRow& full = row_for("full");
    const AblationRow& nocyc = row_for("no_cyclic");
    const bool ok = full.mean[ca] <= kCycleFrac * nocyc.mean[ca] &&
                    full.mean[cv] <= kCycleFrac * nocyc.mean[cv];
    report("[C7]", ok,
           strf("5-seed mean cycle error, full vs no_cyclic: audio %.4f vs %.4f (%.1f%%), "
                "visual %.4f vs %.4f (%.1f%%); limit %.0f%%",
                full.mean[ca], nocyc.mean[ca], 100.0 * full.mean[ca] / nocyc.mean[ca],
                full.mean[cv], nocyc.mean[cv], 100.0 * full.mean[cv] / nocyc.mean[cv],
                100.0 * kCycleFrac));
}

TEST(Acceptance, C08_OracleProximity) {
    // Noise-free benchmark with explicit near-identity channel maps, so every
    // sample has an exact ground-truth transport target.
    DatasetSpec spec = default_benchmark_spec(2, Task::Classification, 1);
    spec.latent_std = 0.1;
    spec.centers = Matrix(4, 2);
    spec.centers.set_row(0, {0.5, 0.5});
    spec.centers.set_row(1, {0.5, -0.5});
    spec.centers.set_row(2, {-0.5, 0.5});
    spec.centers.set_row(3, {-0.5, -0.5});
    for (ModalityChannel& ch : spec.modalities) ch.noise = 0.0;
    spec.modalities[0].map = Matrix(2, 2);
    spec.modalities[0].map(0, 0) = 1.1;
    spec.modalities[0].map(1, 1) = 1.1;
    spec.modalities[0].shift = {0.5, -0.3};
    spec.modalities[2].map = Matrix(2, 2);
    spec.modalities[2].map(0, 0) = 0.9;
    spec.modalities[2].map(1, 1) = 0.9;
    spec.modalities[2].shift = {-0.4, 0.2};
    validate_spec(spec);
    const Dataset data = generate_dataset(spec);
    const Batch tr = full_batch(data.train);
    const Batch te = full_batch(data.test);

    Rng rng(1);
    DriftModel drift = make_drift_model(2, FlowDirection::Forward, rng);
    FlowConfig fc;
    fc.task = Task::Classification;
    AdamState adam = make_adam_state(drift.net);
    const int steps = 4000, batch_size = 32;
    for (int s = 0; s < steps; ++s) {
        Matrix ba(batch_size, 2), bl(batch_size, 2);
        std::vector<double> by(batch_size);
        for (int i = 0; i < batch_size; ++i) {
            const std::size_t r = rng.below(tr.raw[0].rows);
            ba.set_row(static_cast<std::size_t>(i), tr.raw[0].row_vec(r));
            bl.set_row(static_cast<std::size_t>(i), tr.raw[2].row_vec(r));
            by[static_cast<std::size_t>(i)] = tr.labels[r];
        }
        const PairBatch pb =
            sample_pairs(ba, bl, by, Modality::Audio, Modality::Language, fc, rng);
        MlpGrads grads = zero_grads(drift.net);
        forward_loss(drift, pb, &grads);
        adam_step(drift.net, grads, adam, 1e-3);
    }

    const Matrix mapped = euler_map(drift, te.raw[0], 8);
    double dist = 0.0;
    for (std::size_t i = 0; i < mapped.rows; ++i) {
        const std::vector<double> target =
            oracle_transport(spec, te.raw[0].row_vec(i), Modality::Audio, Modality::Language);
        dist += euclidean_distance(mapped.row(i), target.data(), 2);
    }
    dist /= static_cast<double>(mapped.rows);

    const int classes = spec.classes;
    Matrix centers(static_cast<std::size_t>(classes), 2);
    std::vector<int> counts(static_cast<std::size_t>(classes), 0);
    for (std::size_t i = 0; i < te.raw[2].rows; ++i) {
        const auto k = static_cast<std::size_t>(te.labels[i]);
        centers(k, 0) += te.raw[2](i, 0);
        centers(k, 1) += te.raw[2](i, 1);
        ++counts[k];
    }
    for (std::size_t k = 0; k < centers.rows; ++k) {
        centers(k, 0) /= counts[k];
        centers(k, 1) /= counts[k];
    }
    double sep = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < centers.rows; ++a)
        for (std::size_t c = a + 1; c < centers.rows; ++c) {
            sep += euclidean_distance(centers.row(a), centers.row(c), 2);
            ++pairs;
        }
    sep /= pairs;

    const double ratio = dist / sep;
    report("[C8]", ratio < kOracleRatioLimit,
           strf("mean transport-vs-oracle distance %.4f, class-center separation %.4f, "
                "ratio %.3f (limit %.2f)",
                dist, sep, ratio, kOracleRatioLimit));
}

TEST(Acceptance, C09_Determinism) {
    const fs::path dir = fs::path(::testing::TempDir()) / "careflow_acceptance_c9";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cfg_text = R"({
  "dataset": {"raw_dim": 2, "train_samples": 24, "val_samples": 12, "test_samples": 12},
  "run": {"d": 4, "encoder_hidden": 8, "fusion_hidden": 8, "epochs": 2, "batch": 8,
          "beta": 2, "ablate_seeds": 2}
})";
    const fs::path cfg_path = dir / "config.json";
    write_text_file(cfg_path.string(), cfg_text);
    const std::string cfg = "\"" + cfg_path.string() + "\"";
    auto at = [&dir](const char* rel) { return (dir / rel).string(); };
    auto q = [](const std::string& s) { return "\"" + s + "\""; };

    int failures = 0;
    int checked = 0;
    auto compare = [&](const std::string& a, const std::string& b, const char* file) {
        ++checked;
        if (read_text_file(a + "/" + file) != read_text_file(b + "/" + file)) ++failures;
    };

    bool commands_ok = true;
    for (const char* side : {"a", "b"}) {
        const std::string root = at(side);
        const std::string data = root + "/data";
        commands_ok =
            commands_ok &&
            run_cli("gen-data --config " + cfg + " --out " + q(data)) == 0 &&
            run_cli("train --config " + cfg + " --data " + q(data) + " --out " +
                    q(root + "/train")) == 0 &&
            run_cli("eval --config " + cfg + " --data " + q(data) + " --checkpoint " +
                    q(root + "/train/checkpoint.json") + " --out " + q(root + "/eval")) == 0 &&
            run_cli("export-plot --config " + cfg + " --data " + q(data) + " --checkpoint " +
                    q(root + "/train/checkpoint.json") + " --out " + q(root + "/plot")) == 0 &&
            run_cli("ablate --config " + cfg + " --data " + q(data) + " --out " +
                    q(root + "/ablate"),
                    side[0] == 'a' ? "CAREFLOW_THREADS=1 " : "CAREFLOW_THREADS=4 ") == 0 &&
            run_cli("gradcheck --out " + q(root + "/gradcheck")) == 0;
    }
    if (commands_ok) {
        for (const char* f : {"dataset.csv", "labels.csv", "spec.json", "config.json"})
            compare(at("a/data"), at("b/data"), f);
        for (const char* f : {"checkpoint.json", "report.json", "epochs.csv", "config.json"})
            compare(at("a/train"), at("b/train"), f);
        for (const char* f : {"metrics.json", "predictions.csv"})
            compare(at("a/eval"), at("b/eval"), f);
        for (const char* f : {"plot.csv", "plot.svg"}) compare(at("a/plot"), at("b/plot"), f);
        for (const char* f : {"ablation.csv", "ablation.json"})
            compare(at("a/ablate"), at("b/ablate"), f);
        compare(at("a/ablate/full/seed101"), at("b/ablate/full/seed101"), "report.json");
        compare(at("a/gradcheck"), at("b/gradcheck"), "gradcheck.json");
    }
    report("[C9]", commands_ok && failures == 0,
           strf("all six commands ran twice (%s); %d/%d artifact pairs byte-identical "
                "(ablation under different CAREFLOW_THREADS)",
                commands_ok ? "exit 0" : "NONZERO EXIT", checked - failures, checked));
}

TEST(Acceptance, C10_MetricOracles) {
    // Energy distance vs a brute-force re-derivation with independent loops.
    Rng rng(97);
    const Matrix x = random_cloud(40, 6, rng);
    const Matrix y = random_cloud(35, 6, rng);
    double cross = 0.0, within_x = 0.0, within_y = 0.0;
    for (std::size_t j = 0; j < y.rows; ++j)
        for (std::size_t i = 0; i < x.rows; ++i)
            cross += euclidean_distance(x.row(i), y.row(j), 6);
    for (std::size_t j = 0; j < x.rows; ++j)
        for (std::size_t i = 0; i < x.rows; ++i)
            within_x += euclidean_distance(x.row(i), x.row(j), 6);
    for (std::size_t j = 0; j < y.rows; ++j)
        for (std::size_t i = 0; i < y.rows; ++i)
            within_y += euclidean_distance(y.row(i), y.row(j), 6);
    const double nx = static_cast<double>(x.rows), ny = static_cast<double>(y.rows);
    const double brute = 2.0 * cross / (nx * ny) - within_x / (nx * nx) - within_y / (ny * ny);
    const double energy_err = std::fabs(energy_distance(x, y) - brute);

    // Label binning vs the direct floor formula.
    const double lo = -1.5, hi = 1.5;
    const int bins = 7;
    int bin_mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const double v = lo - 0.5 + 4.0 * rng.uniform();
        int expected = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        expected = std::max(0, std::min(bins - 1, expected));
        if (detail::bin_of(v, lo, hi, bins) != expected) ++bin_mismatches;
    }

    // PCA vs the closed-form eigendecomposition of a 2x2 covariance.
    Matrix pts(60, 2);
    for (std::size_t i = 0; i < pts.rows; ++i) {
        const double z1 = rng.normal() * 2.0, z2 = rng.normal() * 0.4;
        pts(i, 0) = 3.0 + z1 * 0.8 + z2 * 0.6;
        pts(i, 1) = -1.0 + z1 * 0.6 - z2 * 0.8;
    }
    const Pca2 pca = pca_top2(pts, 7);
    const Matrix cov = covariance(pts);
    const double tr = cov(0, 0) + cov(1, 1);
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
    double pca_err = std::max(std::fabs(pca.eig1 - l1), std::fabs(pca.eig2 - l2));
    for (int a = 0; a < 2; ++a) {
        const std::vector<double>& axis = a == 0 ? pca.axis1 : pca.axis2;
        const double lam = a == 0 ? pca.eig1 : pca.eig2;
        for (std::size_t r = 0; r < 2; ++r) {
            const double cv = cov(r, 0) * axis[0] + cov(r, 1) * axis[1];
            pca_err = std::max(pca_err, std::fabs(cv - lam * axis[r]));
        }
    }

    const bool ok =
        energy_err < kMetricOracleTol && bin_mismatches == 0 && pca_err < kPcaOracleTol;
    report("[C10]", ok,
           strf("energy distance vs brute force |diff| %.1e (tol %.0e); binning matches the "
                "floor formula on 1000/%d draws; PCA eigenpair residual %.1e (tol %.0e)",
                energy_err, kMetricOracleTol, 1000 - bin_mismatches, pca_err, kPcaOracleTol));
}
