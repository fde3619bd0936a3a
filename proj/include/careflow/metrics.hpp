#pragma once
// Distribution-gap and task metrics used to score mappings.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "careflow/flowcore.hpp"
#include "careflow/matrix.hpp"

namespace careflow {

// Energy distance V-statistic between point clouds a [n x d] and b [m x d]:
//   2 E||A - B|| - E||A - A'|| - E||B - B'||
// with expectations over all ordered pairs (self pairs included).
inline double energy_distance(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeError("energy_distance: dim mismatch");
    if (a.rows == 0 || b.rows == 0) throw ShapeError("energy_distance: empty cloud");
    double ab = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) ab += euclidean_distance(a.row(i), b.row(j), a.cols);
    ab /= static_cast<double>(a.rows) * static_cast<double>(b.rows);

    double aa = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.rows; ++j) aa += euclidean_distance(a.row(i), a.row(j), a.cols);
    aa /= static_cast<double>(a.rows) * static_cast<double>(a.rows);

    double bb = 0.0;
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) bb += euclidean_distance(b.row(i), b.row(j), b.cols);
    bb /= static_cast<double>(b.rows) * static_cast<double>(b.rows);

    return 2.0 * ab - aa - bb;
}

inline std::vector<double> centroid(const Matrix& a) {
    if (a.rows == 0) throw ShapeError("centroid: empty cloud");
    std::vector<double> c(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) c[j] += a(i, j);
    for (double& x : c) x /= static_cast<double>(a.rows);
    return c;
}

inline double centroid_gap(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeError("centroid_gap: dim mismatch");
    const std::vector<double> ca = centroid(a), cb = centroid(b);
    return euclidean_distance(ca.data(), cb.data(), a.cols);
}

// Mean per-dimension squared reconstruction error: mean_i ||x_i - r_i||^2 / d.
inline double cycle_error(const Matrix& original, const Matrix& reconstructed) {
    if (original.rows != reconstructed.rows || original.cols != reconstructed.cols)
        throw ShapeError("cycle_error: shape mismatch");
    if (original.rows == 0 || original.cols == 0) throw ShapeError("cycle_error: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < original.rows; ++i)
        total += squared_distance(original.row(i), reconstructed.row(i), original.cols);
    return total / (static_cast<double>(original.rows) * static_cast<double>(original.cols));
}

struct TaskMetrics {
    double acc_k = 0.0;   // percent, K-bin accuracy (exact class match for classification)
    double acc_2 = 0.0;   // percent, binary split at the range midpoint
    double f1 = 0.0;      // percent, support-weighted F1 over the K bins
    double mae = 0.0;
    double corr = 0.0;    // Pearson r between prediction and target
    bool corr_degenerate = false;  // either side had zero variance
    int bins = 0;
};

namespace detail {

inline int bin_of(double y, double lo, double hi, int bins) {
    if (y <= lo) return 0;
    if (y >= hi) return bins - 1;
    int b = static_cast<int>((y - lo) / (hi - lo) * bins);
    return std::min(b, bins - 1);
}

// Support-weighted mean of per-class F1 scores; absent classes contribute 0
// with weight 0.
inline double weighted_f1(const std::vector<int>& truth, const std::vector<int>& pred,
                          int classes) {
    const std::size_t n = truth.size();
    std::vector<double> tp(static_cast<std::size_t>(classes), 0.0);
    std::vector<double> fp(static_cast<std::size_t>(classes), 0.0);
    std::vector<double> fn(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (truth[i] == pred[i]) {
            tp[static_cast<std::size_t>(truth[i])] += 1.0;
        } else {
            fp[static_cast<std::size_t>(pred[i])] += 1.0;
            fn[static_cast<std::size_t>(truth[i])] += 1.0;
        }
    }
    double weighted = 0.0;
    for (int c = 0; c < classes; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        const double support = tp[ci] + fn[ci];
        if (support == 0.0) continue;
        const double denom = 2.0 * tp[ci] + fp[ci] + fn[ci];
        const double f1 = denom > 0.0 ? 2.0 * tp[ci] / denom : 0.0;
        weighted += support * f1;
    }
    return weighted / static_cast<double>(n);
}

}  // namespace detail

// Scores predictions against targets. For regression both AccK and Acc2
// discretize with equal-width bins over label_range; classification treats
// values as class indices directly (range split still drives Acc2).
inline TaskMetrics task_metrics(const std::vector<double>& pred, const std::vector<double>& truth,
                                Task task, const std::array<double, 2>& label_range, int bins,
                                int classes) {
    if (pred.size() != truth.size()) throw ShapeError("task_metrics: length mismatch");
    if (pred.empty()) throw ShapeError("task_metrics: empty input");
    if (task == Task::Regression && bins < 2) throw ConfigError("task_metrics: bins must be >= 2");
    if (task == Task::Classification && classes < 2)
        throw ConfigError("task_metrics: classes must be >= 2");
    const std::size_t n = pred.size();
    const int k = task == Task::Regression ? bins : classes;

    TaskMetrics out;
    out.bins = k;

    std::vector<int> btruth(n), bpred(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (task == Task::Regression) {
            btruth[i] = detail::bin_of(truth[i], label_range[0], label_range[1], k);
            bpred[i] = detail::bin_of(pred[i], label_range[0], label_range[1], k);
        } else {
            btruth[i] = std::clamp(static_cast<int>(std::lround(truth[i])), 0, k - 1);
            bpred[i] = std::clamp(static_cast<int>(std::lround(pred[i])), 0, k - 1);
        }
    }

    double hits_k = 0.0, hits_2 = 0.0, abs_err = 0.0;
    const double mid = 0.5 * (label_range[0] + label_range[1]);
    for (std::size_t i = 0; i < n; ++i) {
        if (btruth[i] == bpred[i]) hits_k += 1.0;
        if ((truth[i] >= mid) == (pred[i] >= mid)) hits_2 += 1.0;
        abs_err += std::abs(pred[i] - truth[i]);
    }
    out.acc_k = 100.0 * hits_k / static_cast<double>(n);
    out.acc_2 = 100.0 * hits_2 / static_cast<double>(n);
    out.mae = abs_err / static_cast<double>(n);
    out.f1 = 100.0 * detail::weighted_f1(btruth, bpred, k);

    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += pred[i];
        mt += truth[i];
    }
    mp /= static_cast<double>(n);
    mt /= static_cast<double>(n);
    double spp = 0.0, stt = 0.0, spt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = pred[i] - mp, dt = truth[i] - mt;
        spp += dp * dp;
        stt += dt * dt;
        spt += dp * dt;
    }
    if (spp <= 0.0 || stt <= 0.0) {
        out.corr = 0.0;
        out.corr_degenerate = true;
    } else {
        out.corr = spt / std::sqrt(spp * stt);
    }
    return out;
}

}  // namespace careflow
