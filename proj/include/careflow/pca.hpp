#pragma once
// Top-2 principal directions via power iteration on the sample covariance:
// fixed 100 iterations from a seeded start, deflation for the second axis.
// Deterministic by construction; an eigensolver would be overkill for d<=32.

#include <cmath>
#include <cstdint>
#include <vector>

#include "careflow/matrix.hpp"
#include "careflow/rng.hpp"

namespace careflow {

inline Matrix covariance(const Matrix& x, std::vector<double>* mean_out = nullptr) {
    if (x.rows < 2) throw ShapeError("covariance: need at least two samples");
    std::vector<double> mean(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(x.rows);
    Matrix cov(x.cols, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t a = 0; a < x.cols; ++a) {
            const double da = x(i, a) - mean[a];
            for (std::size_t b = 0; b < x.cols; ++b) cov(a, b) += da * (x(i, b) - mean[b]);
        }
    for (double& c : cov.data) c /= static_cast<double>(x.rows - 1);
    if (mean_out) *mean_out = std::move(mean);
    return cov;
}

struct Pca2 {
    std::vector<double> mean;
    std::vector<double> axis1, axis2;  // unit length
    double eig1 = 0.0, eig2 = 0.0;
};

namespace detail {

inline constexpr int kPcaIterations = 100;

inline double normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return norm;
}

// Sign convention: the entry of largest magnitude is positive.
inline void canonical_sign(std::vector<double>& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
        for (double& x : v) x = -x;
}

inline std::vector<double> power_axis(const Matrix& cov, Rng& rng, double* eig) {
    std::vector<double> v(cov.rows);
    for (double& x : v) x = rng.normal();
    normalize(v);
    std::vector<double> next(cov.rows);
    for (int it = 0; it < kPcaIterations; ++it) {
        for (std::size_t a = 0; a < cov.rows; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < cov.cols; ++b) s += cov(a, b) * v[b];
            next[a] = s;
        }
        if (normalize(next) == 0.0) break;  // zero matrix: keep the seeded start
        v = next;
    }
    double lambda = 0.0;
    for (std::size_t a = 0; a < cov.rows; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < cov.cols; ++b) s += cov(a, b) * v[b];
        lambda += v[a] * s;
    }
    *eig = lambda;
    canonical_sign(v);
    return v;
}

}  // namespace detail

inline Pca2 pca_top2(const Matrix& x, std::uint64_t seed) {
    if (x.cols < 2) throw ShapeError("pca_top2: need at least two feature dimensions");
    Pca2 out;
    Matrix cov = covariance(x, &out.mean);
    Rng rng(mix_seed(seed, 0x706361ULL));
    out.axis1 = detail::power_axis(cov, rng, &out.eig1);
    for (std::size_t a = 0; a < cov.rows; ++a)
        for (std::size_t b = 0; b < cov.cols; ++b)
            cov(a, b) -= out.eig1 * out.axis1[a] * out.axis1[b];
    out.axis2 = detail::power_axis(cov, rng, &out.eig2);
    return out;
}

inline Matrix pca_project(const Pca2& pca, const Matrix& x) {
    if (x.cols != pca.mean.size()) throw ShapeError("pca_project: dimension mismatch");
    Matrix out(x.rows, 2);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double p1 = 0.0, p2 = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double c = x(i, j) - pca.mean[j];
            p1 += c * pca.axis1[j];
            p2 += c * pca.axis2[j];
        }
        out(i, 0) = p1;
        out(i, 1) = p2;
    }
    return out;
}

}  // namespace careflow
