#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "careflow/metrics.hpp"
#include "careflow/pca.hpp"
#include "careflow/rng.hpp"

#ifdef CAREFLOW_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace careflow;

namespace {

Matrix random_cloud(std::size_t rows, std::size_t cols, std::uint64_t seed, double shift = 0.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal() + shift;
    return m;
}

// Independent re-derivation of the energy-distance V-statistic, looping in
// the opposite order and accumulating terms separately.
double energy_brute(const Matrix& a, const Matrix& b) {
    std::vector<double> cross, within_a, within_b;
    for (std::size_t j = 0; j < b.rows; ++j)
        for (std::size_t i = 0; i < a.rows; ++i)
            cross.push_back(euclidean_distance(a.row(i), b.row(j), a.cols));
    for (std::size_t j = 0; j < a.rows; ++j)
        for (std::size_t i = 0; i < a.rows; ++i)
            within_a.push_back(euclidean_distance(a.row(i), a.row(j), a.cols));
    for (std::size_t j = 0; j < b.rows; ++j)
        for (std::size_t i = 0; i < b.rows; ++i)
            within_b.push_back(euclidean_distance(b.row(i), b.row(j), b.cols));
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    return 2.0 * mean(cross) - mean(within_a) - mean(within_b);
}

}  // namespace

TEST(EnergyDistance, MatchesBruteForceOracle) {
    const Matrix a = random_cloud(17, 3, 50);
    const Matrix b = random_cloud(23, 3, 51, 0.7);
    EXPECT_NEAR(energy_distance(a, b), energy_brute(a, b), 1e-12);
    EXPECT_NEAR(energy_distance(a, b), energy_distance(b, a), 1e-12);
}

TEST(EnergyDistance, KnownValues) {
    Matrix a(1, 2), b(1, 2);
    a.set_row(0, {0.0, 0.0});
    b.set_row(0, {3.0, 4.0});
    EXPECT_DOUBLE_EQ(energy_distance(a, b), 10.0);  // 2*5 - 0 - 0

    const Matrix cloud = random_cloud(12, 4, 52);
    EXPECT_DOUBLE_EQ(energy_distance(cloud, cloud), 0.0);  // identical clouds: exactly zero

    const Matrix shifted = random_cloud(12, 4, 52, 2.0);
    EXPECT_GT(energy_distance(cloud, shifted), 0.0);

    Matrix wrong(3, 5);
    EXPECT_THROW(energy_distance(cloud, wrong), ShapeError);
    Matrix empty(0, 4);
    EXPECT_THROW(energy_distance(cloud, empty), ShapeError);
}

TEST(CentroidGap, HandValues) {
    Matrix a(2, 2), b(1, 2);
    a.set_row(0, {0.0, 0.0});
    a.set_row(1, {2.0, 2.0});
    b.set_row(0, {4.0, 5.0});
    EXPECT_DOUBLE_EQ(centroid_gap(a, b), 5.0);  // (1,1) to (4,5)
    Matrix wrong(1, 3);
    EXPECT_THROW(centroid_gap(a, wrong), ShapeError);
}

TEST(CycleError, HandValues) {
    Matrix orig(2, 2), rec(2, 2);
    orig.set_row(0, {0.0, 0.0});
    orig.set_row(1, {1.0, 1.0});
    rec.set_row(0, {1.0, 0.0});
    rec.set_row(1, {1.0, 3.0});
    // Squared distances 1 and 4, averaged over rows*cols = 4.
    EXPECT_DOUBLE_EQ(cycle_error(orig, rec), 1.25);
    EXPECT_DOUBLE_EQ(cycle_error(orig, orig), 0.0);
    Matrix wrong(3, 2);
    EXPECT_THROW(cycle_error(orig, wrong), ShapeError);
}

TEST(Binning, MatchesIndependentReimplementation) {
    const double lo = -1.5, hi = 1.5;
    const int bins = 7;
    auto oracle = [&](double y) {
        if (y <= lo) return 0;
        if (y >= hi) return bins - 1;
        const double frac = (y - lo) / (hi - lo);
        int b = static_cast<int>(std::floor(frac * bins));
        if (b > bins - 1) b = bins - 1;
        return b;
    };
    Rng rng(53);
    for (int i = 0; i < 1000; ++i) {
        const double y = rng.uniform(-3.0, 3.0);
        EXPECT_EQ(detail::bin_of(y, lo, hi, bins), oracle(y)) << "y=" << y;
    }
    EXPECT_EQ(detail::bin_of(lo, lo, hi, bins), 0);
    EXPECT_EQ(detail::bin_of(hi, lo, hi, bins), bins - 1);
    EXPECT_EQ(detail::bin_of(lo - 100.0, lo, hi, bins), 0);
    EXPECT_EQ(detail::bin_of(hi + 100.0, lo, hi, bins), bins - 1);
    EXPECT_EQ(detail::bin_of(std::nextafter(hi, lo), lo, hi, bins), bins - 1);
}

TEST(TaskMetrics, ClassificationHandCase) {
    // truth [0,0,1,1,2], pred [0,1,1,1,0]:
    //   class 0: tp=1 fp=1 fn=1 -> F1 0.5, support 2
    //   class 1: tp=2 fp=1 fn=0 -> F1 0.8, support 2
    //   class 2: tp=0 fp=0 fn=1 -> F1 0.0, support 1
    //   weighted F1 = (2*0.5 + 2*0.8 + 0)/5 = 52%
    const std::vector<double> truth = {0, 0, 1, 1, 2};
    const std::vector<double> pred = {0, 1, 1, 1, 0};
    const TaskMetrics m = task_metrics(pred, truth, Task::Classification, {-1.5, 1.5}, 7, 3);
    EXPECT_EQ(m.bins, 3);
    EXPECT_DOUBLE_EQ(m.acc_k, 60.0);
    EXPECT_DOUBLE_EQ(m.f1, 52.0);
    EXPECT_DOUBLE_EQ(m.mae, (0 + 1 + 0 + 0 + 2) / 5.0);
}

TEST(TaskMetrics, ClassificationRoundingAndClamp) {
    // lround to the nearest class, clamped into [0, classes-1].
    const std::vector<double> truth = {0, 1, 2, 2};
    const std::vector<double> pred = {-3.0, 1.4, 1.6, 9.0};
    const TaskMetrics m = task_metrics(pred, truth, Task::Classification, {-1.5, 1.5}, 7, 3);
    // pred bins: 0, 1, 2, 2 -> all four match truth.
    EXPECT_DOUBLE_EQ(m.acc_k, 100.0);
}

TEST(TaskMetrics, RegressionBinningAndMidpoint) {
    const std::array<double, 2> range{0.0, 10.0};
    // Bins of width 2.5 over [0,10]; midpoint 5 drives Acc2.
    const std::vector<double> truth = {1.0, 4.0, 6.0, 9.0};
    const std::vector<double> pred = {1.4, 8.0, 5.5, 0.5};
    const TaskMetrics m = task_metrics(pred, truth, Task::Regression, range, 4, 0);
    // Truth bins: 0,1,2,3. Pred bins: 0,3,2,0 -> AccK = 50%.
    EXPECT_DOUBLE_EQ(m.acc_k, 50.0);
    // Side-of-midpoint agreement: (F,F)=hit, (F,T)=miss, (T,T)=hit, (T,F)=miss.
    EXPECT_DOUBLE_EQ(m.acc_2, 50.0);
    EXPECT_DOUBLE_EQ(m.mae, (0.4 + 4.0 + 0.5 + 8.5) / 4.0);
    EXPECT_EQ(m.bins, 4);
}

TEST(TaskMetrics, CorrelationEndpointsAndDegeneracy) {
    const std::vector<double> truth = {2.0, 4.0, 6.0};
    const TaskMetrics perfect = task_metrics({1.0, 2.0, 3.0}, truth, Task::Regression,
                                             {-1.5, 7.5}, 3, 0);
    EXPECT_NEAR(perfect.corr, 1.0, 1e-12);
    EXPECT_FALSE(perfect.corr_degenerate);

    const TaskMetrics anti = task_metrics({3.0, 2.0, 1.0}, truth, Task::Regression, {-1.5, 7.5},
                                          3, 0);
    EXPECT_NEAR(anti.corr, -1.0, 1e-12);

    const TaskMetrics flat = task_metrics({5.0, 5.0, 5.0}, truth, Task::Regression, {-1.5, 7.5},
                                          3, 0);
    EXPECT_DOUBLE_EQ(flat.corr, 0.0);
    EXPECT_TRUE(flat.corr_degenerate);
}

TEST(TaskMetrics, Validation) {
    EXPECT_THROW(task_metrics({1.0}, {1.0, 2.0}, Task::Regression, {-1, 1}, 3, 0), ShapeError);
    EXPECT_THROW(task_metrics({}, {}, Task::Regression, {-1, 1}, 3, 0), ShapeError);
    EXPECT_THROW(task_metrics({1.0}, {1.0}, Task::Regression, {-1, 1}, 1, 0), ConfigError);
    EXPECT_THROW(task_metrics({1.0}, {1.0}, Task::Classification, {-1, 1}, 3, 1), ConfigError);
}

TEST(Covariance, HandValues) {
    Matrix x(3, 2);
    x.set_row(0, {1.0, 2.0});
    x.set_row(1, {3.0, 4.0});
    x.set_row(2, {5.0, 6.0});
    std::vector<double> mean;
    const Matrix cov = covariance(x, &mean);
    EXPECT_EQ(mean, (std::vector<double>{3.0, 4.0}));
    // Deviations (+-2, +-2): every covariance entry is 8/2 = 4 (n-1 divisor).
    for (double v : cov.data) EXPECT_DOUBLE_EQ(v, 4.0);

    Matrix one(1, 2);
    EXPECT_THROW(covariance(one), ShapeError);
}

namespace {

// Closed-form eigendecomposition of a symmetric 2x2 matrix.
void eig_sym_2x2(const Matrix& c, double* lambda1, double* lambda2, std::vector<double>* v1) {
    const double a = c(0, 0), b = c(0, 1), d = c(1, 1);
    const double tr = a + d;
    const double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * b);
    *lambda1 = 0.5 * (tr + disc);
    *lambda2 = 0.5 * (tr - disc);
    if (std::fabs(b) > 1e-14) {
        *v1 = {*lambda1 - d, b};
    } else {
        *v1 = (a >= d) ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
    }
    double norm = std::sqrt((*v1)[0] * (*v1)[0] + (*v1)[1] * (*v1)[1]);
    for (double& x : *v1) x /= norm;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST(Pca, TwoDimMatchesClosedForm) {
    Rng rng(54);
    Matrix x(60, 2);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double t = rng.normal();
        x(i, 0) = 2.0 * t + 0.3 * rng.normal();
        x(i, 1) = -1.0 * t + 0.3 * rng.normal() + 5.0;
    }
    const Pca2 p = pca_top2(x, 7);

    const Matrix cov = covariance(x);
    double l1, l2;
    std::vector<double> v1;
    eig_sym_2x2(cov, &l1, &l2, &v1);
    EXPECT_NEAR(p.eig1, l1, 1e-8);
    EXPECT_NEAR(p.eig2, l2, 1e-8);
    EXPECT_NEAR(std::fabs(dot(p.axis1, v1)), 1.0, 1e-8);

    // Unit, orthogonal, canonically signed.
    EXPECT_NEAR(dot(p.axis1, p.axis1), 1.0, 1e-12);
    EXPECT_NEAR(dot(p.axis2, p.axis2), 1.0, 1e-12);
    EXPECT_NEAR(dot(p.axis1, p.axis2), 0.0, 1e-8);
    EXPECT_GE(p.eig1, p.eig2);
    const std::size_t arg1 = std::fabs(p.axis1[0]) >= std::fabs(p.axis1[1]) ? 0 : 1;
    EXPECT_GT(p.axis1[arg1], 0.0);
}

TEST(Pca, EigenEquationResidualAndDeterminism) {
    // Spectrum engineered with clear gaps so 100 power iterations converge
    // far below the assertion band.
    Rng rng(55);
    const std::size_t d = 16;
    std::vector<double> u1(d), u2(d);
    for (std::size_t j = 0; j < d; ++j) {
        u1[j] = std::sin(0.7 * double(j + 1));
        u2[j] = std::cos(1.3 * double(j + 1));
    }
    Matrix x(80, d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double z1 = rng.normal(), z2 = rng.normal();
        for (std::size_t j = 0; j < d; ++j)
            x(i, j) = 3.0 * z1 * u1[j] + 1.2 * z2 * u2[j] + 0.05 * rng.normal();
    }

    const Pca2 p = pca_top2(x, 99);
    const Matrix cov = covariance(x);
    auto residual = [&](const std::vector<double>& v, double lambda) {
        double r = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < d; ++b) s += cov(a, b) * v[b];
            const double e = s - lambda * v[a];
            r += e * e;
        }
        return std::sqrt(r);
    };
    EXPECT_LT(residual(p.axis1, p.eig1), 1e-8);
    EXPECT_LT(residual(p.axis2, p.eig2), 1e-6);  // deflated axis: slightly looser
    EXPECT_NEAR(dot(p.axis1, p.axis2), 0.0, 1e-8);
    EXPECT_GT(p.eig1, p.eig2);
    EXPECT_GT(p.eig2, 0.0);

    const Pca2 q = pca_top2(x, 99);
    EXPECT_EQ(p.axis1, q.axis1);  // bit-identical rerun
    EXPECT_EQ(p.axis2, q.axis2);
    EXPECT_EQ(p.eig1, q.eig1);

#ifdef CAREFLOW_HAVE_EIGEN
    Eigen::MatrixXd c(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) c(long(a), long(b)) = cov(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending
    EXPECT_NEAR(p.eig1, evals(long(d) - 1), 1e-8);
    EXPECT_NEAR(p.eig2, evals(long(d) - 2), 1e-8);
    const Eigen::VectorXd top = es.eigenvectors().col(long(d) - 1);
    double align = 0.0;
    for (std::size_t j = 0; j < d; ++j) align += top(long(j)) * p.axis1[j];
    EXPECT_NEAR(std::fabs(align), 1.0, 1e-8);
#endif
}

TEST(Pca, ProjectionHandValues) {
    Matrix x(4, 2);
    x.set_row(0, {1.0, 0.0});
    x.set_row(1, {-1.0, 0.0});
    x.set_row(2, {3.0, 0.0});
    x.set_row(3, {-3.0, 0.0});
    const Pca2 p = pca_top2(x, 1);
    // All variance on the first coordinate: axis1 = (1, 0), mean = 0.
    EXPECT_NEAR(std::fabs(p.axis1[0]), 1.0, 1e-10);
    EXPECT_NEAR(p.axis1[1], 0.0, 1e-10);
    const Matrix proj = pca_project(p, x);
    ASSERT_EQ(proj.rows, 4u);
    ASSERT_EQ(proj.cols, 2u);
    EXPECT_NEAR(std::fabs(proj(0, 0)), 1.0, 1e-10);
    EXPECT_NEAR(std::fabs(proj(2, 0)), 3.0, 1e-10);

    Matrix wrong(2, 3);
    EXPECT_THROW(pca_project(p, wrong), ShapeError);
    Matrix thin(5, 1);
    EXPECT_THROW(pca_top2(thin, 1), ShapeError);
}
