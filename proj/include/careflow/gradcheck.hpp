#pragma once
// Central finite-difference gradient oracle. Perturbs one coordinate at a
// time through a pointer view, so it works over any parameter collection.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "careflow/matrix.hpp"

namespace careflow {

// (f(x+h) - f(x-h)) / 2h per coordinate. Coordinates are restored exactly
// after each probe (the original value is put back, not recomputed).
inline std::vector<double> finite_diff_grad(const std::function<double()>& f,
                                            const std::vector<double*>& params, double h) {
    std::vector<double> grad(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i];
        const double original = *p;
        *p = original + h;
        const double f_plus = f();
        *p = original - h;
        const double f_minus = f();
        *p = original;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw NumericError("finite_diff_grad: non-finite objective at coordinate " +
                               std::to_string(i));
        grad[i] = (f_plus - f_minus) / (2.0 * h);
    }
    return grad;
}

// Relative error with an absolute floor so exactly-zero gradients compare
// cleanly against finite-difference noise.
inline double grad_rel_err(double analytic, double numeric) {
    const double scale = std::max({1e-6, std::fabs(analytic), std::fabs(numeric)});
    return std::fabs(analytic - numeric) / scale;
}

struct GradCompareResult {
    double max_rel_err = 0.0;
    std::size_t worst_coordinate = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

inline GradCompareResult compare_gradients(const std::vector<const double*>& analytic,
                                           const std::vector<double>& numeric) {
    if (analytic.size() != numeric.size())
        throw ShapeError("compare_gradients: coordinate count mismatch");
    GradCompareResult result;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double err = grad_rel_err(*analytic[i], numeric[i]);
        if (err > result.max_rel_err) {
            result.max_rel_err = err;
            result.worst_coordinate = i;
            result.worst_analytic = *analytic[i];
            result.worst_numeric = numeric[i];
        }
    }
    return result;
}

}  // namespace careflow
