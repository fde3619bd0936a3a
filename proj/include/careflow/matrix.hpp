#pragma once
// Dense row-major matrices of 64-bit floats. Desk-scale only: plain loops,
// no BLAS, value semantics everywhere.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace careflow {

// Thrown on dimension mismatches between operands.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation produces or encounters non-finite values.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on invalid configuration (bad dims, bad hyperparameters, bad files).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, data.size() == rows * cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill_value = 0.0)
        : rows(r), cols(c), data(r * c, fill_value) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    std::vector<double> row_vec(std::size_t i) const {
        return std::vector<double>(row(i), row(i) + cols);
    }

    void set_row(std::size_t i, const std::vector<double>& v) {
        if (v.size() != cols) throw ShapeError("Matrix::set_row: length mismatch");
        std::copy(v.begin(), v.end(), row(i));
    }
};

inline Matrix zeros_like(const Matrix& m) { return Matrix(m.rows, m.cols); }

// y += a * x
inline void axpy(Matrix& y, double a, const Matrix& x) {
    if (!y.same_shape(x)) throw ShapeError("axpy: shape mismatch");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

inline bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline void ensure_finite(const Matrix& m, const char* where) {
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        if (!std::isfinite(m.data[i])) {
            throw NumericError(std::string(where) + ": non-finite value at flat index " +
                               std::to_string(i));
        }
    }
}

// Horizontal concatenation of equally tall blocks.
inline Matrix hconcat(const std::vector<const Matrix*>& blocks) {
    if (blocks.empty()) throw ShapeError("hconcat: no blocks");
    std::size_t rows = blocks.front()->rows;
    std::size_t cols = 0;
    for (const Matrix* b : blocks) {
        if (b->rows != rows) throw ShapeError("hconcat: row count mismatch");
        cols += b->cols;
    }
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        std::size_t off = 0;
        for (const Matrix* b : blocks) {
            std::copy(b->row(i), b->row(i) + b->cols, out.row(i) + off);
            off += b->cols;
        }
    }
    return out;
}

// Extracts columns [col0, col0+width) into a new matrix.
inline Matrix slice_cols(const Matrix& m, std::size_t col0, std::size_t width) {
    if (col0 + width > m.cols) throw ShapeError("slice_cols: out of range");
    Matrix out(m.rows, width);
    for (std::size_t i = 0; i < m.rows; ++i)
        std::copy(m.row(i) + col0, m.row(i) + col0 + width, out.row(i));
    return out;
}

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(const double* a, const double* b, std::size_t n) {
    return std::sqrt(squared_distance(a, b, n));
}

// Solves A x = b for small square systems by Gauss-Jordan elimination with
// partial pivoting. Throws NumericError when A is singular to working
// precision.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    if (a.rows != a.cols || a.rows != b.size())
        throw ShapeError("solve_linear: need square system matching rhs");
    const std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        if (std::fabs(a(pivot, col)) < 1e-12)
            throw NumericError("solve_linear: singular matrix (rank deficiency)");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(b[pivot], b[col]);
        }
        double inv = 1.0 / a(col, col);
        for (std::size_t c = 0; c < n; ++c) a(col, c) *= inv;
        b[col] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    return b;
}

}  // namespace careflow
