#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "sunbroker/errors.hpp"

namespace sunbroker::detail {

// Dense row-major matrix, just big enough for the regression solvers.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// Minimum-norm-ish basic solution of min ||A x - b|| via Householder QR with
// column pivoting. Rank-deficient trailing columns get zero coefficients.
inline std::vector<double> solve_least_squares(Matrix A, std::vector<double> b) {
    const std::size_t n = A.rows, d = A.cols;
    if (b.size() != n) throw ShapeError("solve_least_squares: rhs length mismatch");
    if (n == 0 || d == 0) throw ShapeError("solve_least_squares: empty system");

    std::vector<std::size_t> perm(d);
    std::vector<double> col_norm2(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        perm[j] = j;
        for (std::size_t i = 0; i < n; ++i) col_norm2[j] += A(i, j) * A(i, j);
    }
    double max_norm = 0.0;
    for (double c : col_norm2) max_norm = std::max(max_norm, std::sqrt(c));
    const double tol = std::numeric_limits<double>::epsilon() * max_norm *
                       double(std::max(n, d));

    const std::size_t kmax = std::min(n, d);
    std::size_t rank = 0;

    for (std::size_t k = 0; k < kmax; ++k) {
        // pivot: remaining column with the largest residual norm
        std::size_t pivot = k;
        double best = -1.0;
        for (std::size_t j = k; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += A(i, j) * A(i, j);
            if (s > best) {
                best = s;
                pivot = j;
            }
        }
        if (pivot != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(A(i, k), A(i, pivot));
            std::swap(perm[k], perm[pivot]);
        }
        const double col_norm = std::sqrt(std::max(best, 0.0));
        if (col_norm <= tol) break;
        ++rank;

        // Householder reflection zeroing A(k+1.., k)
        double alpha = -std::copysign(col_norm, A(k, k));
        std::vector<double> v(n - k);
        v[0] = A(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = A(i, k);
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 <= 0.0) continue;

        for (std::size_t j = k; j < d; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i - k] * A(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) A(i, j) -= f * v[i - k];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * b[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) b[i] -= f * v[i - k];
        A(k, k) = alpha;
    }

    // back substitution over the rank-revealed leading block
    std::vector<double> y(d, 0.0);
    for (std::size_t ii = rank; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < rank; ++j) s -= A(ii, j) * y[j];
        y[ii] = s / A(ii, ii);
    }

    std::vector<double> x(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) x[perm[j]] = y[j];
    return x;
}

// Cholesky solve of a symmetric positive-definite system; nullopt when the
// matrix is not (numerically) positive definite.
inline std::optional<std::vector<double>> solve_spd(Matrix S, std::vector<double> rhs) {
    const std::size_t d = S.rows;
    if (S.cols != d || rhs.size() != d) throw ShapeError("solve_spd: dimension mismatch");

    for (std::size_t k = 0; k < d; ++k) {
        double diag = S(k, k);
        for (std::size_t j = 0; j < k; ++j) diag -= S(k, j) * S(k, j);
        if (!(diag > 0.0)) return std::nullopt;
        const double lkk = std::sqrt(diag);
        S(k, k) = lkk;
        for (std::size_t i = k + 1; i < d; ++i) {
            double s = S(i, k);
            for (std::size_t j = 0; j < k; ++j) s -= S(i, j) * S(k, j);
            S(i, k) = s / lkk;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < d; ++i) {
        double s = rhs[i];
        for (std::size_t j = 0; j < i; ++j) s -= S(i, j) * rhs[j];
        rhs[i] = s / S(i, i);
    }
    for (std::size_t ii = d; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < d; ++j) s -= S(j, ii) * rhs[j];
        rhs[ii] = s / S(ii, ii);
    }
    return rhs;
}

} // namespace sunbroker::detail
