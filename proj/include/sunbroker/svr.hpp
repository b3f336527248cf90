#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sunbroker/errors.hpp"

namespace sunbroker {

struct SvrParams {
    std::vector<std::vector<double>> support_vectors; // rows with nonzero duals
    std::vector<double> dual_coef;                    // theta_i = alpha_i - alpha*_i
    double intercept = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
    double c = 0.0;
    std::size_t iterations = 0;
};

inline double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double d = u[k] - v[k];
        s += d * d;
    }
    return std::exp(-gamma * s);
}

// Epsilon-insensitive SVR with an RBF kernel, trained by sequential minimal
// optimization over the doubled variable set (alpha, alpha*), maximal-
// violating-pair working-set selection. Stops when the KKT gap drops below
// tol; throws ConvergenceError if max_iter pair updates do not get there.
inline SvrParams svr_train(const std::vector<std::vector<double>>& x,
                           const std::vector<double>& y, double c_bound, double epsilon,
                           double gamma, double tol, std::size_t max_iter) {
    const std::size_t l = x.size();
    if (l < 2) throw DomainError("svr needs at least 2 training points");
    if (y.size() != l) throw ShapeError("svr: target length mismatch");
    if (!(c_bound > 0.0) || !(gamma > 0.0) || epsilon < 0.0)
        throw DomainError("svr: C and gamma must be > 0, epsilon >= 0");

    // Full kernel matrix; problem sizes here are a few thousand points.
    std::vector<double> kmat(l * l);
    for (std::size_t i = 0; i < l; ++i) {
        kmat[i * l + i] = 1.0;
        for (std::size_t j = i + 1; j < l; ++j)
            kmat[i * l + j] = kmat[j * l + i] = rbf_kernel(x[i], x[j], gamma);
    }
    auto kv = [&](std::size_t i, std::size_t j) { return kmat[i * l + j]; };

    // Variables 0..l-1 are alpha (sign +1), l..2l-1 are alpha* (sign -1);
    // both boxed to [0, C] with the balance constraint sum(sign * beta) = 0.
    const std::size_t m = 2 * l;
    auto sign = [l](std::size_t t) { return t < l ? 1.0 : -1.0; };
    auto base = [l](std::size_t t) { return t < l ? t : t - l; };

    std::vector<double> beta(m, 0.0), grad(m);
    for (std::size_t t = 0; t < m; ++t)
        grad[t] = t < l ? epsilon - y[t] : epsilon + y[t - l];

    std::size_t iter = 0;
    for (;; ++iter) {
        // Second-order working-set selection: i is the most violating index
        // in the up set, j maximizes the guaranteed objective decrease.
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = m;
        for (std::size_t t = 0; t < m; ++t) {
            const double yg = -sign(t) * grad[t];
            const bool in_up = sign(t) > 0 ? beta[t] < c_bound : beta[t] > 0.0;
            const bool in_low = sign(t) > 0 ? beta[t] > 0.0 : beta[t] < c_bound;
            if (in_up && yg > gmax) {
                gmax = yg;
                i = t;
            }
            if (in_low && yg < gmin) gmin = yg;
        }
        if (gmax - gmin <= tol) break;
        if (iter >= max_iter) throw ConvergenceError("svr did not converge", iter);

        std::size_t j = m;
        double best_gain = -1.0;
        const std::size_t bi_sel = base(i);
        for (std::size_t t = 0; t < m; ++t) {
            const bool in_low = sign(t) > 0 ? beta[t] > 0.0 : beta[t] < c_bound;
            if (!in_low) continue;
            const double yg = -sign(t) * grad[t];
            const double diff = gmax - yg;
            if (diff <= 0.0) continue;
            double quad = kv(bi_sel, bi_sel) + kv(base(t), base(t)) - 2.0 * kv(bi_sel, base(t));
            if (quad <= 0.0) quad = 1e-12;
            const double gain = diff * diff / quad;
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
            }
        }
        if (j == m) break; // no admissible partner left

        const std::size_t bi = base(i), bj = base(j);
        const double old_i = beta[i], old_j = beta[j];

        if (sign(i) != sign(j)) {
            double quad = kv(bi, bi) + kv(bj, bj) - 2.0 * kv(bi, bj);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if (diff > 0.0) {
                if (beta[j] < 0.0) {
                    beta[j] = 0.0;
                    beta[i] = diff;
                } else if (beta[i] > c_bound) {
                    beta[i] = c_bound;
                    beta[j] = c_bound - diff;
                }
            } else {
                if (beta[i] < 0.0) {
                    beta[i] = 0.0;
                    beta[j] = -diff;
                } else if (beta[j] > c_bound) {
                    beta[j] = c_bound;
                    beta[i] = c_bound + diff;
                }
            }
        } else {
            double quad = kv(bi, bi) + kv(bj, bj) - 2.0 * kv(bi, bj);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if (sum > c_bound) {
                if (beta[i] > c_bound) {
                    beta[i] = c_bound;
                    beta[j] = sum - c_bound;
                } else if (beta[j] > c_bound) {
                    beta[j] = c_bound;
                    beta[i] = sum - c_bound;
                }
            } else {
                if (beta[j] < 0.0) {
                    beta[j] = 0.0;
                    beta[i] = sum;
                } else if (beta[i] < 0.0) {
                    beta[i] = 0.0;
                    beta[j] = sum;
                }
            }
        }

        const double di = sign(i) * (beta[i] - old_i);
        const double dj = sign(j) * (beta[j] - old_j);
        for (std::size_t t = 0; t < m; ++t) {
            const double k_ti = kv(base(t), bi);
            const double k_tj = kv(base(t), bj);
            grad[t] += sign(t) * (k_ti * di + k_tj * dj);
        }
    }

    // Intercept from the KKT conditions: free points pin sign*grad exactly,
    // bound points only bracket it.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double yg = sign(t) * grad[t];
        if (beta[t] >= c_bound) {
            if (sign(t) < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (beta[t] <= 0.0) {
            if (sign(t) > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            sum_free += yg;
            ++nr_free;
        }
    }
    const double rho = nr_free > 0 ? sum_free / double(nr_free) : (ub + lb) / 2.0;
    const double b = -rho;

    SvrParams out;
    out.gamma = gamma;
    out.epsilon = epsilon;
    out.c = c_bound;
    out.intercept = b;
    out.iterations = iter;
    for (std::size_t i = 0; i < l; ++i) {
        const double theta = beta[i] - beta[i + l];
        if (theta != 0.0) {
            out.support_vectors.push_back(x[i]);
            out.dual_coef.push_back(theta);
        }
    }
    return out;
}

inline double svr_predict(const SvrParams& svr, std::span<const double> x) {
    double s = svr.intercept;
    for (std::size_t i = 0; i < svr.support_vectors.size(); ++i)
        s += svr.dual_coef[i] * rbf_kernel(svr.support_vectors[i], x, svr.gamma);
    return s;
}

} // namespace sunbroker
