#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sunbroker/errors.hpp"

namespace sunbroker {

// Pool-side demand for leased instances: an AR(1) latent mapped through the
// normal CDF to a uniform, then power-transformed so the per-slot utilization
// fraction has mean exactly u over [0, 1]. u = 1 saturates (every offer fully
// leased), u = 0 requests nothing; the transform is pointwise monotone in u,
// which makes coupled common-random-number comparisons well ordered.
class DemandProcess {
public:
    DemandProcess(double mean_utilization, double correlation, std::uint64_t seed)
        : u_(mean_utilization), rho_(correlation), rng_(seed) {
        if (!(u_ >= 0.0 && u_ <= 1.0)) throw DomainError("mean_utilization must be in [0, 1]");
        if (!(rho_ >= 0.0 && rho_ < 1.0)) throw DomainError("correlation must be in [0, 1)");
        std::normal_distribution<double> gauss(0.0, 1.0);
        latent_ = gauss(rng_); // stationary start
    }

    // Advances one slot and returns the requested instance count.
    std::int64_t step(std::int64_t cluster_size) {
        if (cluster_size < 0) throw DomainError("cluster_size must be >= 0");
        std::normal_distribution<double> gauss(0.0, 1.0);
        latent_ = rho_ * latent_ + std::sqrt(1.0 - rho_ * rho_) * gauss(rng_);
        const double q = utilization_fraction();
        return std::llround(q * double(cluster_size));
    }

    double last_fraction() const { return utilization_fraction(); }

private:
    double utilization_fraction() const {
        if (u_ >= 1.0) return 1.0;
        if (u_ <= 0.0) return 0.0;
        const double uniform = 0.5 * std::erfc(-latent_ / std::numbers::sqrt2);
        const double k = (1.0 - u_) / u_;
        return std::pow(uniform, k);
    }

    double u_;
    double rho_;
    double latent_ = 0.0;
    std::mt19937_64 rng_;
};

} // namespace sunbroker
