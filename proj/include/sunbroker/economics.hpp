#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sunbroker/errors.hpp"
#include "sunbroker/pvgis.hpp"

namespace sunbroker {

// A leasable compute-instance class. eta_c is the number of instances that
// one kW of electrical power can operate; the per-instance draw is derived
// from it rather than stored, so the two can never disagree.
struct InstanceType {
    std::string name;
    int vcpu;
    double ram_gb;
    double eta_c; // instances per kW
    double v_i;   // leasing price, EUR per instance-hour

    InstanceType(std::string n, int cpus, double ram, double eta, double price)
        : name(std::move(n)), vcpu(cpus), ram_gb(ram), eta_c(eta), v_i(price) {
        if (vcpu < 1) throw DomainError("vcpu must be >= 1");
        if (!(ram_gb > 0.0)) throw DomainError("ram_gb must be > 0");
        if (!(eta_c > 0.0)) throw DomainError("eta_c must be > 0");
        if (v_i < 0.0) throw DomainError("v_i must be >= 0");
    }

    double p_avg_w() const { return 1000.0 / eta_c; }
};

struct Tariff {
    double feed_in; // EUR/kWh paid for energy injected into the grid
    double retail;  // EUR/kWh paid for energy drawn from the grid

    Tariff(double r_e, double r_g) : feed_in(r_e), retail(r_g) {
        if (feed_in < 0.0 || retail < 0.0) throw DomainError("tariff rates must be >= 0");
    }
};

// Gross reward per kWh routed into computation: instances operable per kWh,
// times the hourly price, times the fraction actually leased.
inline double compute_revenue_rate(double eta_c, double v_i, double alpha) {
    if (!(eta_c > 0.0)) throw DomainError("eta_c must be > 0");
    if (v_i < 0.0) throw DomainError("v_i must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha " + std::to_string(alpha) + " outside [0, 1]");
    return eta_c * v_i * alpha;
}

// Net gain of computing over selling the same kWh. Negative means selling
// wins; decision logic treats that as Sell.
inline double net_revenue(double r_c, double r_e) {
    if (r_c < 0.0) throw DomainError("r_c must be >= 0");
    return r_c - r_e;
}

// Yearly payback of routing the plant's whole production into computation.
inline double annual_payback(double r_n, double psh, double eta_sys, double p_mpp) {
    if (psh < 0.0) throw DomainError("psh must be >= 0");
    if (!(eta_sys > 0.0 && eta_sys <= 1.0)) throw DomainError("eta_sys must be in (0, 1]");
    if (!(p_mpp > 0.0)) throw DomainError("p_mpp must be > 0");
    return r_n * psh * eta_sys * p_mpp;
}

// Allocation fraction at which computing and selling break even. May exceed
// 1, meaning computing is never profitable at these prices.
inline double breakeven_alpha(double eta_c, double v_i, double r_e) {
    if (!(eta_c * v_i > 0.0)) throw DomainError("eta_c * v_i must be > 0");
    return r_e / (eta_c * v_i);
}

struct RevenueQuote {
    double p_avg_w;
    double v_i;
    double alpha;
    double r_c;
    double r_n;
};

inline std::vector<RevenueQuote> revenue_surface(std::span<const double> p_avg_grid,
                                                 std::span<const double> v_i_grid,
                                                 std::span<const double> alphas, double r_e) {
    if (p_avg_grid.empty() || v_i_grid.empty() || alphas.empty())
        throw DomainError("revenue_surface grids must be non-empty");
    std::vector<RevenueQuote> out;
    out.reserve(p_avg_grid.size() * v_i_grid.size() * alphas.size());
    for (double p_avg : p_avg_grid) {
        if (!(p_avg > 0.0)) throw DomainError("p_avg must be > 0");
        const double eta_c = 1000.0 / p_avg;
        for (double v_i : v_i_grid)
            for (double alpha : alphas) {
                const double r_c = compute_revenue_rate(eta_c, v_i, alpha);
                out.push_back({p_avg, v_i, alpha, r_c, net_revenue(r_c, r_e)});
            }
    }
    return out;
}

struct SiteYield {
    double psh;
    double eta_sys;
    double p_mpp;
};

struct PaybackRow {
    std::string instance;
    double p_avg_w;
    double v_i;
    double alpha;
    double r_c;
    double r_n;
    double a_eur_year;
};

// Full price -> revenue -> payback evaluation per (instance, power, alpha)
// combination. p_avg_overrides sweeps the per-instance draw independently of
// the catalog value; empty means use each instance's own draw.
inline std::vector<PaybackRow> payback_grid(std::span<const InstanceType> catalog,
                                            std::span<const double> alphas,
                                            std::span<const double> p_avg_overrides,
                                            const SiteYield& site, const Tariff& tariff) {
    if (catalog.empty() || alphas.empty()) throw DomainError("payback_grid inputs must be non-empty");
    std::vector<PaybackRow> rows;
    for (const auto& inst : catalog) {
        std::vector<double> p_avgs(p_avg_overrides.begin(), p_avg_overrides.end());
        if (p_avgs.empty()) p_avgs.push_back(inst.p_avg_w());
        for (double p_avg : p_avgs) {
            if (!(p_avg > 0.0)) throw DomainError("p_avg must be > 0");
            const double eta_c = 1000.0 / p_avg;
            for (double alpha : alphas) {
                const double r_c = compute_revenue_rate(eta_c, inst.v_i, alpha);
                const double r_n = net_revenue(r_c, tariff.feed_in);
                const double a = annual_payback(r_n, site.psh, site.eta_sys, site.p_mpp);
                rows.push_back({inst.name, p_avg, inst.v_i, alpha, r_c, r_n, a});
            }
        }
    }
    return rows;
}

// The built-in 2020 AWS T2 reference catalog.
inline const std::vector<InstanceType>& builtin_catalog() {
    static const std::vector<InstanceType> catalog = {
        {"t2.nano", 1, 0.5, 18.8, 0.0059},  {"t2.micro", 1, 1.0, 18.8, 0.0118},
        {"t2.small", 1, 2.0, 13.5, 0.0236}, {"t2.medium", 2, 4.0, 20.2, 0.0472},
        {"t2.large", 2, 8.0, 20.9, 0.0944}, {"t2.xlarge", 4, 16.0, 19.8, 0.1888},
        {"t2.2xlarge", 8, 32.0, 16.2, 0.3776},
    };
    return catalog;
}

inline const InstanceType& find_instance(std::span<const InstanceType> catalog,
                                         const std::string& name) {
    for (const auto& inst : catalog)
        if (inst.name == name) return inst;
    throw NotFoundError("unknown instance type '" + name + "'");
}

// Catalog override file: header `name,vcpu,ram_gb,eta_c,v_i`.
inline std::vector<InstanceType> parse_catalog_csv(std::istream& in) {
    std::vector<InstanceType> catalog;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (detail::strip(line) != "name,vcpu,ram_gb,eta_c,v_i")
                throw FormatError("expected header 'name,vcpu,ram_gb,eta_c,v_i'", line_no);
            continue;
        }
        const auto f = detail::split_csv_line(line);
        if (f.size() != 5) throw FormatError("expected 5 fields", line_no);
        try {
            catalog.emplace_back(detail::strip(f[0]),
                                 int(detail::parse_double(f[1], line_no, "vcpu")),
                                 detail::parse_double(f[2], line_no, "ram_gb"),
                                 detail::parse_double(f[3], line_no, "eta_c"),
                                 detail::parse_double(f[4], line_no, "v_i"));
        } catch (const DomainError& e) {
            throw FormatError(e.what(), line_no);
        }
    }
    if (catalog.empty()) throw Error("empty catalog file");
    return catalog;
}

// Grid output CSV shared by the revenue-surface and payback tables.
inline void write_grid_csv(std::ostream& out, std::span<const PaybackRow> rows) {
    out << "p_avg_w,v_i_eur_h,alpha,r_c,r_n,a_eur_year\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%g,%g,%g,%.6f,%.6f,%.4f\n", r.p_avg_w, r.v_i, r.alpha,
                      r.r_c, r.r_n, r.a_eur_year);
        out << buf;
    }
}

} // namespace sunbroker
