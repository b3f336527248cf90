#pragma once

#include <istream>
#include <optional>
#include <string>

#include "sunbroker/broker.hpp"
#include "sunbroker/detail/toml.hpp"
#include "sunbroker/economics.hpp"
#include "sunbroker/localunit.hpp"
#include "sunbroker/regression.hpp"

namespace sunbroker {

enum class TraceSource { synthetic, trace, records };

struct ForecastConfig {
    bool oracle = true;
    ModelKind kind = ModelKind::naive; // used when oracle is false
    long long train_hours = 2160;      // 90 days of context for fitted kinds
    Hyperparameters hyper;
};

struct ScenarioConfig {
    PlantConfig plant;
    InstanceType instance;
    std::int64_t cluster_size;
    NodePowerModel node_power;
    Tariff tariff;
    DecisionPolicy policy;
    double baseline_kw;
    ForecastConfig forecast;
    double demand_mean_utilization;
    double demand_correlation;
    long long horizon_hours;
    std::uint64_t seed;
    UtcTime start;
    TraceSource source;
    std::string trace_file;   // when source == trace
    std::string records_file; // when source == records
};

namespace detail {

inline InstanceType instance_from(const TomlDoc& doc) {
    const bool by_name = doc.has("instances", "type");
    const bool custom = doc.has("instances", "eta_c") || doc.has("instances", "v_i");
    if (by_name && custom)
        throw ConfigError("instances.type", "give either a catalog type or eta_c/v_i, not both");
    if (by_name) {
        try {
            return find_instance(builtin_catalog(), doc.get_string("instances", "type"));
        } catch (const NotFoundError& e) {
            throw ConfigError("instances.type", e.what());
        }
    }
    if (!doc.has("instances", "eta_c") || !doc.has("instances", "v_i"))
        throw ConfigError("instances.eta_c", "custom instance needs both eta_c and v_i");
    try {
        return InstanceType{doc.get_string_or("instances", "name", "custom"), 1, 1.0,
                            doc.get_double("instances", "eta_c"),
                            doc.get_double("instances", "v_i")};
    } catch (const DomainError& e) {
        throw ConfigError("instances.eta_c", e.what());
    }
}

} // namespace detail

// Scenario file schema: TOML sections [plant] [instances] [tariff] [policy]
// [forecast] [demand] [sim]; see docs/formats.md for every key.
inline ScenarioConfig load_scenario(std::istream& in) {
    const detail::TomlDoc doc = detail::TomlDoc::parse(in);

    auto plant = [&]() -> PlantConfig {
        try {
            return PlantConfig{GeoLocation{doc.get_double("plant", "latitude"),
                                           doc.get_double("plant", "longitude")},
                               doc.get_double_or("plant", "tilt", 0.0),
                               doc.get_double_or("plant", "azimuth", 180.0),
                               doc.get_double("plant", "p_mpp_kw"),
                               doc.get_double_or("plant", "system_loss", 0.14)};
        } catch (const DomainError& e) {
            throw ConfigError("plant", e.what());
        }
    }();

    const InstanceType instance = detail::instance_from(doc);

    const auto cluster_size = doc.get_int("instances", "cluster_size");
    if (cluster_size < 0) throw ConfigError("instances.cluster_size", "must be >= 0");

    NodePowerModel node_power;
    node_power.p_load_w = instance.p_avg_w();
    node_power.p_idle_w = doc.get_double_or("instances", "p_idle_w", 10.0);
    node_power.boot_s = doc.get_double_or("instances", "boot_s", 120.0);
    try {
        node_power.validate();
    } catch (const DomainError& e) {
        throw ConfigError("instances.p_idle_w", e.what());
    }

    auto tariff = [&]() -> Tariff {
        try {
            return Tariff{doc.get_double_or("tariff", "feed_in_eur_kwh", 0.05),
                          doc.get_double_or("tariff", "retail_eur_kwh", 0.15)};
        } catch (const DomainError& e) {
            throw ConfigError("tariff.feed_in_eur_kwh", e.what());
        }
    }();

    DecisionPolicy policy{doc.get_double_or("policy", "expected_alpha", 1.0), 1.0};
    try {
        policy.validate();
    } catch (const DomainError& e) {
        throw ConfigError("policy.expected_alpha", e.what());
    }
    const double baseline_kw = doc.get_double_or("policy", "baseline_kw", 0.0);
    if (baseline_kw < 0.0) throw ConfigError("policy.baseline_kw", "must be >= 0");

    ForecastConfig forecast;
    const std::string kind = doc.get_string_or("forecast", "kind", "oracle");
    if (kind == "oracle") {
        forecast.oracle = true;
    } else {
        forecast.oracle = false;
        try {
            forecast.kind = model_kind_from(kind);
        } catch (const NotFoundError&) {
            throw ConfigError("forecast.kind",
                              "expected oracle|naive|ols|ridge|lasso|svr, got '" + kind + "'");
        }
    }
    forecast.train_hours = doc.get_int_or("forecast", "train_hours", 2160);
    if (forecast.train_hours < 0) throw ConfigError("forecast.train_hours", "must be >= 0");
    forecast.hyper.ridge_lambda =
        doc.get_double_or("forecast", "ridge_lambda", forecast.hyper.ridge_lambda);
    forecast.hyper.lasso_lambda =
        doc.get_double_or("forecast", "lasso_lambda", forecast.hyper.lasso_lambda);
    forecast.hyper.svr_c = doc.get_double_or("forecast", "svr_c", forecast.hyper.svr_c);
    forecast.hyper.svr_epsilon =
        doc.get_double_or("forecast", "svr_epsilon", forecast.hyper.svr_epsilon);
    forecast.hyper.svr_gamma =
        doc.get_double_or("forecast", "svr_gamma", forecast.hyper.svr_gamma);
    forecast.hyper.svr_max_iter = std::size_t(
        doc.get_int_or("forecast", "svr_max_iter", (long long)forecast.hyper.svr_max_iter));

    const double demand_u = doc.get_double_or("demand", "mean_utilization", 1.0);
    if (!(demand_u >= 0.0 && demand_u <= 1.0))
        throw ConfigError("demand.mean_utilization", "must be in [0, 1]");
    const double demand_rho = doc.get_double_or("demand", "correlation", 0.8);
    if (!(demand_rho >= 0.0 && demand_rho < 1.0))
        throw ConfigError("demand.correlation", "must be in [0, 1)");

    const auto horizon = doc.get_int("sim", "horizon_hours");
    if (horizon < 1) throw ConfigError("sim.horizon_hours", "must be >= 1");

    UtcTime start;
    try {
        start = truncate_to_hour(
            parse_iso8601(doc.get_string_or("sim", "start", "2021-01-01T00:00:00Z")));
    } catch (const FormatError& e) {
        throw ConfigError("sim.start", e.what());
    }

    const std::string source = doc.get_string_or("sim", "source", "synthetic");
    TraceSource src;
    std::string trace_file, records_file;
    if (source == "synthetic") {
        src = TraceSource::synthetic;
    } else if (source == "trace") {
        src = TraceSource::trace;
        trace_file = doc.get_string("sim", "trace_file");
        if (!forecast.oracle && forecast.kind != ModelKind::naive)
            throw ConfigError("forecast.kind",
                              "a bare production trace has no weather; use oracle or naive");
    } else if (source == "records") {
        src = TraceSource::records;
        records_file = doc.get_string("sim", "records_file");
    } else {
        throw ConfigError("sim.source", "expected synthetic|trace|records, got '" + source + "'");
    }

    return ScenarioConfig{plant,
                          instance,
                          cluster_size,
                          node_power,
                          tariff,
                          policy,
                          baseline_kw,
                          forecast,
                          demand_u,
                          demand_rho,
                          horizon,
                          std::uint64_t(doc.get_int_or("sim", "seed", 1)),
                          start,
                          src,
                          trace_file,
                          records_file};
}

} // namespace sunbroker
