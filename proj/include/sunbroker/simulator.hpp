#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sunbroker/broker.hpp"
#include "sunbroker/dataset_io.hpp"
#include "sunbroker/demand.hpp"
#include "sunbroker/localunit.hpp"
#include "sunbroker/scenario.hpp"

namespace sunbroker {

// One hour of simulation input: realized production plus what the broker
// could have known an hour earlier.
struct SimHour {
    UtcTime slot_start{};
    double production_kw = 0.0;
    double clearsky_kw = 0.0;
    double last_production_kw = 0.0;
    bool has_weather = false;
    WeatherObservation obs{};  // observed during the previous hour
    WeatherForecast fcst{};    // issued for this hour
};

// Contiguous synthetic weather/production series, one entry per hour. Uses
// the same weather process as synth_dataset but keeps night hours so the
// simulator sees a full timeline.
inline std::vector<SimHour> synth_hourly_series(std::uint64_t seed, UtcTime start,
                                                long long hours, const PlantConfig& plant) {
    if (hours < 1) throw DomainError("series needs at least 1 hour");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    detail::SynthWeatherState wx;
    wx.step(start - std::chrono::hours{1}, rng);

    auto production_of = [&](UtcTime when, const detail::SynthWeatherState& w) {
        const double cs = clearsky_poa(plant, when);
        if (cs <= 0.0) return 0.0;
        const double p =
            attenuated_production(cs, w.cloud, w.temperature) + gauss(rng) * 0.02 * plant.p_mpp;
        return std::clamp(p, 0.0, plant.p_mpp);
    };

    double last_prod = production_of(start - std::chrono::hours{1}, wx);

    std::vector<SimHour> series;
    series.reserve(std::size_t(hours));
    for (long long i = 0; i < hours; ++i) {
        const UtcTime slot = start + std::chrono::hours{i};
        detail::SynthWeatherState next = wx;
        next.step(slot, rng);

        SimHour hour;
        hour.slot_start = slot;
        hour.clearsky_kw = clearsky_poa(plant, slot);
        hour.production_kw = production_of(slot, next);
        hour.last_production_kw = last_prod;
        hour.has_weather = true;
        hour.obs = WeatherObservation{wx.cloud, wx.temperature, wx.wind,
                                      std::max(0.0, 10.0 *
                                                        clearsky_poa(plant,
                                                                     slot - std::chrono::hours{1}) /
                                                        plant.p_mpp * (1.0 - 0.7 * wx.cloud / 100.0)),
                                      weather_text_for_cloud(wx.cloud)};
        hour.fcst = WeatherForecast{std::clamp(next.cloud + 3.0 * gauss(rng), 0.0, 100.0),
                                    next.temperature + 0.5 * gauss(rng),
                                    std::abs(next.wind + 0.3 * gauss(rng)),
                                    std::max(0.0, next.precipitation + 0.05 * gauss(rng)),
                                    std::clamp(next.humidity + 2.0 * gauss(rng), 0.0, 100.0)};
        series.push_back(std::move(hour));

        wx = next;
        last_prod = series.back().production_kw;
    }
    return series;
}

// Ledger CSV schema (frozen): one row per slot.
struct LedgerRow {
    UtcTime slot_start{};
    double produced_kwh = 0.0;
    double compute_kwh = 0.0;
    double sold_kwh = 0.0;
    double bought_kwh = 0.0;
    double curtailed_kwh = 0.0;
    std::int64_t instances_offered = 0;
    std::int64_t instances_leased = 0;
    double revenue_eur = 0.0;
};

inline void write_ledger_csv(std::ostream& out, std::span<const LedgerRow> rows) {
    out << "slot_start,produced_kwh,compute_kwh,sold_kwh,bought_kwh,curtailed_kwh,"
           "instances_offered,instances_leased,revenue_eur\n";
    char buf[384];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%lld,%.17g\n",
                      format_iso8601(r.slot_start).c_str(), r.produced_kwh, r.compute_kwh,
                      r.sold_kwh, r.bought_kwh, r.curtailed_kwh,
                      (long long)r.instances_offered, (long long)r.instances_leased,
                      r.revenue_eur);
        out << buf;
    }
}

struct SimReport {
    double produced_kwh = 0.0;
    double sold_kwh = 0.0;
    double compute_kwh = 0.0;
    double bought_kwh = 0.0;
    double curtailed_kwh = 0.0;
    double compute_revenue_eur = 0.0;
    double grid_revenue_eur = 0.0;
    double grid_cost_eur = 0.0;
    double net_eur = 0.0;
    std::optional<double> measured_alpha;
    double baseline_revenue_eur = 0.0;
    double advantage_eur = 0.0;
    std::string ledger_reference = "ledger.csv";
    std::vector<LedgerRow> ledger;
};

inline nlohmann::ordered_json report_json(const SimReport& r) {
    nlohmann::ordered_json j;
    j["produced_kwh"] = r.produced_kwh;
    j["sold_kwh"] = r.sold_kwh;
    j["compute_kwh"] = r.compute_kwh;
    j["bought_kwh"] = r.bought_kwh;
    j["curtailed_kwh"] = r.curtailed_kwh;
    j["compute_revenue_eur"] = r.compute_revenue_eur;
    j["grid_revenue_eur"] = r.grid_revenue_eur;
    j["grid_cost_eur"] = r.grid_cost_eur;
    j["net_eur"] = r.net_eur;
    if (r.measured_alpha)
        j["measured_alpha"] = *r.measured_alpha;
    else
        j["measured_alpha"] = nullptr;
    j["baseline_revenue_eur"] = r.baseline_revenue_eur;
    j["advantage_eur"] = r.advantage_eur;
    j["ledger"] = r.ledger_reference;
    return j;
}

// Revenue of the do-nothing alternative: inject every produced kWh. Summed
// per slot so a sell-everything run reconciles against it bit-exactly.
inline double baseline_sell_all(std::span<const double> produced_kwh, const Tariff& tariff) {
    double sum = 0.0;
    for (double p : produced_kwh) sum += p * tariff.feed_in;
    return sum;
}

// Perfect-foresight forecaster over a simulation series: isolates the
// decision logic from forecast error.
inline Forecaster oracle_forecast_mode(const std::vector<SimHour>& series, UtcTime first_slot) {
    return [&series, first_slot](const LuRecord&, UtcTime slot) -> double {
        const auto idx = std::chrono::duration_cast<std::chrono::hours>(slot - first_slot).count();
        if (idx < 0 || std::size_t(idx) >= series.size())
            throw Error("forecast requested outside the trace");
        return series[std::size_t(idx)].production_kw;
    };
}

namespace detail {

inline std::vector<Record> records_from_series(std::span<const SimHour> hours) {
    std::vector<Record> records;
    for (const auto& h : hours)
        if (h.has_weather && h.clearsky_kw > 0.0)
            records.push_back({h.slot_start, h.obs, h.fcst, h.last_production_kw, h.clearsky_kw,
                               h.production_kw});
    return records;
}

struct SeriesBundle {
    std::vector<SimHour> train; // context before the horizon (may be empty)
    std::vector<SimHour> sim;   // exactly horizon hours
};

inline SeriesBundle build_series(const ScenarioConfig& cfg) {
    SeriesBundle bundle;
    const bool needs_training = !cfg.forecast.oracle && cfg.forecast.kind != ModelKind::naive;

    if (cfg.source == TraceSource::synthetic) {
        // The full walk (training context + horizon) comes from one seeded
        // process, so runs differing only in forecast kind share the series.
        const long long prefix = cfg.forecast.train_hours;
        auto all = synth_hourly_series(cfg.seed ^ 0x9e3779b97f4a7c15ull,
                                       cfg.start - std::chrono::hours{prefix},
                                       prefix + cfg.horizon_hours, cfg.plant);
        bundle.train.assign(all.begin(), all.begin() + prefix);
        bundle.sim.assign(all.begin() + prefix, all.end());
        return bundle;
    }

    if (cfg.source == TraceSource::trace) {
        std::ifstream in(cfg.trace_file);
        if (!in) throw Error("cannot open trace file '" + cfg.trace_file + "'");
        const auto samples = align_to_hours(read_trace_csv(in));
        if ((long long)samples.size() < cfg.horizon_hours)
            throw FormatError("trace has " + std::to_string(samples.size()) +
                              " hours, shorter than the " + std::to_string(cfg.horizon_hours) +
                              "-hour horizon");
        double last_prod = 0.0;
        for (long long i = 0; i < cfg.horizon_hours; ++i) {
            const auto& s = samples[std::size_t(i)];
            SimHour hour;
            hour.slot_start = s.timestamp;
            hour.production_kw = s.poa / 1000.0 * cfg.plant.p_mpp * cfg.plant.eta_sys();
            hour.clearsky_kw = clearsky_poa(cfg.plant, s.timestamp);
            hour.last_production_kw = last_prod;
            last_prod = hour.production_kw;
            bundle.sim.push_back(std::move(hour));
        }
        return bundle;
    }

    // records source
    std::ifstream in(cfg.records_file);
    if (!in) throw Error("cannot open records file '" + cfg.records_file + "'");
    const auto records = parse_records_csv(in);

    std::map<UtcTime, const Record*> by_slot;
    for (const auto& r : records) by_slot[truncate_to_hour(r.target_time)] = &r;

    const UtcTime first = truncate_to_hour(records.front().target_time);
    const UtcTime last = truncate_to_hour(records.back().target_time);
    const UtcTime sim_start = needs_training
                                  ? first + std::chrono::hours{cfg.forecast.train_hours}
                                  : first;

    if (sim_start + std::chrono::hours{cfg.horizon_hours - 1} > last)
        throw FormatError("records cover " +
                          std::to_string(
                              std::chrono::duration_cast<std::chrono::hours>(last - first).count() +
                              1) +
                          " hours, too short for training plus the horizon");

    auto hour_from = [&](UtcTime slot) {
        SimHour hour;
        hour.slot_start = slot;
        if (auto it = by_slot.find(slot); it != by_slot.end()) {
            const Record& r = *it->second;
            hour.production_kw = r.production;
            hour.clearsky_kw = r.clearsky;
            hour.last_production_kw = r.last_production;
            hour.has_weather = true;
            hour.obs = r.obs;
            hour.fcst = r.fcst;
        }
        return hour; // absent slot: night, production 0
    };

    for (UtcTime t = first; t < sim_start; t += std::chrono::hours{1})
        bundle.train.push_back(hour_from(t));
    for (long long i = 0; i < cfg.horizon_hours; ++i)
        bundle.sim.push_back(hour_from(sim_start + std::chrono::hours{i}));
    return bundle;
}

} // namespace detail

// Runs the full scenario: per hourly slot the broker forecasts and decides,
// the fleet is scaled over the bus, the pool grants leases against the
// demand process, and the local unit integrates the slot's energy. Fixed
// seeds give byte-identical reports.
inline SimReport run(const ScenarioConfig& cfg) {
    const auto bundle = detail::build_series(cfg);
    const auto& series = bundle.sim;
    const UtcTime first_slot = series.front().slot_start;

    // forecast setup
    Forecaster forecaster;
    FittedModel model;
    Climatology history;
    if (cfg.forecast.oracle) {
        forecaster = oracle_forecast_mode(series, first_slot);
    } else {
        if (cfg.forecast.kind != ModelKind::naive) {
            TrainingSet train{cfg.plant, detail::records_from_series(bundle.train)};
            history = climatology_from(train.records);
            model = fit(train, cfg.forecast.kind, cfg.forecast.hyper);
        } else {
            model = fit(TrainingSet{cfg.plant, {}}, ModelKind::naive, cfg.forecast.hyper);
        }
        forecaster = [&](const LuRecord&, UtcTime slot) -> double {
            const auto idx =
                std::chrono::duration_cast<std::chrono::hours>(slot - first_slot).count();
            const SimHour& hour = series.at(std::size_t(idx));
            if (hour.clearsky_kw <= 0.0) return 0.0;
            if (cfg.forecast.kind == ModelKind::naive) return hour.clearsky_kw;
            if (!hour.has_weather) return 0.0;
            const auto x = make_feature_vector(hour.clearsky_kw, hour.obs, hour.fcst,
                                               hour.last_production_kw,
                                               history.mean_for(hour.slot_start));
            return predict(model, x, cfg.plant.p_mpp);
        };
    }

    // actors on the bus
    Bus bus;
    Sequencer broker_seq, lu_seq, pool_seq;
    LocalUnit lu("lu-1", std::size_t(cfg.cluster_size), cfg.node_power);
    std::vector<LuRecord> registry = {
        {lu.id(), cfg.plant, cfg.cluster_size, cfg.baseline_kw, std::nullopt}};
    DemandProcess demand(cfg.demand_mean_utilization, cfg.demand_correlation, cfg.seed + 1);

    std::vector<PoolOffer> offers;
    std::vector<UsageReport> usages;
    std::int64_t requested_now = 0;
    std::int64_t granted_now = 0;
    std::int64_t offered_now = 0;

    bus.subscribe("lu/+/cmd", [&](const std::string&, const Message& m) {
        if (const auto* wake = std::get_if<WakeCommand>(&m.body))
            lu.wake(std::size_t(wake->node_count));
        else if (const auto* sleep = std::get_if<SleepCommand>(&m.body))
            lu.sleep(sleep->node_ids);
    });
    bus.subscribe("eb/offers", [&](const std::string&, const Message& m) {
        const auto& offer = std::get<PoolOffer>(m.body);
        offers.push_back(offer);
        offered_now = offer.count;
        granted_now = std::min(requested_now, offer.count);
        bus.publish("lu/" + offer.lu_id + "/lease",
                    Message{pool_seq.next(), offer.slot_start,
                            LeaseGrant{offer.lu_id, offer.instance_type, granted_now, 1.0,
                                       cfg.instance.v_i}});
    });
    bus.subscribe("lu/+/telemetry", [&](const std::string&, const Message& m) {
        registry[0].last_telemetry = std::get<TelemetryReport>(m.body);
    });

    // startup handshake so the broker has fresh telemetry for the first slot
    bus.publish("lu/" + lu.id() + "/telemetry",
                Message{lu_seq.next(), first_slot - std::chrono::hours{1},
                        TelemetryReport{lu.id(), first_slot - std::chrono::hours{1}, 0.0, 0.0,
                                        lu.node_states()}});

    SimReport report;
    report.ledger.reserve(series.size());

    for (const auto& hour : series) {
        // one demand draw per slot, offer or not, so coupled runs share draws
        requested_now = demand.step(cfg.cluster_size);
        granted_now = 0;
        offered_now = 0;

        slot_cycle(registry, forecaster, cfg.instance, cfg.tariff, cfg.policy, hour.slot_start,
                   bus, broker_seq);

        const double produced_kwh = hour.production_kw * cfg.policy.slot_hours;
        auto [account, telemetry] =
            lu.tick_slot(hour.slot_start, produced_kwh, std::size_t(granted_now));
        bus.publish("lu/" + lu.id() + "/telemetry",
                    Message{lu_seq.next(), hour.slot_start, telemetry});

        if (offered_now > 0) {
            const UsageReport usage{lu.id(), hour.slot_start,
                                    double(granted_now) * cfg.policy.slot_hours};
            usages.push_back(usage);
            bus.publish("pool/usage", Message{pool_seq.next(), hour.slot_start, usage});
        }

        const double slot_revenue = double(granted_now) * cfg.instance.v_i +
                                    account.sold_kwh * cfg.tariff.feed_in -
                                    account.bought_kwh * cfg.tariff.retail;

        report.ledger.push_back({hour.slot_start, account.produced_kwh, account.compute_kwh,
                                 account.sold_kwh, account.bought_kwh, account.curtailed_kwh,
                                 offered_now, granted_now, slot_revenue});

        report.produced_kwh += account.produced_kwh;
        report.compute_kwh += account.compute_kwh;
        report.sold_kwh += account.sold_kwh;
        report.bought_kwh += account.bought_kwh;
        report.curtailed_kwh += account.curtailed_kwh;
        report.compute_revenue_eur += double(granted_now) * cfg.instance.v_i;
        report.grid_revenue_eur += account.sold_kwh * cfg.tariff.feed_in;
        report.grid_cost_eur += account.bought_kwh * cfg.tariff.retail;
    }

    report.net_eur = report.compute_revenue_eur + report.grid_revenue_eur - report.grid_cost_eur;

    std::vector<double> produced;
    produced.reserve(report.ledger.size());
    for (const auto& row : report.ledger) produced.push_back(row.produced_kwh);
    report.baseline_revenue_eur = baseline_sell_all(produced, cfg.tariff);
    report.advantage_eur = report.net_eur - report.baseline_revenue_eur;

    const auto alphas = reconcile_alpha(offers, usages, cfg.policy.slot_hours);
    if (auto it = alphas.find(lu.id()); it != alphas.end()) report.measured_alpha = it->second.alpha;

    return report;
}

} // namespace sunbroker
