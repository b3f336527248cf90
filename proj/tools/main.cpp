// sunbroker: decide per hourly slot whether a PV plant's surplus earns more
// sold to the grid or powering leased compute instances, and simulate a year
// of that policy.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sunbroker/dataset_io.hpp"
#include "sunbroker/economics.hpp"
#include "sunbroker/model_io.hpp"
#include "sunbroker/pvgis.hpp"
#include "sunbroker/regression.hpp"
#include "sunbroker/scenario.hpp"
#include "sunbroker/simulator.hpp"
#include "sunbroker/solar.hpp"

namespace {

using namespace sunbroker;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    for (const auto& item : split_list(csv)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DomainError(std::string("bad ") + what + " value '" + item + "'");
        }
    }
    return out;
}

struct PlantFlags {
    double latitude = 41.4;
    double longitude = 2.2;
    double tilt = 0.0;
    double azimuth = 180.0;
    double p_mpp = 1.0;
    double loss = 0.14;

    PlantConfig make() const {
        return PlantConfig{GeoLocation{latitude, longitude}, tilt, azimuth, p_mpp, loss};
    }

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--lat", latitude, "plant latitude, degrees");
        cmd->add_option("--lon", longitude, "plant longitude, degrees");
        cmd->add_option("--tilt", tilt, "panel tilt, degrees");
        cmd->add_option("--azimuth", azimuth, "panel azimuth, degrees (180 = south)");
        cmd->add_option("--p-mpp", p_mpp, "nominal power, kW");
        cmd->add_option("--loss", loss, "system loss fraction");
    }
};

// ---- viability --------------------------------------------------------------

struct ViabilityOpts {
    std::string instance;
    std::string catalog_file;
    double eta_c = 0.0;
    double price = -1.0;
    double alpha = 1.0;
    double feed_in = 0.05;
    double psh = 1670.7;
    double eta_sys = 0.7739;
    double p_mpp = 1.0;
    bool grid = false;
    std::string alphas = "0.25,0.5,0.75,1.0";
    std::string p_avgs = "50,60,70,80,90,100";
    std::string out;
};

std::vector<InstanceType> load_catalog(const std::string& file) {
    if (file.empty()) return builtin_catalog();
    std::ifstream in(file);
    if (!in) throw Error("cannot open catalog file '" + file + "'");
    return parse_catalog_csv(in);
}

int run_viability(const ViabilityOpts& o) {
    const auto catalog = load_catalog(o.catalog_file);

    double eta_c = o.eta_c, price = o.price;
    std::string label = "custom";
    if (!o.instance.empty()) {
        const auto& inst = find_instance(catalog, o.instance);
        eta_c = inst.eta_c;
        price = inst.v_i;
        label = inst.name;
    }
    if (!(eta_c > 0.0) || price < 0.0)
        throw NotFoundError("give --instance NAME or both --eta-c and --price");

    if (o.grid) {
        std::vector<InstanceType> selected;
        if (o.instance.empty())
            selected = catalog;
        else
            selected.push_back(find_instance(catalog, o.instance));
        const auto alphas = parse_double_list(o.alphas, "alpha");
        const auto p_avgs = parse_double_list(o.p_avgs, "p-avg");
        const auto rows = payback_grid(selected, alphas, p_avgs,
                                       SiteYield{o.psh, o.eta_sys, o.p_mpp},
                                       Tariff{o.feed_in, 0.0});
        if (o.out.empty()) {
            write_grid_csv(std::cout, rows);
        } else {
            std::ofstream f(o.out);
            if (!f) throw Error("cannot write '" + o.out + "'");
            write_grid_csv(f, rows);
            std::cout << "wrote " << rows.size() << " rows to " << o.out << "\n";
        }
        return 0;
    }

    const double r_c = compute_revenue_rate(eta_c, price, o.alpha);
    const double r_n = net_revenue(r_c, o.feed_in);
    const double a = annual_payback(r_n, o.psh, o.eta_sys, o.p_mpp);
    const double brk = eta_c * price > 0.0 ? breakeven_alpha(eta_c, price, o.feed_in) : -1.0;

    std::printf("instance          %s\n", label.c_str());
    std::printf("eta_c             %.4g instances/kW (P=%.4g W)\n", eta_c, 1000.0 / eta_c);
    std::printf("v_i               %.6g EUR/h\n", price);
    std::printf("alpha             %.4g\n", o.alpha);
    std::printf("feed-in           %.6g EUR/kWh\n", o.feed_in);
    std::printf("site              psh=%.6g h, eta_sys=%.6g, p_mpp=%.6g kW\n", o.psh, o.eta_sys,
                o.p_mpp);
    std::printf("r_c               %.6g EUR/kWh\n", r_c);
    std::printf("r_n               %.6g EUR/kWh\n", r_n);
    std::printf("payback           %.2f EUR/year\n", a);
    if (brk >= 0.0)
        std::printf("breakeven_alpha   %.6g%s\n", brk, brk > 1.0 ? " (never profitable)" : "");
    return 0;
}

// ---- psh --------------------------------------------------------------------

int run_psh(const std::string& input, const std::string& period_name) {
    Period period;
    if (period_name == "day")
        period = Period::day;
    else if (period_name == "month")
        period = Period::month;
    else if (period_name == "year")
        period = Period::year;
    else
        throw NotFoundError("period must be day, month or year");

    std::ifstream in(input);
    if (!in) throw Error("cannot open '" + input + "'");

    std::string first_line;
    std::getline(in, first_line);
    in.seekg(0);

    std::vector<IrradianceSample> samples;
    if (first_line.rfind("timestamp,poa_wm2", 0) == 0)
        samples = read_trace_csv(in);
    else
        samples = align_to_hours(parse_pvgis_hourly(in));

    const auto groups = psh_by_period(samples, period);
    const auto summary = psh_summary(samples, period);

    std::printf("%s,psh_h\n", to_string(period));
    for (const auto& g : groups) std::printf("%s,%.4f\n", g.label.c_str(), g.psh);
    std::printf("\ntotal %.4f h over %zu %ss\n", summary.psh, groups.size(), to_string(period));
    std::printf("mean %.4f h  std %.4f h\n", summary.mean, summary.std);
    return 0;
}

// ---- forecast ---------------------------------------------------------------

struct ForecastOpts {
    std::string data;
    std::int64_t synthetic_seed = -1;
    std::size_t n = 2000;
    PlantFlags plant;
    std::string kinds = "svr";
    double split = 0.8;
    std::string out;
    std::string dump;
    Hyperparameters hyper;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--data", data, "records CSV (see docs/formats.md)");
        cmd->add_option("--synthetic", synthetic_seed, "generate a synthetic dataset from a seed");
        cmd->add_option("--n", n, "synthetic dataset size");
        cmd->add_option("--split", split, "chronological train fraction");
        cmd->add_option("--dump", dump, "also write the dataset to this CSV");
        cmd->add_option("--ridge-lambda", hyper.ridge_lambda, "ridge penalty");
        cmd->add_option("--lasso-lambda", hyper.lasso_lambda, "lasso penalty");
        cmd->add_option("--lasso-max-iter", hyper.lasso_max_iter, "lasso iteration cap");
        cmd->add_option("--svr-c", hyper.svr_c, "svr box constraint");
        cmd->add_option("--svr-epsilon", hyper.svr_epsilon, "svr tube half-width, kW");
        cmd->add_option("--svr-gamma", hyper.svr_gamma, "svr rbf gamma");
        cmd->add_option("--svr-max-iter", hyper.svr_max_iter, "svr iteration cap");
        plant.add_flags(cmd);
    }

    TrainingSet load() const {
        const PlantConfig plant_cfg = plant.make();
        TrainingSet set{plant_cfg, {}};
        if (!data.empty() && synthetic_seed >= 0)
            throw NotFoundError("give --data or --synthetic, not both");
        if (!data.empty()) {
            std::ifstream in(data);
            if (!in) throw Error("cannot open '" + data + "'");
            for (auto& r : parse_records_csv(in))
                if (r.clearsky > 0.0) set.records.push_back(std::move(r)); // night rows dropped
        } else if (synthetic_seed >= 0) {
            set = synth_dataset(std::uint64_t(synthetic_seed), n, plant_cfg);
        } else {
            throw NotFoundError("give --data FILE or --synthetic SEED");
        }
        if (!dump.empty()) {
            std::ofstream f(dump);
            if (!f) throw Error("cannot write '" + dump + "'");
            write_records_csv(f, set.records);
        }
        return set;
    }
};

int run_forecast_train(const ForecastOpts& o) {
    const auto kinds = split_list(o.kinds);
    if (kinds.size() != 1) throw NotFoundError("forecast-train takes exactly one --kind");
    const ModelKind kind = model_kind_from(kinds[0]);

    const TrainingSet set = o.load();
    if (!(o.split > 0.0 && o.split <= 1.0)) throw DomainError("split must be in (0, 1]");
    const std::size_t n_train = std::size_t(std::floor(double(set.records.size()) * o.split));
    if (n_train == 0) throw DomainError("empty training set after split");

    TrainingSet train{set.plant,
                      {set.records.begin(), set.records.begin() + std::ptrdiff_t(n_train)}};
    const FittedModel model = fit(train, kind, o.hyper);

    const std::string path = o.out.empty() ? std::string(to_string(kind)) + "_model.json" : o.out;
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << model_to_json(model).dump(2) << "\n";
    std::printf("trained %s on %zu records -> %s\n", to_string(kind), train.records.size(),
                path.c_str());
    if (model.degenerate_warning)
        std::printf("warning: zero-variance feature(s); their weights are pinned to 0\n");
    return 0;
}

int run_forecast_eval(const ForecastOpts& o) {
    std::vector<ModelKind> kinds;
    for (const auto& k : split_list(o.kinds)) kinds.push_back(model_kind_from(k));
    if (kinds.empty()) throw NotFoundError("give at least one kind via --kinds");

    const TrainingSet set = o.load();
    const auto rows = evaluate(set, o.split, kinds, o.hyper);

    std::printf("%-8s %10s %12s %12s %8s\n", "kind", "r2", "rmse_kw", "mae_kw", "n");
    for (const auto& row : rows)
        std::printf("%-8s %10.4f %12.5f %12.5f %8zu\n", to_string(row.kind), row.metrics.r2,
                    row.metrics.rmse, row.metrics.mae, row.metrics.n);
    return 0;
}

// ---- simulate ---------------------------------------------------------------

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
    const ScenarioConfig cfg = load_scenario(in);

    SimReport report = run(cfg);

    std::filesystem::create_directories(out_dir);
    const auto report_path = std::filesystem::path(out_dir) / "report.json";
    const auto ledger_path = std::filesystem::path(out_dir) / "ledger.csv";
    report.ledger_reference = "ledger.csv";

    {
        std::ofstream f(ledger_path);
        if (!f) throw Error("cannot write '" + ledger_path.string() + "'");
        write_ledger_csv(f, report.ledger);
    }
    {
        std::ofstream f(report_path);
        if (!f) throw Error("cannot write '" + report_path.string() + "'");
        f << report_json(report).dump(2) << "\n";
    }

    std::printf("produced   %12.2f kWh\n", report.produced_kwh);
    std::printf("compute    %12.2f kWh\n", report.compute_kwh);
    std::printf("sold       %12.2f kWh\n", report.sold_kwh);
    std::printf("bought     %12.2f kWh\n", report.bought_kwh);
    std::printf("net        %12.2f EUR\n", report.net_eur);
    std::printf("baseline   %12.2f EUR (sell everything)\n", report.baseline_revenue_eur);
    std::printf("advantage  %12.2f EUR\n", report.advantage_eur);
    if (report.measured_alpha)
        std::printf("alpha      %12.4f (measured)\n", *report.measured_alpha);
    else
        std::printf("alpha      %12s\n", "n/a");
    std::printf("report: %s  ledger: %s\n", report_path.string().c_str(),
                ledger_path.string().c_str());
    return 0;
}

// ---- catalog ----------------------------------------------------------------

int run_catalog(const std::string& file) {
    std::printf("%-12s %5s %7s %7s %9s %9s\n", "name", "vcpu", "ram_gb", "eta_c", "v_i", "p_avg_w");
    for (const auto& inst : load_catalog(file))
        std::printf("%-12s %5d %7.1f %7.1f %9.4f %9.2f\n", inst.name.c_str(), inst.vcpu,
                    inst.ram_gb, inst.eta_c, inst.v_i, inst.p_avg_w());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"solar-surplus compute brokering: viability, forecasting and simulation"};
    app.require_subcommand(1);

    ViabilityOpts viability;
    auto* cmd_viability = app.add_subcommand(
        "viability", "price -> revenue -> payback chain for an instance class");
    cmd_viability->add_option("--instance", viability.instance, "catalog instance name");
    cmd_viability->add_option("--catalog", viability.catalog_file, "catalog override CSV");
    cmd_viability->add_option("--eta-c", viability.eta_c, "instances per kW");
    cmd_viability->add_option("--price", viability.price, "leasing price, EUR/h");
    cmd_viability->add_option("--alpha", viability.alpha, "allocation fraction");
    cmd_viability->add_option("--feed-in,--fit-tariff", viability.feed_in,
                              "grid feed-in tariff, EUR/kWh");
    cmd_viability->add_option("--psh", viability.psh, "site peak-sun hours per year");
    cmd_viability->add_option("--eta-sys", viability.eta_sys, "system efficiency (0, 1]");
    cmd_viability->add_option("--p-mpp", viability.p_mpp, "nominal power, kW");
    cmd_viability->add_flag("--grid", viability.grid, "emit the payback grid CSV");
    cmd_viability->add_option("--alphas", viability.alphas, "grid alpha list");
    cmd_viability->add_option("--p-avgs", viability.p_avgs, "grid per-instance draw list, W");
    cmd_viability->add_option("--out", viability.out, "grid CSV output path (default stdout)");

    std::string psh_input, psh_period = "year";
    auto* cmd_psh = app.add_subcommand("psh", "peak-sun-hour aggregation of an irradiance file");
    cmd_psh->add_option("--input", psh_input, "PVGIS hourly export or trace CSV")->required();
    cmd_psh->add_option("--period", psh_period, "day | month | year");

    ForecastOpts train_opts;
    auto* cmd_train = app.add_subcommand("forecast-train", "fit a model and write a model file");
    cmd_train->add_option("--kind", train_opts.kinds, "naive|ols|ridge|lasso|svr");
    cmd_train->add_option("--out", train_opts.out, "model file path");
    train_opts.add_flags(cmd_train);

    ForecastOpts eval_opts;
    auto* cmd_eval = app.add_subcommand("forecast-eval", "score model kinds on a held-out tail");
    cmd_eval->add_option("--kinds,--kind", eval_opts.kinds, "comma-separated model kinds");
    eval_opts.add_flags(cmd_eval);

    std::string sim_config, sim_out = ".";
    auto* cmd_sim = app.add_subcommand("simulate", "run a scenario file");
    cmd_sim->add_option("--config", sim_config, "scenario TOML")->required();
    cmd_sim->add_option("--out", sim_out, "output directory");

    std::string catalog_file;
    auto* cmd_catalog = app.add_subcommand("catalog", "print the instance catalog");
    cmd_catalog->add_option("--file", catalog_file, "catalog override CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (cmd_viability->parsed()) return run_viability(viability);
        if (cmd_psh->parsed()) return run_psh(psh_input, psh_period);
        if (cmd_train->parsed()) return run_forecast_train(train_opts);
        if (cmd_eval->parsed()) return run_forecast_eval(eval_opts);
        if (cmd_sim->parsed()) return run_simulate(sim_config, sim_out);
        if (cmd_catalog->parsed()) return run_catalog(catalog_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 5;
    } catch (const ConvergenceError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const NotFoundError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const DomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
