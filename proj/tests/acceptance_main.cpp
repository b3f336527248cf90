// Acceptance suite: end-to-end checks of the numeric contracts this library
// is built around. One line per criterion; exits nonzero on any failure.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sunbroker/economics.hpp"
#include "sunbroker/model_io.hpp"
#include "sunbroker/regression.hpp"
#include "sunbroker/scenario.hpp"
#include "sunbroker/simulator.hpp"
#include "sunbroker/solar.hpp"
#include "sunbroker/svr.hpp"

using namespace sunbroker;

namespace {

int failures = 0;
int criterion = 0;

void report(bool pass, const std::string& what) {
    ++criterion;
    std::printf("[%d] %s  %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// Independent least-squares oracle: raw normal equations with an explicit
// intercept column, Gaussian elimination with partial pivoting.
std::vector<double> normal_equations(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& y) {
    const std::size_t n = x.size(), d = x[0].size() + 1;
    std::vector<std::vector<double>> m(d, std::vector<double>(d + 1, 0.0));
    auto cell = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : x[i][j - 1]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) m[r][c] += cell(i, r) * cell(i, c);
            m[r][d] += cell(i, r) * y[i];
        }
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < d; ++r)
            if (std::abs(m[r][k]) > std::abs(m[piv][k])) piv = r;
        std::swap(m[k], m[piv]);
        for (std::size_t r = k + 1; r < d; ++r) {
            const double f = m[r][k] / m[k][k];
            for (std::size_t c = k; c <= d; ++c) m[r][c] -= f * m[k][c];
        }
    }
    std::vector<double> w(d);
    for (std::size_t k = d; k-- > 0;) {
        double s = m[k][d];
        for (std::size_t c = k + 1; c < d; ++c) s -= m[k][c] * w[c];
        w[k] = s / m[k][k];
    }
    return w;
}

struct LinearFit {
    Standardization std_info;
    std::vector<double> weights;
    double intercept;
    double predict(const std::vector<double>& row) const {
        double s = intercept;
        auto xs = std_info.apply_row(row);
        for (std::size_t j = 0; j < xs.size(); ++j) s += weights[j] * xs[j];
        return s;
    }
};

LinearFit fit_linear(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     ModelKind kind, double lambda) {
    const std::size_t n = x.size(), d = x[0].size();
    detail::Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = x[i][j];
    LinearFit out;
    out.std_info = Standardization::fit(m);
    auto xs = out.std_info.apply(m);
    double ymean = 0.0;
    for (double v : y) ymean += v;
    ymean /= double(n);
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - ymean;
    out.weights = kind == ModelKind::ols ? detail::fit_ols(xs, yc)
                                         : detail::fit_ridge(xs, yc, lambda);
    out.intercept = ymean;
    return out;
}

// --- criteria ---------------------------------------------------------------

void criterion_payback_chain() {
    const double r_c = compute_revenue_rate(20.0, 0.02, 1.0);
    const double r_n = net_revenue(r_c, 0.05);
    const double a = annual_payback(r_n, 1670.7, 0.7739, 1.0);
    const bool pass = std::abs(a - 452.5) <= 1.0 && std::abs(a - 452.0) <= 1.0;
    report(pass, fmt("revenue chain on the worked example: A = %.2f EUR/yr (452.5 +/- 1)", a));
}

void criterion_breakeven() {
    const double a50 = breakeven_alpha(20.0, 0.02, 0.05);
    const double a100 = breakeven_alpha(10.0, 0.02, 0.05);
    const bool pass = a50 == 0.125 && a100 == 0.25;
    report(pass, fmt("breakeven allocation anchors: %.6g (expect 0.125), %.6g (expect 0.25)",
                     a50, a100));
}

void criterion_site_yields() {
    const double e0 = annual_energy(1670.7, 1.0, 1.0 - 0.2261);
    const double e30 = annual_energy(1968.8, 1.0, 1.0 - 0.2160);
    bool pass = std::abs(e0 - 1293.0) <= 0.5 && std::abs(e30 - 1543.4) <= 0.5;
    std::string note = fmt("reference yearly yields: %.1f (1293.0 +/- 0.5), %.1f (1543.4 +/- 0.5)",
                           e0, e30);

    // re-derivation from the hourly source export, when the user supplied it
    const char* env = std::getenv("SUNBROKER_PVGIS_FILE");
    const std::string file =
        env ? env : std::string(SUNBROKER_SOURCE_DIR) + "/data/pvgis_hourly_41.53_2.23.csv";
    std::ifstream in(file);
    if (in) {
        const auto aligned = align_to_hours(parse_pvgis_hourly(in));
        const auto summary = psh_summary(aligned, Period::year);
        pass = pass && summary.mean >= 1670.7 * 0.95 && summary.mean <= 1670.7 * 1.05;
        note += fmt("; hourly export mean PSH %.1f (1670.7 +/- 5%%)", summary.mean);
    } else {
        note += "; hourly export not present, PSH re-derivation skipped";
    }
    report(pass, note);
}

void criterion_forecast_scores() {
    const PlantConfig plant{GeoLocation{41.4, 2.2}, 0.0, 180.0, 1.0, 0.14};
    const auto set = synth_dataset(7, 2000, plant);
    const ModelKind kinds[] = {ModelKind::naive, ModelKind::ols, ModelKind::svr};
    const auto rows = evaluate(set, 0.8, kinds);
    const double naive = rows[0].metrics.r2, ols = rows[1].metrics.r2, svr = rows[2].metrics.r2;
    const bool pass = ols >= 0.90 && svr >= 0.90 && naive <= ols - 0.15;
    report(pass, fmt("forecast ordering on the synthetic year: R2 naive %.3f, ols %.3f, svr %.3f "
                     "(ols,svr >= 0.90; naive <= ols - 0.15)",
                     naive, ols, svr));
}

void criterion_regression_oracles() {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> noise(0.0, 0.25);

    std::vector<std::vector<double>> x(50, std::vector<double>(5));
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        for (auto& v : x[i]) v = u(rng);
        y[i] = 1.3 * x[i][0] - 0.7 * x[i][1] + 0.2 * x[i][3] + 2.0 * x[i][4] + 0.9 + noise(rng);
    }

    const auto ols = fit_linear(x, y, ModelKind::ols, 0.0);
    const auto ridge0 = fit_linear(x, y, ModelKind::ridge, 0.0);
    const auto oracle = normal_equations(x, y);

    double max_oracle_diff = 0.0, max_ridge_diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double op = oracle[0];
        for (std::size_t j = 0; j < 5; ++j) op += oracle[j + 1] * x[i][j];
        max_oracle_diff = std::max(max_oracle_diff, std::abs(ols.predict(x[i]) - op));
        max_ridge_diff = std::max(max_ridge_diff, std::abs(ols.predict(x[i]) - ridge0.predict(x[i])));
    }

    // lasso saturation at lambda_max
    detail::Matrix m(50, 5);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 5; ++j) m(i, j) = x[i][j];
    auto std_info = Standardization::fit(m);
    auto xs = std_info.apply(m);
    double ymean = 0.0;
    for (double v : y) ymean += v;
    ymean /= 50.0;
    std::vector<double> yc(50);
    for (std::size_t i = 0; i < 50; ++i) yc[i] = y[i] - ymean;
    const double lmax = lasso_lambda_max(xs, yc);
    const auto lasso_w = detail::fit_lasso(xs, yc, lmax * 1.000001, 1e-10, 10000, std_info);
    bool lasso_zero = true;
    for (double w : lasso_w) lasso_zero = lasso_zero && w == 0.0;

    // svr box constraint and tube on non-support points
    std::vector<std::vector<double>> sx;
    std::vector<double> sy;
    for (int i = 0; i < 80; ++i) {
        const double t = -2.0 + 4.0 * i / 79.0;
        sx.push_back({t});
        sy.push_back(0.6 * t * t - 0.4 * t);
    }
    const double c_bound = 50.0, eps = 0.1, tol = 1e-3;
    const auto svr = svr_train(sx, sy, c_bound, eps, 1.0, tol, 200000);
    bool box_ok = true;
    for (double theta : svr.dual_coef) box_ok = box_ok && std::abs(theta) <= c_bound + 1e-9;
    bool tube_ok = true;
    std::size_t non_sv = 0;
    for (std::size_t i = 0; i < sx.size(); ++i) {
        bool is_sv = false;
        for (const auto& sv : svr.support_vectors) is_sv = is_sv || sv == sx[i];
        if (!is_sv) {
            ++non_sv;
            tube_ok = tube_ok && std::abs(svr_predict(svr, sx[i]) - sy[i]) <= eps + 2.0 * tol;
        }
    }

    const bool pass = max_oracle_diff <= 1e-8 && max_ridge_diff <= 1e-8 && lasso_zero && box_ok &&
                      tube_ok && non_sv > 0;
    report(pass, fmt("regression oracles: |ols-normal_eq| %.2e, |ridge(0)-ols| %.2e (<= 1e-8); "
                     "lasso zeroed at lambda_max %s; svr box %s, tube on %zu non-SVs %s",
                     max_oracle_diff, max_ridge_diff, lasso_zero ? "yes" : "NO",
                     box_ok ? "ok" : "VIOLATED", non_sv, tube_ok ? "ok" : "VIOLATED"));
}

ScenarioConfig bundled_scenario() {
    const std::string path =
        std::string(SUNBROKER_SOURCE_DIR) + "/scenarios/oracle_full_allocation.toml";
    std::ifstream in(path);
    if (!in) throw Error("missing bundled scenario " + path);
    return load_scenario(in);
}

void criterion_conservation_and_determinism() {
    const auto cfg = bundled_scenario();
    const auto a = run(cfg);
    const auto b = run(cfg);

    double worst = 0.0;
    for (const auto& row : a.ledger)
        worst = std::max(worst, std::abs(row.produced_kwh + row.bought_kwh - row.compute_kwh -
                                         row.sold_kwh - row.curtailed_kwh));

    std::ostringstream la, lb;
    write_ledger_csv(la, a.ledger);
    write_ledger_csv(lb, b.ledger);
    const bool deterministic =
        report_json(a).dump() == report_json(b).dump() && la.str() == lb.str();

    const bool pass = a.ledger.size() == 8760 && worst <= 1e-9 && deterministic;
    report(pass, fmt("8760-slot run: worst slot imbalance %.2e kWh (<= 1e-9), "
                     "repeat run byte-identical: %s",
                     worst, deterministic ? "yes" : "NO"));
}

void criterion_analytic_closure() {
    const auto cfg = bundled_scenario();
    const auto rep = run(cfg);

    const double r_n = net_revenue(
        compute_revenue_rate(cfg.instance.eta_c, cfg.instance.v_i, 1.0), cfg.tariff.feed_in);
    // realized energy already folds in the trace PSH, efficiency and P_MPP
    const double analytic = r_n * rep.produced_kwh;
    const double ratio = rep.advantage_eur / analytic;
    const bool alpha_ok = rep.measured_alpha && std::abs(*rep.measured_alpha - 1.0) <= 1e-12;
    const bool pass = ratio >= 0.99 && ratio <= 1.01 && alpha_ok && rep.bought_kwh == 0.0;
    report(pass, fmt("oracle closure: advantage %.0f EUR vs analytic %.0f EUR, ratio %.4f "
                     "(within [0.99, 1.01]), measured alpha %.4f, bought %.1f kWh",
                     rep.advantage_eur, analytic, ratio,
                     rep.measured_alpha ? *rep.measured_alpha : -1.0, rep.bought_kwh));
}

void criterion_psh_definition() {
    std::vector<IrradianceSample> day;
    const auto t0 = make_utc(2021, 6, 1, 0, 0);
    for (int i = 0; i < 24; ++i) day.push_back({t0 + std::chrono::hours{i}, 1000.0});
    const double psh = psh_total(day);
    report(psh == 24.0, fmt("24 hourly samples at 1000 W/m2 give exactly %.4f PSH", psh));
}

} // namespace

int main() {
    try {
        criterion_payback_chain();
        criterion_breakeven();
        criterion_site_yields();
        criterion_forecast_scores();
        criterion_regression_oracles();
        criterion_conservation_and_determinism();
        criterion_analytic_closure();
        criterion_psh_definition();
    } catch (const std::exception& e) {
        std::printf("[%d] FAIL  unhandled exception: %s\n", criterion + 1, e.what());
        ++failures;
    }
    std::printf("RESULT: %d/%d criteria passed\n", criterion - failures, criterion);
    return failures == 0 ? 0 : 1;
}
