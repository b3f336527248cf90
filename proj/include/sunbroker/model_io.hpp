#pragma once

#include <json.hpp>

#include "sunbroker/regression.hpp"

namespace sunbroker {

// Self-describing model file: everything needed to reproduce predictions,
// including the feature vocabulary the vector layout depends on.
inline nlohmann::ordered_json model_to_json(const FittedModel& m) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(m.kind);
    j["dimension"] = m.dimension;
    j["p_mpp_kw"] = m.p_mpp;
    j["feature_names"] = feature_names();
    j["vocabulary"] = weather_vocabulary();
    j["degenerate_warning"] = m.degenerate_warning;

    if (m.kind != ModelKind::naive) {
        j["standardization"] = {{"mean", m.standardization.mean},
                                {"scale", m.standardization.scale},
                                {"degenerate", m.standardization.degenerate}};
    }
    if (m.kind == ModelKind::ols || m.kind == ModelKind::ridge || m.kind == ModelKind::lasso) {
        j["weights"] = m.weights;
        j["intercept"] = m.intercept;
    }
    nlohmann::ordered_json hyper;
    hyper["ridge_lambda"] = m.hyper.ridge_lambda;
    hyper["lasso_lambda"] = m.hyper.lasso_lambda;
    hyper["lasso_tol"] = m.hyper.lasso_tol;
    hyper["lasso_max_iter"] = m.hyper.lasso_max_iter;
    hyper["svr_c"] = m.hyper.svr_c;
    hyper["svr_epsilon"] = m.hyper.svr_epsilon;
    hyper["svr_gamma"] = m.hyper.svr_gamma;
    hyper["svr_tol"] = m.hyper.svr_tol;
    hyper["svr_max_iter"] = m.hyper.svr_max_iter;
    j["hyperparameters"] = hyper;

    if (m.kind == ModelKind::svr && m.svr) {
        j["svr"] = {{"support_vectors", m.svr->support_vectors},
                    {"dual_coef", m.svr->dual_coef},
                    {"intercept", m.svr->intercept},
                    {"gamma", m.svr->gamma},
                    {"epsilon", m.svr->epsilon},
                    {"c", m.svr->c},
                    {"iterations", m.svr->iterations}};
    }
    return j;
}

inline FittedModel model_from_json(const nlohmann::json& j) {
    FittedModel m;
    try {
        m.kind = model_kind_from(j.at("kind").get<std::string>());
        m.dimension = j.at("dimension").get<std::size_t>();
        m.p_mpp = j.at("p_mpp_kw").get<double>();
        m.degenerate_warning = j.value("degenerate_warning", false);

        const auto vocab = j.at("vocabulary").get<std::vector<std::string>>();
        if (vocab != weather_vocabulary())
            throw FormatError("model vocabulary does not match this build");

        if (m.kind != ModelKind::naive) {
            const auto& s = j.at("standardization");
            m.standardization.mean = s.at("mean").get<std::vector<double>>();
            m.standardization.scale = s.at("scale").get<std::vector<double>>();
            m.standardization.degenerate = s.at("degenerate").get<std::vector<bool>>();
            for (double sc : m.standardization.scale)
                if (!(sc > 0.0)) throw FormatError("standardization scales must be positive");
        }
        if (m.kind == ModelKind::ols || m.kind == ModelKind::ridge ||
            m.kind == ModelKind::lasso) {
            m.weights = j.at("weights").get<std::vector<double>>();
            m.intercept = j.at("intercept").get<double>();
        }
        const auto& h = j.at("hyperparameters");
        m.hyper.ridge_lambda = h.at("ridge_lambda").get<double>();
        m.hyper.lasso_lambda = h.at("lasso_lambda").get<double>();
        m.hyper.lasso_tol = h.at("lasso_tol").get<double>();
        m.hyper.lasso_max_iter = h.at("lasso_max_iter").get<std::size_t>();
        m.hyper.svr_c = h.at("svr_c").get<double>();
        m.hyper.svr_epsilon = h.at("svr_epsilon").get<double>();
        m.hyper.svr_gamma = h.at("svr_gamma").get<double>();
        m.hyper.svr_tol = h.at("svr_tol").get<double>();
        m.hyper.svr_max_iter = h.at("svr_max_iter").get<std::size_t>();

        if (m.kind == ModelKind::svr) {
            const auto& s = j.at("svr");
            SvrParams svr;
            svr.support_vectors = s.at("support_vectors").get<std::vector<std::vector<double>>>();
            svr.dual_coef = s.at("dual_coef").get<std::vector<double>>();
            svr.intercept = s.at("intercept").get<double>();
            svr.gamma = s.at("gamma").get<double>();
            svr.epsilon = s.at("epsilon").get<double>();
            svr.c = s.at("c").get<double>();
            svr.iterations = s.value("iterations", std::size_t{0});
            if (svr.support_vectors.size() != svr.dual_coef.size())
                throw FormatError("svr support vectors and duals disagree in length");
            for (double d : svr.dual_coef)
                if (std::abs(d) > svr.c + 1e-9)
                    throw FormatError("svr dual coefficient violates the box constraint");
            m.svr = std::move(svr);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
    return m;
}

} // namespace sunbroker
