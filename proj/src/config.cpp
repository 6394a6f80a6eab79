#include "nsmax/config.hpp"

#include <fstream>

#include "nsmax/errors.hpp"

namespace nsmax::config {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (long r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (long c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        out.push_back(row);
    }
    return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

DependenceSpec spec_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw ValidationError("model block must be a JSON object");
        for (const auto& [key, _] : j.items())
            if (key != "family" && key != "structure" && key != "params" && key != "fixed" && key != "bounds")
                throw ValidationError("unknown model key '" + key + "'");
        DependenceSpec spec(family_from_string(j.at("family").get<std::string>()),
                            structure_from_string(j.at("structure").get<std::string>()));
        if (j.contains("bounds")) {
            for (const auto& [name, b] : j.at("bounds").items()) {
                if (!spec.has(name)) throw ValidationError("unknown parameter '" + name + "' in bounds");
                spec.set_bounds(name, {b.at(0).get<double>(), b.at(1).get<double>()});
            }
        }
        if (j.contains("params")) {
            for (const auto& [name, v] : j.at("params").items()) {
                if (!spec.has(name)) throw ValidationError("unknown parameter '" + name + "' for this structure");
                spec.set(name, v.get<double>());
            }
        }
        if (j.contains("fixed")) {
            for (const auto& name : j.at("fixed")) {
                const auto n = name.get<std::string>();
                if (!spec.has(n)) throw ValidationError("unknown fixed parameter '" + n + "'");
                spec.set_fixed(n, true);
            }
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model block: ") + e.what());
    }
}

DependenceSpec read_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open model file " + path.string());
    try {
        return spec_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
}

nlohmann::json spec_to_json(const DependenceSpec& spec) {
    nlohmann::json j{{"family", to_string(spec.family())}, {"structure", to_string(spec.structure())}};
    j["params"] = nlohmann::json::object();
    j["fixed"] = nlohmann::json::array();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto& n = spec.names()[i];
        j["params"][n] = spec.values()[i];
        if (spec.is_fixed(n)) j["fixed"].push_back(n);
    }
    return j;
}

nlohmann::json report_to_json(const FitReport& rep) {
    nlohmann::json j{{"model", spec_to_json(rep.spec)},
                     {"loglik", number_or_null(rep.loglik)},
                     {"tic", number_or_null(rep.tic)},
                     {"penalty", number_or_null(rep.penalty)},
                     {"converged", rep.converged},
                     {"evaluations", rep.evaluations},
                     {"free_names", rep.free_names}};
    j["stage_trace"] = nlohmann::json::array();
    for (const auto& s : rep.stage_trace)
        j["stage_trace"].push_back({{"stage", s.label}, {"initial_loglik", s.initial_loglik}, {"loglik", s.loglik}});
    j["nested"] = nlohmann::json::array();
    for (const auto& n : rep.nested) j["nested"].push_back({{"model", to_string(n.structure)}, {"loglik", n.loglik}});
    if (rep.hessian.size()) j["hessian"] = matrix_json(rep.hessian);
    if (rep.score_cov.size()) j["score_cov"] = matrix_json(rep.score_cov);
    return j;
}

}  // namespace nsmax::config
