#include "nsmax/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "nsmax/errors.hpp"
#include "nsmax/models.hpp"

namespace nsmax::validity {

namespace {

using MatrixFn = std::function<Eigen::MatrixXd(const SiteSet&)>;

nlohmann::json describe(const SiteSet& sites, const Eigen::MatrixXd& m) {
    nlohmann::json j;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const auto c = sites.coord(i);
        const auto v = sites.covariate(i);
        j["sites"].push_back({{"coord", std::vector<double>(c.begin(), c.end())},
                              {"covariate", std::vector<double>(v.begin(), v.end())}});
    }
    for (long r = 0; r < m.rows(); ++r) {
        std::vector<double> row;
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j["matrix"].push_back(row);
    }
    return j;
}

DefinitenessReport run(const MatrixFn& fn, const SiteGenerator& gen, std::size_t n_sites, std::size_t n_trials,
                       std::uint64_t seed, bool cnd, std::size_t n_contrasts) {
    if (cnd && n_sites < 2) throw ValidationError("conditional negative definiteness needs n_sites >= 2");
    if (n_sites < 1) throw ValidationError("need at least one site");
    DefinitenessReport rep;
    rep.conditional = cnd;
    rep.n_trials = n_trials;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.worst_contrast_value = cnd ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    const long k = static_cast<long>(n_sites);
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(k, k) - Eigen::MatrixXd::Constant(k, k, 1.0 / k);

    for (std::size_t t = 0; t < n_trials; ++t) {
        Engine rng = make_engine(seed, t);
        const SiteSet sites = gen(n_sites, rng);
        const Eigen::MatrixXd m = fn(sites);
        if (!m.allFinite()) {
            throw NumericalError("non-finite kernel value in definiteness check: " + describe(sites, m).dump());
        }
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        const double tol = kRelTol * scale;

        const Eigen::MatrixXd target = cnd ? Eigen::MatrixXd(-0.5 * h * m * h) : m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(target, Eigen::EigenvaluesOnly);
        const double lam = es.eigenvalues().minCoeff();

        std::normal_distribution<double> nd;
        double worst = cnd ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n_contrasts; ++c) {
            Eigen::VectorXd a(k);
            for (long i = 0; i < k; ++i) a[i] = nd(rng);
            if (cnd) a.array() -= a.mean();
            const double nrm = a.norm();
            if (nrm == 0.0) continue;
            a /= nrm;
            const double q = a.dot(m * a);
            worst = cnd ? std::max(worst, q) : std::min(worst, q);
        }

        const bool eigen_ok = lam >= -tol;
        const bool contrast_ok = cnd ? worst <= tol : worst >= -tol;
        if (eigen_ok != contrast_ok) ++rep.route_disagreements;
        const bool ok = cnd ? (eigen_ok && contrast_ok) : eigen_ok;

        rep.min_eigenvalue = std::min(rep.min_eigenvalue, lam);
        rep.worst_contrast_value = cnd ? std::max(rep.worst_contrast_value, worst)
                                       : std::min(rep.worst_contrast_value, worst);
        if (!ok && rep.passed) {
            rep.passed = false;
            auto cfg = describe(sites, m);
            cfg["trial"] = t;
            cfg["min_eigenvalue"] = lam;
            cfg["contrast_value"] = worst;
            rep.failing_config = std::move(cfg);
        }
    }
    return rep;
}

MatrixFn from_kernel(const PairKernel& k) {
    return [k](const SiteSet& s) {
        const long n = static_cast<long>(s.size());
        Eigen::MatrixXd m(n, n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) m(i, j) = k(s, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return m;
    };
}

}  // namespace

nlohmann::json DefinitenessReport::to_json() const {
    nlohmann::json j{{"check", conditional ? "cnd" : "psd"},
                     {"n_trials", n_trials},
                     {"min_eigenvalue", min_eigenvalue},
                     {"worst_contrast_value", worst_contrast_value},
                     {"passed", passed},
                     {"route_disagreements", route_disagreements}};
    j["failing_config"] = failing_config ? *failing_config : nlohmann::json(nullptr);
    return j;
}

SiteSet default_site_generator(std::size_t n, Engine& rng) {
    std::uniform_real_distribution<double> xy(0.0, 300.0);
    std::uniform_real_distribution<double> alt(0.0, 1.5);
    std::vector<std::vector<double>> coords(n), covs(n);
    for (std::size_t i = 0; i < n; ++i) {
        coords[i] = {xy(rng), xy(rng)};
        covs[i] = {alt(rng)};
    }
    return SiteSet(std::move(coords), std::move(covs));
}

DefinitenessReport check_cnd(const PairKernel& vario, const SiteGenerator& gen, std::size_t n_sites,
                             std::size_t n_trials, std::uint64_t seed, std::size_t n_contrasts) {
    return run(from_kernel(vario), gen, n_sites, n_trials, seed, true, n_contrasts);
}

DefinitenessReport check_psd(const PairKernel& corr, const SiteGenerator& gen, std::size_t n_sites,
                             std::size_t n_trials, std::uint64_t seed, std::size_t n_contrasts) {
    return run(from_kernel(corr), gen, n_sites, n_trials, seed, false, n_contrasts);
}

DefinitenessReport check_spec(const DependenceSpec& spec, std::size_t n_sites, std::size_t n_trials,
                              std::uint64_t seed, const SiteGenerator& gen) {
    spec.validate();
    const auto p = models::KernelParams::from_spec(spec);
    const MatrixFn fn = [p](const SiteSet& s) { return models::pair_matrix(p, s); };
    return run(fn, gen, n_sites, n_trials, seed, spec.family() == Family::BrownResnick, 64);
}

DependenceSpec random_spec(Family family, Structure structure, Engine& rng) {
    DependenceSpec spec(family, structure);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto b = spec.bounds()[i];
        spec.set_value(i, std::uniform_real_distribution<double>(b.lo, b.hi)(rng));
    }
    return spec;
}

void merge_into(DefinitenessReport& acc, const DefinitenessReport& r) {
    const bool first = acc.n_trials == 0;
    acc.n_trials += r.n_trials;
    acc.min_eigenvalue = first ? r.min_eigenvalue : std::min(acc.min_eigenvalue, r.min_eigenvalue);
    if (first) {
        acc.conditional = r.conditional;
        acc.worst_contrast_value = r.worst_contrast_value;
    } else {
        acc.worst_contrast_value = acc.conditional ? std::max(acc.worst_contrast_value, r.worst_contrast_value)
                                                   : std::min(acc.worst_contrast_value, r.worst_contrast_value);
    }
    acc.route_disagreements += r.route_disagreements;
    if (!r.passed && acc.passed) {
        acc.passed = false;
        acc.failing_config = r.failing_config;
    }
}

}  // namespace nsmax::validity
