#include "nsmax/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nsmax/errors.hpp"
#include "nsmax/io.hpp"
#include "nsmax/models.hpp"
#include "nsmax/simd/kernels.hpp"

namespace nsmax::simulation {

namespace {

// Lower factor F with F F' = m; eigen square root when m is only semi-definite.
Eigen::MatrixXd square_root(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return m;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-8 * scale)
        throw SimulationError(
            "Cholesky factorization of the dependence matrix failed; add a nugget or jitter to the model");
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

ExtremalFunctionSampler::ExtremalFunctionSampler(const SiteSet& sites, const DependenceSpec& spec)
    : ExtremalFunctionSampler(spec.family(), models::pair_matrix(spec, sites),
                              spec.has("nu") ? spec.get("nu") : 1.0) {}

ExtremalFunctionSampler::ExtremalFunctionSampler(Family family, Eigen::MatrixXd dependence, double nu)
    : family_(family), k_(static_cast<std::size_t>(dependence.rows())), nu_(nu), dep_(std::move(dependence)) {
    if (dep_.rows() != dep_.cols() || k_ == 0) throw ValidationError("dependence matrix must be square and non-empty");
    if (!dep_.allFinite()) throw SimulationError("non-finite dependence matrix");
    if (family_ == Family::ExtremalT && !(nu_ > 0.0)) throw DomainError("degrees of freedom must be > 0");
    factorize();
}

void ExtremalFunctionSampler::factorize() {
    const long k = static_cast<long>(k_);
    if (family_ == Family::BrownResnick) {
        Eigen::MatrixXd c(k - 1, k - 1);
        for (long s = 1; s < k; ++s)
            for (long t = 1; t < k; ++t) c(s - 1, t - 1) = dep_(s, 0) + dep_(t, 0) - dep_(s, t);
        factor_ = square_root(c);
    } else {
        factor_ = square_root(dep_);
    }
}

void ExtremalFunctionSampler::draw(std::size_t anchor, Engine& rng, std::span<double> w) const {
    const long k = static_cast<long>(k_);
    const long j = static_cast<long>(anchor);
    std::normal_distribution<double> nd;
    if (family_ == Family::BrownResnick) {
        Eigen::VectorXd eps = Eigen::VectorXd::Zero(k);
        if (k > 1) {
            Eigen::VectorXd n(factor_.cols());
            for (long i = 0; i < n.size(); ++i) n[i] = nd(rng);
            eps.tail(k - 1) = factor_ * n;
        }
        for (long s = 0; s < k; ++s) w[static_cast<std::size_t>(s)] = std::exp(eps[s] - eps[j] - dep_(s, j));
        w[anchor] = 1.0;
        return;
    }
    Eigen::VectorXd n(k);
    for (long i = 0; i < k; ++i) n[i] = nd(rng);
    const Eigen::VectorXd x = factor_ * n;
    std::gamma_distribution<double> chi2(0.5 * (nu_ + 1.0), 2.0);
    const double scale = 1.0 / std::sqrt(chi2(rng));
    for (long s = 0; s < k; ++s) {
        const double y = dep_(s, j) + (x[s] - dep_(s, j) * x[j]) * scale;
        w[static_cast<std::size_t>(s)] = y > 0.0 ? std::pow(y, nu_) : 0.0;
    }
    w[anchor] = 1.0;
}

void ExtremalFunctionSampler::sample(Engine& rng, std::span<double> z) const {
    std::fill(z.begin(), z.end(), 0.0);
    std::vector<double> w(k_);
    std::exponential_distribution<double> ex(1.0);
    const auto& kt = simd::active();
    for (std::size_t j = 0; j < k_; ++j) {
        double arrivals = ex(rng);
        double zeta = 1.0 / arrivals;
        std::size_t count = 0;
        while (zeta > z[j]) {
            if (++count > kMaxArrivalsPerAnchor)
                throw SimulationError("more than 1e6 Poisson arrivals at one anchor; the dependence model is degenerate");
            draw(j, rng, w);
            if (!kt.any_reaches(zeta, w.data(), z.data(), j)) kt.max_scaled_update(zeta, w.data(), z.data(), k_);
            arrivals += ex(rng);
            zeta = 1.0 / arrivals;
        }
    }
}

BlockMaximaPanel simulate_exact(const SiteSet& sites, const DependenceSpec& spec, std::size_t n_reps,
                                std::uint64_t seed) {
    spec.validate();
    models::check_sites_for(spec.structure(), sites);
    if (n_reps < 2) throw ValidationError("a panel needs at least two replicates");
    const ExtremalFunctionSampler sampler(sites, spec);
    const std::size_t k = sites.size();
    Eigen::MatrixXd values(static_cast<long>(n_reps), static_cast<long>(k));
    std::vector<double> z(k);
    for (std::size_t r = 0; r < n_reps; ++r) {
        Engine rng = make_engine(seed, r);
        sampler.sample(rng, z);
        for (std::size_t i = 0; i < k; ++i) values(static_cast<long>(r), static_cast<long>(i)) = z[i];
    }
    std::vector<long> years(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) years[r] = static_cast<long>(r + 1);
    return BlockMaximaPanel(std::move(values), MarginState::UnitFrechet, {}, std::move(years));
}

GridSpec parse_grid(const std::string& text) {
    const std::string prefix = "grid:";
    if (text.rfind(prefix, 0) != 0) throw ValidationError("grid spec must start with 'grid:'");
    std::stringstream ss(text.substr(prefix.size()));
    std::vector<std::string> parts;
    for (std::string tok; std::getline(ss, tok, ',');) parts.push_back(tok);
    if (parts.size() != 6) throw ValidationError("grid spec needs x0,x1,y0,y1,nx,ny");
    GridSpec g{};
    double* d[4] = {&g.x0, &g.x1, &g.y0, &g.y1};
    for (int i = 0; i < 4; ++i) {
        auto r = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), *d[i]);
        if (r.ec != std::errc()) throw ValidationError("bad grid coordinate '" + parts[i] + "'");
    }
    std::size_t* n[2] = {&g.nx, &g.ny};
    for (int i = 0; i < 2; ++i) {
        const auto& p = parts[4 + i];
        auto r = std::from_chars(p.data(), p.data() + p.size(), *n[i]);
        if (r.ec != std::errc() || *n[i] == 0) throw ValidationError("bad grid resolution '" + p + "'");
    }
    return g;
}

SiteSet grid_sites(const GridSpec& grid, const SiteSet* source) {
    if (grid.size() > kMaxGridNodes)
        throw ResourceError("grid of " + std::to_string(grid.size()) + " nodes exceeds the 1e4 node limit");
    const bool interp = source && source->n_covariates() > 0 && source->dim() == 2;
    const std::size_t p = interp ? source->n_covariates() : 1;
    std::vector<std::vector<double>> coords, covs;
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.nx == 1 ? grid.x0 : grid.x0 + (grid.x1 - grid.x0) * ix / (grid.nx - 1.0);
            const double y = grid.ny == 1 ? grid.y0 : grid.y0 + (grid.y1 - grid.y0) * iy / (grid.ny - 1.0);
            coords.push_back({x, y});
            std::vector<double> c(p, 0.0);
            if (interp) {
                double wsum = 0.0;
                std::vector<double> acc(p, 0.0);
                bool exact = false;
                for (std::size_t s = 0; s < source->size() && !exact; ++s) {
                    const auto sc = source->coord(s);
                    const double d2 = (sc[0] - x) * (sc[0] - x) + (sc[1] - y) * (sc[1] - y);
                    const auto cv = source->covariate(s);
                    if (d2 == 0.0) {
                        c.assign(cv.begin(), cv.end());
                        exact = true;
                        break;
                    }
                    const double wt = 1.0 / d2;
                    wsum += wt;
                    for (std::size_t q = 0; q < p; ++q) acc[q] += wt * cv[q];
                }
                if (!exact)
                    for (std::size_t q = 0; q < p; ++q) c[q] = acc[q] / wsum;
            }
            covs.push_back(std::move(c));
        }
    }
    return SiteSet(std::move(coords), std::move(covs));
}

GridField simulate_field_grid(const GridSpec& grid, const DependenceSpec& spec, std::size_t n_reps,
                              std::uint64_t seed, const SiteSet* covariate_source) {
    auto sites = grid_sites(grid, covariate_source);
    auto panel = simulate_exact(sites, spec, n_reps, seed);
    return {grid, std::move(sites), std::move(panel)};
}

void write_grid_csv(std::ostream& os, const GridField& f) {
    os << "rep,ix,iy,x,y,covariate,z\n";
    for (std::size_t r = 0; r < f.panel.n_blocks(); ++r) {
        for (std::size_t n = 0; n < f.sites.size(); ++n) {
            const auto c = f.sites.coord(n);
            const double cov = f.sites.n_covariates() ? f.sites.covariate(n)[0] : 0.0;
            os << r << ',' << n % f.grid.nx << ',' << n / f.grid.nx << ',' << io::format_double(c[0]) << ','
               << io::format_double(c[1]) << ',' << io::format_double(cov) << ','
               << io::format_double(f.panel.value(r, n)) << '\n';
        }
    }
}

std::pair<double, double> br_pair(double gamma, Engine& rng) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("variogram value must be finite and >= 0");
    const double sd = std::sqrt(2.0 * gamma);
    std::normal_distribution<double> nd;
    std::exponential_distribution<double> ex(1.0);
    double z[2] = {0.0, 0.0};
    for (int j = 0; j < 2; ++j) {
        double arrivals = ex(rng);
        double zeta = 1.0 / arrivals;
        std::size_t count = 0;
        while (zeta > z[j]) {
            if (++count > kMaxArrivalsPerAnchor) throw SimulationError("more than 1e6 Poisson arrivals at one anchor");
            double w[2];
            w[j] = 1.0;
            w[1 - j] = std::exp(sd * nd(rng) - gamma);
            if (j == 0 || zeta * w[0] < z[0]) {
                z[0] = std::max(z[0], zeta * w[0]);
                z[1] = std::max(z[1], zeta * w[1]);
            }
            arrivals += ex(rng);
            zeta = 1.0 / arrivals;
        }
    }
    return {z[0], z[1]};
}

}  // namespace nsmax::simulation
