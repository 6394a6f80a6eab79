#include "nsmax/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nsmax/bivariate.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/io.hpp"
#include "nsmax/models.hpp"
#include "nsmax/optimize.hpp"
#include "nsmax/simd/kernels.hpp"

namespace nsmax::empirical {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286;
}  // namespace

double GevParams::neg_log_cdf(double z) const {
    const double y = (z - mu) / sigma;
    if (std::abs(xi) < kGumbelBranch) return std::exp(-y);
    const double t = 1.0 + xi * y;
    if (t <= 0.0) return xi > 0.0 ? kInf : 0.0;
    return std::pow(t, -1.0 / xi);
}

double GevParams::cdf(double z) const { return std::exp(-neg_log_cdf(z)); }

double gev_negloglik(std::span<const double> sample, const GevParams& p) {
    if (!(p.sigma > 0.0)) return kInf;
    const double n = static_cast<double>(sample.size());
    double s = n * std::log(p.sigma);
    if (std::abs(p.xi) < kGumbelBranch) {
        for (double z : sample) {
            const double y = (z - p.mu) / p.sigma;
            s += y + std::exp(-y);
        }
        return s;
    }
    for (double z : sample) {
        const double t = 1.0 + p.xi * (z - p.mu) / p.sigma;
        if (!(t > 0.0)) return kInf;
        const double lt = std::log(t);
        s += (1.0 + 1.0 / p.xi) * lt + std::exp(-lt / p.xi);
    }
    return s;
}

GevParams gev_fit(std::span<const double> sample, const std::string& site_id) {
    if (sample.size() < kMinGevSample)
        throw InsufficientDataError("GEV fit needs at least 20 observations" +
                                    (site_id.empty() ? std::string() : " (site " + site_id + ")"));
    const double n = static_cast<double>(sample.size());
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double var = 0.0;
    for (double z : sample) var += (z - mean) * (z - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw MarginFitError("degenerate sample for GEV fit", site_id);

    // Gumbel moment start; optimize over centred/scaled coordinates.
    const double s0 = sd * std::sqrt(6.0) / std::numbers::pi;
    const double m0 = mean - kEulerGamma * s0;
    auto decode = [&](std::span<const double> u) { return GevParams{u[2], m0 + s0 * u[0], s0 * std::exp(u[1])}; };
    const optimize::Objective f = [&](std::span<const double> u) { return gev_negloglik(sample, decode(u)); };
    optimize::NelderMeadConfig cfg;
    cfg.xtol = 1e-7;
    cfg.max_evals = 20000;
    cfg.restarts = 3;
    cfg.step = 0.2;
    optimize::NelderMeadResult best;
    best.f = kInf;
    for (double xi0 : {0.1, -0.1, 0.5}) {
        const auto r = optimize::nelder_mead(f, {0.0, 0.0, xi0}, cfg);
        if (r.f < best.f) best = r;
    }
    if (!best.converged || !std::isfinite(best.f)) throw MarginFitError("GEV fit did not converge", site_id);
    GevParams p = decode(best.x);
    if (std::abs(p.xi) < kGumbelBranch) p.xi = 0.0;
    return p;
}

std::vector<GevParams> fit_margins(const BlockMaximaPanel& panel, const std::vector<std::string>& ids) {
    std::vector<GevParams> out;
    for (std::size_t i = 0; i < panel.n_sites(); ++i) {
        const auto col = panel.column(i);
        out.push_back(gev_fit(col, i < ids.size() ? ids[i] : std::to_string(i)));
    }
    return out;
}

BlockMaximaPanel to_unit_frechet(const BlockMaximaPanel& raw, std::span<const GevParams> margins) {
    if (margins.size() != raw.n_sites()) throw ValidationError("one GEV fit per site is required");
    const double lo = -1.0 / std::log(std::numeric_limits<double>::min());
    const double hi = -1.0 / std::log1p(-std::numeric_limits<double>::epsilon() / 2.0);
    Eigen::MatrixXd v = raw.values();
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < raw.n_sites(); ++i) {
        for (std::size_t m = 0; m < raw.n_blocks(); ++m) {
            if (raw.missing(m, i)) continue;
            const double e = margins[i].neg_log_cdf(raw.value(m, i));  // -log G
            double z = 1.0 / e;
            if (!(z >= lo)) {
                z = lo;
                ++clipped;
            } else if (!(z <= hi)) {
                z = hi;
                ++clipped;
            }
            v(static_cast<long>(m), static_cast<long>(i)) = z;
        }
    }
    if (clipped) log_warning(std::to_string(clipped) + " values outside the fitted GEV support were clipped");
    return raw.with_values(std::move(v), MarginState::UnitFrechet);
}

std::vector<double> pseudo_uniform(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> u(n);
    for (std::size_t r = 0; r < n; ++r) u[idx[r]] = (static_cast<double>(r) + 1.0) / (static_cast<double>(n) + 1.0);
    return u;
}

double empirical_theta_fmad(std::span<const double> col_i, std::span<const double> col_j) {
    if (col_i.size() != col_j.size()) throw ValidationError("paired samples differ in length");
    std::vector<double> a, b;
    for (std::size_t m = 0; m < col_i.size(); ++m) {
        if (std::isnan(col_i[m]) || std::isnan(col_j[m])) continue;
        a.push_back(col_i[m]);
        b.push_back(col_j[m]);
    }
    if (a.size() < kMinPairs) throw InsufficientDataError("F-madogram needs at least 10 complete pairs");
    const auto fa = pseudo_uniform(a);
    const auto fb = pseudo_uniform(b);
    const double nu = simd::abs_diff_sum(fa, fb) / (2.0 * static_cast<double>(fa.size()));
    const double theta = (1.0 + 2.0 * nu) / (1.0 - 2.0 * nu);
    return std::clamp(theta, 1.0, 2.0 + kThetaClipTol);
}

std::vector<ThetaRow> theta_vs_distance(const BlockMaximaPanel& panel, const SiteSet& sites,
                                        std::span<const DependenceSpec> specs) {
    if (panel.n_sites() != sites.size()) throw ValidationError("panel columns and site count differ");
    std::vector<Eigen::MatrixXd> mats;
    std::vector<double> nus;
    for (const auto& s : specs) {
        s.validate();
        models::check_sites_for(s.structure(), sites);
        mats.push_back(models::pair_matrix(s, sites));
        nus.push_back(s.has("nu") ? s.get("nu") : 1.0);
    }
    std::vector<ThetaRow> rows;
    const std::size_t k = sites.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            std::vector<double> a, b;
            for (std::size_t m = 0; m < panel.n_blocks(); ++m) {
                if (panel.missing(m, i) || panel.missing(m, j)) continue;
                a.push_back(panel.value(m, i));
                b.push_back(panel.value(m, j));
            }
            ThetaRow row{i, j, sites.distance(i, j), empirical_theta_fmad(a, b), {}};
            for (std::size_t s = 0; s < specs.size(); ++s) {
                const double d = mats[s](static_cast<long>(i), static_cast<long>(j));
                row.theta_model.push_back(specs[s].family() == Family::BrownResnick
                                              ? bivariate::theta_br(d)
                                              : bivariate::theta_et(std::clamp(d, -1.0, 1.0), nus[s]));
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_theta_csv(std::ostream& os, const std::vector<ThetaRow>& rows, const SiteSet& sites,
                     std::span<const std::string> model_labels) {
    os << "site_i,site_j,distance_km,theta_empirical";
    for (const auto& l : model_labels) os << ",theta_" << l;
    os << '\n';
    auto label = [&](std::size_t i) { return sites.ids().empty() ? std::to_string(i) : sites.id(i); };
    for (const auto& r : rows) {
        os << label(r.i) << ',' << label(r.j) << ',' << io::format_double(r.distance) << ','
           << io::format_double(r.theta_empirical);
        for (double t : r.theta_model) os << ',' << io::format_double(t);
        os << '\n';
    }
}

}  // namespace nsmax::empirical
