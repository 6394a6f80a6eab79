#include "nsmax/models.hpp"

#include <cmath>
#include <numbers>

#include "nsmax/errors.hpp"
#include "nsmax/simd/kernels.hpp"

namespace nsmax::models {

namespace {

double euclid(Vec x, Vec y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = x[i] - y[i];
        s += h * h;
    }
    return std::sqrt(s);
}

bool same_point(Vec x, Vec y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) return false;
    return true;
}

double aniso_norm(Vec x, Vec y, const Eigen::Matrix2d& a) {
    const double hx = x[0] - y[0];
    const double hy = x[1] - y[1];
    const double u = a(0, 0) * hx + a(0, 1) * hy;
    const double v = a(1, 0) * hx + a(1, 1) * hy;
    return std::sqrt(u * u + v * v);
}

double power(double base, double expo) { return base == 0.0 ? 0.0 : std::pow(base, expo); }

// Continuous variogram from the spatial norm ||A0 h|| and the covariate gap |c(x)-c(y)|.
double combine(const KernelParams& p, double spatial_norm, double cov_gap) {
    const double spatial = power(spatial_norm, p.alpha0);
    switch (p.structure) {
        case Structure::Iso:
        case Structure::Aniso: return spatial;
        case Structure::M1: return spatial + power(p.q3 * cov_gap, p.alpha0);
        case Structure::M2: return std::pow(spatial + power(p.q3 * cov_gap, p.alpha1), p.beta);
        case Structure::M3:
            return bounded_transform(spatial + power(p.q3 * cov_gap, p.alpha1), p.beta, p.alpha);
        case Structure::MBD: {
            const double g = p.q3 * cov_gap;
            return std::pow(spatial_norm * spatial_norm + g * g, p.beta);
        }
        case Structure::MHG: break;
    }
    throw ValidationError("structure M_HG has no variogram form");
}

double cov0(const SiteSet& s, std::size_t i) { return s.n_covariates() ? s.covariate(i)[0] : 0.0; }

}  // namespace

Eigen::Matrix2d Anisotropy2D::matrix() const {
    Eigen::Matrix2d r;
    r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return Eigen::DiagonalMatrix<double, 2>(q1, q2) * r;
}

void Anisotropy2D::validate() const {
    if (!(q1 > 0.0 && q2 > 0.0)) throw DomainError("anisotropy scales must be positive");
    if (!(std::abs(theta) <= std::numbers::pi / 4.0 + 1e-12))
        throw DomainError("anisotropy angle outside [-pi/4, pi/4]");
}

double vario_iso(Vec x, Vec y, double q, double alpha0) { return power(q * euclid(x, y), alpha0); }

double corr_iso(Vec x, Vec y, double q, double alpha0) { return std::exp(-vario_iso(x, y, q, alpha0)); }

double vario_aniso(Vec x, Vec y, const Anisotropy2D& a, double alpha0) {
    return power(aniso_norm(x, y, a.matrix()), alpha0);
}

double corr_aniso(Vec x, Vec y, const Anisotropy2D& a, double alpha0) {
    return std::exp(-vario_aniso(x, y, a, alpha0));
}

bool index_sets_disjoint(std::span<const CovariateTerm> terms) {
    std::vector<std::size_t> seen;
    for (const auto& t : terms) {
        for (auto i : t.index) {
            for (auto s : seen)
                if (s == i) return false;
        }
        seen.insert(seen.end(), t.index.begin(), t.index.end());
    }
    return true;
}

CovariateVariogram::CovariateVariogram(Eigen::MatrixXd a0, double alpha0, std::vector<CovariateTerm> terms,
                                       double beta)
    : a0_(std::move(a0)), alpha0_(alpha0), terms_(std::move(terms)), beta_(beta) {
    if (a0_.rows() != a0_.cols()) throw ValidationError("A0 must be square");
    if (!(alpha0_ > 0.0 && alpha0_ <= 2.0)) throw DomainError("alpha0 must lie in (0, 2]");
    if (!(beta_ > 0.0 && beta_ <= 1.0)) throw DomainError("beta must lie in (0, 1]");
    for (const auto& t : terms_) {
        if (!(t.alpha > 0.0 && t.alpha <= 2.0)) throw DomainError("covariate exponents must lie in (0, 2]");
        if (t.scale.rows() != static_cast<long>(t.index.size()) || t.scale.cols() != t.scale.rows())
            throw ValidationError("covariate scale matrix must be |I| x |I|");
    }
    if (!index_sets_disjoint(terms_))
        log_warning("covariate index sets overlap; the model is valid but not identifiable");
}

double CovariateVariogram::inner(Vec x, Vec y, Vec cx, Vec cy) const {
    Eigen::VectorXd h(static_cast<long>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) h[static_cast<long>(i)] = x[i] - y[i];
    double g = power((a0_ * h).norm(), alpha0_);
    for (const auto& t : terms_) {
        Eigen::VectorXd dc(static_cast<long>(t.index.size()));
        for (std::size_t r = 0; r < t.index.size(); ++r) dc[static_cast<long>(r)] = cx[t.index[r]] - cy[t.index[r]];
        g += power((t.scale * dc).norm(), t.alpha);
    }
    return g;
}

double CovariateVariogram::operator()(Vec x, Vec y, Vec cx, Vec cy) const {
    return std::pow(inner(x, y, cx, cy), beta_);
}

double CovariateVariogram::bounded(Vec x, Vec y, Vec cx, Vec cy, double alpha) const {
    return bounded_transform(inner(x, y, cx, cy), beta_, alpha);
}

double bounded_transform(double g, double beta, double alpha) {
    if (!(alpha <= 1.0)) throw DomainError("alpha must lie in (-inf, 1]");
    const double gb = std::pow(g, beta);
    const double r = alpha / beta;
    if (std::abs(r) < 1e-8) return std::log1p(gb) / std::numbers::ln2;
    return std::expm1(r * std::log1p(gb)) / std::expm1(r * std::numbers::ln2);
}

double vario_m1(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0) {
    return power(aniso_norm(x, y, a0.matrix()), alpha0) + power(q3 * std::abs(cx - cy), alpha0);
}

double vario_m2(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0,
                double alpha1, double beta) {
    return std::pow(power(aniso_norm(x, y, a0.matrix()), alpha0) + power(q3 * std::abs(cx - cy), alpha1), beta);
}

double vario_m3(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0,
                double alpha1, double beta, double alpha) {
    const double g = power(aniso_norm(x, y, a0.matrix()), alpha0) + power(q3 * std::abs(cx - cy), alpha1);
    return bounded_transform(g, beta, alpha);
}

double vario_mbd(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double beta) {
    return vario_m2(x, y, cx, cy, a0, q3, 2.0, 2.0, beta);
}

Eigen::Matrix2d EllipseLinks::omega(double c) const {
    const double wx = std::exp(wx_a + wx_b * c);
    const double wy = std::exp(wy_a + wy_b * c);
    const double d = std::tanh(delta_a + delta_b * c);
    Eigen::Matrix2d o;
    o << wx * wx, wx * wy * d, wx * wy * d, wy * wy;
    return o;
}

double corr_hg(Vec x, Vec y, double cx, double cy, const EllipseLinks& links, double alpha) {
    const Eigen::Matrix2d ox = links.omega(cx);
    const Eigen::Matrix2d oy = links.omega(cy);
    const Eigen::Matrix2d avg = 0.5 * (ox + oy);
    const double det_avg = avg.determinant();
    const double det_x = ox.determinant();
    const double det_y = oy.determinant();
    if (!(det_avg > 0.0) || !(det_x > 0.0) || !(det_y > 0.0) || !std::isfinite(det_avg))
        throw NumericalError("degenerate ellipse matrix in non-stationary correlation");
    const Eigen::Vector2d h(x[0] - y[0], x[1] - y[1]);
    const double quad = h.dot(avg.inverse() * h);
    const double pre = std::pow(det_x, 0.25) * std::pow(det_y, 0.25) / std::sqrt(det_avg);
    return pre * std::exp(-power(quad, alpha / 2.0));
}

double corr_from_vario(double gamma_tilde) { return std::exp(-gamma_tilde); }

double add_nugget_vario(double gamma_tilde, double nugget, bool same_location) {
    return same_location ? 0.0 : nugget + gamma_tilde;
}

double add_nugget_corr(double rho_tilde, double nugget, bool same_location) {
    return same_location ? 1.0 : (1.0 - nugget) * rho_tilde;
}

KernelParams KernelParams::from_spec(const DependenceSpec& spec) {
    KernelParams p;
    p.family = spec.family();
    p.structure = spec.structure();
    const auto opt = [&](const char* n, double fallback) { return spec.has(n) ? spec.get(n) : fallback; };
    p.nu = opt("nu", 0.0);
    p.nugget = spec.get("nugget");
    p.q = opt("q", 0.0);
    p.a0 = {opt("q1", 1.0), opt("q2", 1.0), opt("theta", 0.0)};
    p.q3 = opt("q3", 0.0);
    const bool mbd = p.structure == Structure::MBD;
    p.alpha0 = mbd ? 2.0 : opt("alpha0", 1.0);
    p.alpha1 = mbd ? 2.0 : opt("alpha1", p.alpha0);
    p.beta = opt("beta", 1.0);
    p.alpha = opt("alpha", 1.0);
    p.links = {opt("wx_a", 0.0), opt("wx_b", 0.0), opt("wy_a", 0.0),
               opt("wy_b", 0.0), opt("delta_a", 0.0), opt("delta_b", 0.0)};
    return p;
}

Eigen::Matrix2d KernelParams::spatial_matrix() const {
    if (structure == Structure::Iso) return q * Eigen::Matrix2d::Identity();
    return a0.matrix();
}

double tilde_vario(const KernelParams& p, Vec x, Vec y, double cx, double cy) {
    switch (p.structure) {
        case Structure::Iso: return vario_iso(x, y, p.q, p.alpha0);
        case Structure::Aniso: return vario_aniso(x, y, p.a0, p.alpha0);
        case Structure::M1: return vario_m1(x, y, cx, cy, p.a0, p.q3, p.alpha0);
        case Structure::M2: return vario_m2(x, y, cx, cy, p.a0, p.q3, p.alpha0, p.alpha1, p.beta);
        case Structure::M3: return vario_m3(x, y, cx, cy, p.a0, p.q3, p.alpha0, p.alpha1, p.beta, p.alpha);
        case Structure::MBD: return vario_mbd(x, y, cx, cy, p.a0, p.q3, p.beta);
        case Structure::MHG: break;
    }
    throw ValidationError("structure M_HG has no variogram form");
}

double tilde_corr(const KernelParams& p, Vec x, Vec y, double cx, double cy) {
    if (p.structure == Structure::MHG) return corr_hg(x, y, cx, cy, p.links, p.alpha0);
    return corr_from_vario(tilde_vario(p, x, y, cx, cy));
}

double pair_value(const KernelParams& p, const SiteSet& sites, std::size_t i, std::size_t j) {
    const auto x = sites.coord(i);
    const auto y = sites.coord(j);
    const bool same = same_point(x, y);
    const double cx = cov0(sites, i);
    const double cy = cov0(sites, j);
    if (p.family == Family::BrownResnick)
        return add_nugget_vario(tilde_vario(p, x, y, cx, cy), p.nugget, same);
    return add_nugget_corr(tilde_corr(p, x, y, cx, cy), p.nugget, same);
}

void check_sites_for(Structure s, const SiteSet& sites) {
    if (s != Structure::Iso && sites.dim() != 2)
        throw ValidationError("structure " + to_string(s) + " needs two-dimensional coordinates");
    const bool needs_cov = s == Structure::M1 || s == Structure::M2 || s == Structure::M3 ||
                           s == Structure::MBD || s == Structure::MHG;
    if (needs_cov && sites.n_covariates() == 0)
        throw ValidationError("structure " + to_string(s) + " needs a covariate per site");
}

Eigen::MatrixXd pair_matrix(const KernelParams& p, const SiteSet& sites) {
    const std::size_t k = sites.size();
    const bool br = p.family == Family::BrownResnick;
    Eigen::MatrixXd out = br ? Eigen::MatrixXd(Eigen::MatrixXd::Zero(k, k)) : Eigen::MatrixXd(Eigen::MatrixXd::Identity(k, k));
    if (k < 2) return out;

    if (p.structure == Structure::MHG || sites.dim() != 2) {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) out(i, j) = out(j, i) = pair_value(p, sites, i, j);
        return out;
    }

    const std::size_t npairs = k * (k - 1) / 2;
    std::vector<double> dx(npairs), dy(npairs), norms(npairs);
    std::size_t r = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto xi = sites.coord(i);
        for (std::size_t j = i + 1; j < k; ++j, ++r) {
            const auto xj = sites.coord(j);
            dx[r] = xi[0] - xj[0];
            dy[r] = xi[1] - xj[1];
        }
    }
    const Eigen::Matrix2d a = p.spatial_matrix();
    const double am[4] = {a(0, 0), a(0, 1), a(1, 0), a(1, 1)};
    simd::aniso_norms(dx, dy, am, norms);

    r = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j, ++r) {
            // sites are distinct by construction, so the nugget always applies off the diagonal
            const double g = combine(p, norms[r], std::abs(cov0(sites, i) - cov0(sites, j)));
            out(i, j) = out(j, i) = br ? add_nugget_vario(g, p.nugget, false)
                                       : add_nugget_corr(corr_from_vario(g), p.nugget, false);
        }
    }
    return out;
}

}  // namespace nsmax::models
