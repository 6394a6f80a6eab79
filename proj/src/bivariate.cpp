#include "nsmax/bivariate.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "nsmax/errors.hpp"

namespace nsmax::bivariate {

namespace {

using NoPromote = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_z(double z1, double z2) {
    if (!(z1 > 0.0) || !(z2 > 0.0)) throw DomainError("exponent function needs z1, z2 > 0");
}

// Both arguments of the ET exponent: ((z2/z1)^(1/nu) - rho)/a and its mirror.
struct EtArgs {
    double x1, x2, r1, r2, a;
};

EtArgs et_args(double z1, double z2, double rho, double nu) {
    const double a = std::sqrt((1.0 - rho * rho) / (nu + 1.0));
    const double lr = std::log(z2 / z1) / nu;
    const double r1 = std::exp(lr);
    const double r2 = std::exp(-lr);
    if (a == 0.0) return {kInf, kInf, r1, r2, a};  // rho = -1 gives independence
    return {(r1 - rho) / a, (r2 - rho) / a, r1, r2, a};
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double student_cdf(double x, double df) {
    if (std::isnan(x)) return x;
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    const double x2 = x * x;
    if (x2 < df) {
        const double central = boost::math::ibeta(0.5, 0.5 * df, x2 / (df + x2), NoPromote());
        return x >= 0.0 ? 0.5 + 0.5 * central : 0.5 - 0.5 * central;
    }
    const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, df / (df + x2), NoPromote());
    return x > 0.0 ? 1.0 - tail : tail;
}

double student_pdf(double x, double df) {
    if (std::isinf(x)) return 0.0;
    const double logc = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
    return std::exp(logc - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

void PairDependence::validate() const {
    if (family == Family::BrownResnick) {
        if (!(gamma >= 0.0) || std::isnan(gamma)) throw DomainError("variogram value must be >= 0");
    } else {
        if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
        if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("degrees of freedom must be > 0");
    }
}

bool PairDependence::degenerate() const noexcept {
    return family == Family::BrownResnick ? gamma == 0.0 : rho == 1.0;
}

double V_br(double z1, double z2, double gamma) {
    check_z(z1, z2);
    if (!(gamma >= 0.0)) throw DomainError("variogram value must be >= 0");
    if (gamma == 0.0) return 1.0 / std::min(z1, z2);
    const double b = std::sqrt(2.0 * gamma);
    const double l = std::log(z1 / z2) / b;
    return norm_cdf(0.5 * b - l) / z1 + norm_cdf(0.5 * b + l) / z2;
}

double V_et(double z1, double z2, double rho, double nu) {
    check_z(z1, z2);
    PairDependence::et(rho, nu).validate();
    if (rho == 1.0) return 1.0 / std::min(z1, z2);
    const auto e = et_args(z1, z2, rho, nu);
    return student_cdf(e.x1, nu + 1.0) / z1 + student_cdf(e.x2, nu + 1.0) / z2;
}

double exponent(double z1, double z2, const PairDependence& pair) {
    return pair.family == Family::BrownResnick ? V_br(z1, z2, pair.gamma) : V_et(z1, z2, pair.rho, pair.nu);
}

ExponentDerivs exponent_derivs(double z1, double z2, const PairDependence& pair) {
    check_z(z1, z2);
    pair.validate();
    if (pair.degenerate()) throw DegenerateError("complete dependence has no bivariate density");
    const double iz1 = 1.0 / z1;
    const double iz2 = 1.0 / z2;
    if (pair.family == Family::BrownResnick) {
        const double b = std::sqrt(2.0 * pair.gamma);
        const double l = std::log(z1 / z2) / b;
        const double w1 = 0.5 * b - l;
        const double w2 = 0.5 * b + l;
        const double p1 = norm_cdf(w1);
        const double p2 = norm_cdf(w2);
        return {p1 * iz1 + p2 * iz2, -p1 * iz1 * iz1, -p2 * iz2 * iz2,
                std::isinf(b) ? 0.0 : -norm_pdf(w1) / b * iz2 * iz1 * iz1};
    }
    const double df = pair.nu + 1.0;
    const auto e = et_args(z1, z2, pair.rho, pair.nu);
    const double t1 = student_cdf(e.x1, df);
    const double t2 = student_cdf(e.x2, df);
    const double v12 = e.a == 0.0 ? 0.0 : -student_pdf(e.x1, df) * e.r1 / (e.a * pair.nu) * iz2 * iz1 * iz1;
    return {t1 * iz1 + t2 * iz2, -t1 * iz1 * iz1, -t2 * iz2 * iz2, v12};
}

double log_pair_density(double z1, double z2, const PairDependence& pair) {
    const auto d = exponent_derivs(z1, z2, pair);
    return -d.v + std::log(d.v1 * d.v2 - d.v12);
}

double pair_density(double z1, double z2, const PairDependence& pair) {
    const auto d = exponent_derivs(z1, z2, pair);
    return std::exp(-d.v) * (d.v1 * d.v2 - d.v12);
}

double theta_br(double gamma) {
    if (!(gamma >= 0.0)) throw DomainError("variogram value must be >= 0");
    return 2.0 * norm_cdf(std::sqrt(2.0 * gamma) / 2.0);
}

double theta_et(double rho, double nu) { return V_et(1.0, 1.0, rho, nu); }

double theta(const PairDependence& pair) {
    return pair.family == Family::BrownResnick ? theta_br(pair.gamma) : theta_et(pair.rho, pair.nu);
}

}  // namespace nsmax::bivariate
