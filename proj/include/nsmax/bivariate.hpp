#pragma once

// Bivariate exponent functions, their partial derivatives, pair densities,
// extremal coefficients and tail dependence for Brown-Resnick and extremal-t.

#include "nsmax/core_types.hpp"

namespace nsmax::bivariate {

double norm_cdf(double x);
double norm_pdf(double x);
// Student-t with non-integer degrees of freedom, via the regularized incomplete beta.
double student_cdf(double x, double df);
double student_pdf(double x, double df);

struct PairDependence {
    Family family = Family::BrownResnick;
    double gamma = 0.0;  // BR variogram value
    double rho = 0.0;    // ET correlation
    double nu = 1.0;     // ET degrees of freedom

    static PairDependence br(double gamma) { return {Family::BrownResnick, gamma, 0.0, 1.0}; }
    static PairDependence et(double rho, double nu) { return {Family::ExtremalT, 0.0, rho, nu}; }

    // Throws DomainError on gamma < 0, rho outside [-1, 1], nu <= 0 or non-finite fields.
    void validate() const;
    bool degenerate() const noexcept;
};

// V and its derivatives d/dz1, d/dz2, d2/dz1dz2.
struct ExponentDerivs {
    double v;
    double v1;
    double v2;
    double v12;
};

double V_br(double z1, double z2, double gamma);
double V_et(double z1, double z2, double rho, double nu);
double exponent(double z1, double z2, const PairDependence& pair);

// Throws DegenerateError for gamma = 0 / rho = 1.
ExponentDerivs exponent_derivs(double z1, double z2, const PairDependence& pair);

// exp(-V) (V1 V2 - V12)
double pair_density(double z1, double z2, const PairDependence& pair);
double log_pair_density(double z1, double z2, const PairDependence& pair);

double theta_br(double gamma);
double theta_et(double rho, double nu);
double theta(const PairDependence& pair);
inline double chi_pair(double theta) { return 2.0 - theta; }

}  // namespace nsmax::bivariate
