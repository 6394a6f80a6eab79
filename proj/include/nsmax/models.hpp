#pragma once

// Variogram and correlation kernels: stationary power/powered-exponential
// families, the covariate-augmented constructions, the Paciorek-Schervish
// style correlation with spatially varying ellipses, and nugget wrappers.
//
// Variograms feed Brown-Resnick models, correlations feed extremal-t models.
// Every kernel here is a pure function of its arguments.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nsmax/core_types.hpp"

namespace nsmax::models {

using Vec = std::span<const double>;

// diag(q1, q2) * R(theta), R the rotation [[cos, sin], [-sin, cos]].
struct Anisotropy2D {
    double q1 = 1.0;
    double q2 = 1.0;
    double theta = 0.0;

    Eigen::Matrix2d matrix() const;
    void validate() const;
};

double vario_iso(Vec x, Vec y, double q, double alpha0);
double corr_iso(Vec x, Vec y, double q, double alpha0);
double vario_aniso(Vec x, Vec y, const Anisotropy2D& a, double alpha0);
double corr_aniso(Vec x, Vec y, const Anisotropy2D& a, double alpha0);

// One covariate block ||A_j (c(x)_I - c(y)_I)||^alpha_j.
struct CovariateTerm {
    std::vector<std::size_t> index;
    Eigen::MatrixXd scale;  // |I| x |I|
    double alpha = 1.0;
};

bool index_sets_disjoint(std::span<const CovariateTerm> terms);

// Spatial block plus covariate blocks, optionally raised to beta and passed
// through the bounded/unbounded transform. Non-disjoint index sets are legal
// but unidentifiable; the constructor logs a warning for them.
class CovariateVariogram {
public:
    CovariateVariogram(Eigen::MatrixXd a0, double alpha0, std::vector<CovariateTerm> terms, double beta);

    // ||A0 (x-y)||^alpha0 + sum_j ||A_j (cx_I - cy_I)||^alpha_j
    double inner(Vec x, Vec y, Vec cx, Vec cy) const;
    // inner^beta
    double operator()(Vec x, Vec y, Vec cx, Vec cy) const;
    // ((1 + inner^beta)^(alpha/beta) - 1) / (2^(alpha/beta) - 1)
    double bounded(Vec x, Vec y, Vec cx, Vec cy, double alpha) const;

    double beta() const noexcept { return beta_; }

private:
    Eigen::MatrixXd a0_;
    double alpha0_;
    std::vector<CovariateTerm> terms_;
    double beta_;
};

// ((1 + g^beta)^(alpha/beta) - 1) / (2^(alpha/beta) - 1); log2(1 + g^beta) for |alpha/beta| < 1e-8.
double bounded_transform(double g, double beta, double alpha);

// Single-covariate variants on R^2 with the anisotropic spatial block.
double vario_m1(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0);
double vario_m2(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0,
                double alpha1, double beta);
double vario_m3(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double alpha0,
                double alpha1, double beta, double alpha);
// M2 with alpha0 = alpha1 = 2.
double vario_mbd(Vec x, Vec y, double cx, double cy, const Anisotropy2D& a0, double q3, double beta);

// Link coefficients for omega_x, omega_y (log links, km) and delta (tanh link)
// as functions of a scalar covariate.
struct EllipseLinks {
    double wx_a = 0.0, wx_b = 0.0;
    double wy_a = 0.0, wy_b = 0.0;
    double delta_a = 0.0, delta_b = 0.0;

    Eigen::Matrix2d omega(double covariate) const;
};

// |Ox|^1/4 |Oy|^1/4 |(Ox+Oy)/2|^-1/2 exp(-Q^(alpha/2)), Q = h' ((Ox+Oy)/2)^-1 h.
double corr_hg(Vec x, Vec y, double cx, double cy, const EllipseLinks& links, double alpha);

double corr_from_vario(double gamma_tilde);
double add_nugget_vario(double gamma_tilde, double nugget, bool same_location);
double add_nugget_corr(double rho_tilde, double nugget, bool same_location);

// Flattened parameter block for fast kernel evaluation.
struct KernelParams {
    Family family = Family::BrownResnick;
    Structure structure = Structure::Iso;
    double nu = 0.0;
    double nugget = 0.0;
    double q = 0.0;
    Anisotropy2D a0;
    double q3 = 0.0;
    double alpha0 = 1.0, alpha1 = 1.0, beta = 1.0, alpha = 1.0;
    EllipseLinks links;

    static KernelParams from_spec(const DependenceSpec& spec);
    // Spatial matrix A0 (q*I for the isotropic structure).
    Eigen::Matrix2d spatial_matrix() const;
};

// Continuous variogram part for every structure except M_HG.
double tilde_vario(const KernelParams& p, Vec x, Vec y, double cx, double cy);
// Continuous correlation part: exp(-tilde_vario) or the ellipse construction for M_HG.
double tilde_corr(const KernelParams& p, Vec x, Vec y, double cx, double cy);

// gamma (BR) or rho (ET) between sites i and j including the nugget.
double pair_value(const KernelParams& p, const SiteSet& sites, std::size_t i, std::size_t j);

// Symmetric k x k matrix of pair_value; spatial norms go through the SIMD kernels.
Eigen::MatrixXd pair_matrix(const KernelParams& p, const SiteSet& sites);
inline Eigen::MatrixXd pair_matrix(const DependenceSpec& spec, const SiteSet& sites) {
    return pair_matrix(KernelParams::from_spec(spec), sites);
}

// Throws ValidationError when the site set cannot carry the structure (d != 2, missing covariate).
void check_sites_for(Structure s, const SiteSet& sites);

}  // namespace nsmax::models
