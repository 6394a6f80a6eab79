#pragma once

// Site-wise GEV margins, the unit-Frechet transform and rank-based
// extremal-coefficient diagnostics.

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nsmax/core_types.hpp"

namespace nsmax::empirical {

struct GevParams {
    double xi = 0.0;
    double mu = 0.0;
    double sigma = 1.0;

    double cdf(double z) const;
    // -log G(z); +inf below the lower endpoint, 0 above the upper endpoint.
    double neg_log_cdf(double z) const;
};

inline constexpr double kGumbelBranch = 1e-6;
inline constexpr std::size_t kMinGevSample = 20;
inline constexpr std::size_t kMinPairs = 10;

double gev_negloglik(std::span<const double> sample, const GevParams& p);

// Maximum likelihood; throws InsufficientDataError below 20 observations and
// MarginFitError (tagged with site_id) for degenerate samples or non-convergence.
GevParams gev_fit(std::span<const double> sample, const std::string& site_id = "");

// One fit per column of a raw panel.
std::vector<GevParams> fit_margins(const BlockMaximaPanel& panel, const std::vector<std::string>& ids = {});

// z -> -1/log G(z) per site. Values outside the support are clipped to the nearest
// representable probability with a warning.
BlockMaximaPanel to_unit_frechet(const BlockMaximaPanel& raw, std::span<const GevParams> margins);

// Ranks / (n+1), ties broken by order of appearance.
std::vector<double> pseudo_uniform(std::span<const double> x);

inline constexpr double kThetaClipTol = 0.5;

// F-madogram estimate on complete pairs; clipped to [1, 2.5].
double empirical_theta_fmad(std::span<const double> col_i, std::span<const double> col_j);

struct ThetaRow {
    std::size_t i, j;
    double distance;
    double theta_empirical;
    std::vector<double> theta_model;
};

// One row per site pair (complete years only); model columns use each pair's own covariates.
std::vector<ThetaRow> theta_vs_distance(const BlockMaximaPanel& panel, const SiteSet& sites,
                                        std::span<const DependenceSpec> specs);

void write_theta_csv(std::ostream& os, const std::vector<ThetaRow>& rows, const SiteSet& sites,
                     std::span<const std::string> model_labels);

}  // namespace nsmax::empirical
