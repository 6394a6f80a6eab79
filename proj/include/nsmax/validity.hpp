#pragma once

// Monte-Carlo certification of conditional negative definiteness (variograms)
// and positive semi-definiteness (correlations).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "nsmax/core_types.hpp"
#include "nsmax/rng.hpp"

namespace nsmax::validity {

inline constexpr double kRelTol = 1e-8;

struct DefinitenessReport {
    bool conditional = true;  // CND check (variogram) vs PSD check (correlation)
    std::size_t n_trials = 0;
    double min_eigenvalue = 0.0;
    // CND: max of a' G a over zero-sum unit contrasts. PSD: min of a' R a over unit vectors.
    double worst_contrast_value = 0.0;
    bool passed = true;
    // Trials where the eigen route and the contrast route disagreed on pass/fail.
    std::size_t route_disagreements = 0;
    std::optional<nlohmann::json> failing_config;

    nlohmann::json to_json() const;
};

// Kernel value for sites i, j of a draw (diagonal included).
using PairKernel = std::function<double(const SiteSet&, std::size_t, std::size_t)>;
using SiteGenerator = std::function<SiteSet(std::size_t, Engine&)>;

// Uniform on [0, 300]^2 km with one altitude covariate uniform on [0, 1.5] km.
SiteSet default_site_generator(std::size_t n, Engine& rng);

DefinitenessReport check_cnd(const PairKernel& vario, const SiteGenerator& gen, std::size_t n_sites,
                             std::size_t n_trials, std::uint64_t seed, std::size_t n_contrasts = 64);
DefinitenessReport check_psd(const PairKernel& corr, const SiteGenerator& gen, std::size_t n_sites,
                             std::size_t n_trials, std::uint64_t seed, std::size_t n_contrasts = 64);

// CND for BR specs, PSD for ET specs, evaluated through models::pair_matrix.
DefinitenessReport check_spec(const DependenceSpec& spec, std::size_t n_sites, std::size_t n_trials,
                              std::uint64_t seed, const SiteGenerator& gen = default_site_generator);

// Parameters drawn uniformly inside the default bounds.
DependenceSpec random_spec(Family family, Structure structure, Engine& rng);

// Merge of per-draw reports: worst values, summed counts, first failure kept.
void merge_into(DefinitenessReport& acc, const DefinitenessReport& r);

}  // namespace nsmax::validity
