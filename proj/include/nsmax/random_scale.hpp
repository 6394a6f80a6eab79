#pragma once

// Random-scale construction Z = Y * Z_Y at two sites: Y has independent
// alpha-Pareto components and Z_Y is a Brown-Resnick pair whose variogram may
// depend on Y. Empirical tail-dependence curves exhibit asymptotic
// (in)dependence regimes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace nsmax::random_scale {

struct Sample {
    std::vector<double> z1, z2;
    std::size_t size() const noexcept { return z1.size(); }
};

// Maps (y1, y2) to the variogram value of the conditional pair.
using PairVarioRule = std::function<double(double, double)>;

// Draws are generated in blocks of kBlock, block b from derive_seed(seed, b), so a
// larger n extends a smaller sample with the same seed.
inline constexpr std::size_t kBlock = 1u << 16;

Sample simulate_random_scale(double alpha, const PairVarioRule& rule, std::size_t n, std::uint64_t seed);

struct ChiCurve {
    std::vector<double> thresholds;
    std::vector<std::optional<double>> chi_hat;  // absent without exceedances in column 1
    std::vector<std::size_t> n_exceed;           // column-1 exceedances
    std::size_t n = 0;
    std::string regime;
};

// chi_hat(p) = #{both columns above their empirical p-quantiles} / #{column 1 above}.
ChiCurve empirical_chi(const Sample& sample, std::span<const double> thresholds);

enum class Regime { Thm51, Thm52, Thm53 };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct RegimeConfig {
    double alpha = 1.0;
    double gamma = 1.0;   // constant conditional variogram (Thm51, Thm52)
    double c = 1.0;       // Thm53: gamma = c |y1 - y2|^kappa + eps
    double kappa = 2.0;
    double eps = 1e-6;
    std::size_t n = 1'000'000;
    std::size_t max_n = 10'000'000;
    std::size_t min_top_exceedances = 100;
    std::vector<double> thresholds{0.9, 0.95, 0.99, 0.995, 0.999};
};

RegimeConfig default_config(Regime r);
PairVarioRule rule_for(Regime r, const RegimeConfig& cfg);

inline constexpr double kChiFloor = 0.05;

// "decreasing-to-zero" when chi_hat(top) < chi_hat(bottom)/2 and chi_hat(top) < 0.05,
// "bounded-away" when chi_hat(top) > 0.05, otherwise "inconclusive".
std::string verdict(const ChiCurve& curve);

struct RegimeResult {
    ChiCurve curve;
    std::string verdict;
};

// Doubles n (with a note) while the top threshold has fewer than min_top_exceedances
// exceedances; InsufficientDataError once n would pass max_n.
RegimeResult regime_experiment(Regime r, const RegimeConfig& cfg, std::uint64_t seed);

void write_chi_csv(std::ostream& os, const ChiCurve& curve);

}  // namespace nsmax::random_scale
