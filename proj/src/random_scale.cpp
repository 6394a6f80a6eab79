#include "nsmax/random_scale.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nsmax/errors.hpp"
#include "nsmax/io.hpp"
#include "nsmax/rng.hpp"
#include "nsmax/simd/kernels.hpp"
#include "nsmax/simulation.hpp"

namespace nsmax::random_scale {

Sample simulate_random_scale(double alpha, const PairVarioRule& rule, std::size_t n, std::uint64_t seed) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("Pareto index must be positive");
    Sample s;
    s.z1.resize(n);
    s.z2.resize(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t b = 0; b * kBlock < n; ++b) {
        Engine rng = make_engine(seed, b);
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t t = b * kBlock; t < end; ++t) {
            // 1 - U lies in (0, 1], keeping Y finite.
            const double y1 = std::pow(1.0 - unif(rng), -1.0 / alpha);
            const double y2 = std::pow(1.0 - unif(rng), -1.0 / alpha);
            const auto [a, c] = simulation::br_pair(rule(y1, y2), rng);
            s.z1[t] = y1 * a;
            s.z2[t] = y2 * c;
        }
    }
    return s;
}

namespace {

double upper_quantile(std::vector<double> x, double p) {
    const std::size_t n = x.size();
    const auto k = static_cast<std::size_t>(std::clamp(std::ceil(p * static_cast<double>(n)), 1.0,
                                                       static_cast<double>(n))) - 1;
    std::nth_element(x.begin(), x.begin() + static_cast<long>(k), x.end());
    return x[k];
}

}  // namespace

ChiCurve empirical_chi(const Sample& sample, std::span<const double> thresholds) {
    if (sample.z1.size() != sample.z2.size()) throw ValidationError("sample columns differ in length");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) throw ValidationError("thresholds must lie in (0, 1)");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) throw ValidationError("thresholds must increase");
    }
    ChiCurve c;
    c.n = sample.size();
    c.thresholds.assign(thresholds.begin(), thresholds.end());
    const auto& kt = simd::active();
    for (double p : thresholds) {
        if (c.n == 0) {
            c.chi_hat.emplace_back();
            c.n_exceed.push_back(0);
            continue;
        }
        const double q1 = upper_quantile(sample.z1, p);
        const double q2 = upper_quantile(sample.z2, p);
        std::size_t n1 = 0;
        const std::size_t both = kt.count_joint_exceed(sample.z1.data(), sample.z2.data(), c.n, q1, q2, &n1);
        c.n_exceed.push_back(n1);
        if (n1 == 0)
            c.chi_hat.emplace_back();
        else
            c.chi_hat.emplace_back(static_cast<double>(both) / static_cast<double>(n1));
    }
    return c;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Thm51: return "thm51";
        case Regime::Thm52: return "thm52";
        case Regime::Thm53: return "thm53";
    }
    return "";
}

Regime regime_from_string(const std::string& s) {
    if (s == "thm51") return Regime::Thm51;
    if (s == "thm52") return Regime::Thm52;
    if (s == "thm53") return Regime::Thm53;
    throw ValidationError("unknown regime '" + s + "' (expected thm51, thm52 or thm53)");
}

RegimeConfig default_config(Regime r) {
    RegimeConfig cfg;
    switch (r) {
        case Regime::Thm51: cfg.alpha = 0.5; break;
        case Regime::Thm52: cfg.alpha = 2.0; break;
        case Regime::Thm53: cfg.alpha = 1.0; break;
    }
    return cfg;
}

PairVarioRule rule_for(Regime r, const RegimeConfig& cfg) {
    if (r == Regime::Thm53) {
        return [c = cfg.c, kappa = cfg.kappa, eps = cfg.eps](double y1, double y2) {
            return c * std::pow(std::abs(y1 - y2), kappa) + eps;
        };
    }
    return [g = cfg.gamma](double, double) { return g; };
}

std::string verdict(const ChiCurve& curve) {
    if (curve.chi_hat.empty() || !curve.chi_hat.front() || !curve.chi_hat.back()) return "inconclusive";
    const double lo = *curve.chi_hat.front();
    const double hi = *curve.chi_hat.back();
    if (hi < 0.5 * lo && hi < kChiFloor) return "decreasing-to-zero";
    if (hi > kChiFloor) return "bounded-away";
    return "inconclusive";
}

RegimeResult regime_experiment(Regime r, const RegimeConfig& cfg, std::uint64_t seed) {
    if (cfg.thresholds.empty()) throw ValidationError("threshold grid is empty");
    const auto rule = rule_for(r, cfg);
    std::size_t n = cfg.n;
    while (true) {
        const auto sample = simulate_random_scale(cfg.alpha, rule, n, seed);
        auto curve = empirical_chi(sample, cfg.thresholds);
        curve.regime = to_string(r);
        if (curve.n_exceed.back() >= cfg.min_top_exceedances) {
            auto v = verdict(curve);
            return {std::move(curve), std::move(v)};
        }
        if (2 * n > cfg.max_n)
            throw InsufficientDataError("too few exceedances at the top threshold even at the maximum sample size");
        n *= 2;
        log_note("too few exceedances at the top threshold; widening the sample to " + std::to_string(n));
    }
}

void write_chi_csv(std::ostream& os, const ChiCurve& curve) {
    os << "p,chi_hat,n_exceed\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        os << io::format_double(curve.thresholds[i]) << ','
           << (curve.chi_hat[i] ? io::format_double(*curve.chi_hat[i]) : std::string("NA")) << ','
           << curve.n_exceed[i] << '\n';
    }
}

}  // namespace nsmax::random_scale
