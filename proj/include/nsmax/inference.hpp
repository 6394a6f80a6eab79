#pragma once

// Pairwise log-likelihood, staged Nelder-Mead fitting, TIC and parametric bootstrap.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsmax/core_types.hpp"
#include "nsmax/optimize.hpp"

namespace nsmax::inference {

// Complete-year data of every unordered site pair, prepared once per panel.
class PairwiseData {
public:
    PairwiseData(const BlockMaximaPanel& panel, const SiteSet& sites);

    std::size_t n_sites() const noexcept { return sites_.size(); }
    std::size_t n_blocks() const noexcept { return n_blocks_; }
    const SiteSet& sites() const noexcept { return sites_; }

    // Sum over years and ordered pairs i != j (each unordered pair counted twice).
    double loglik(const DependenceSpec& spec) const;
    // Same, with the per-year contributions written to `per_year` (length n_blocks).
    double loglik(const DependenceSpec& spec, std::span<double> per_year) const;

private:
    struct Pair {
        std::size_t i, j;
        std::vector<std::size_t> years;
        std::vector<double> z1, z2;
    };
    SiteSet sites_;
    std::size_t n_blocks_ = 0;
    std::vector<Pair> pairs_;
};

double pairwise_loglik(const BlockMaximaPanel& panel, const SiteSet& sites, const DependenceSpec& spec);

// Change of variables mapping a box interval onto the real line.
struct BoxTransform {
    double lo, hi;
    double to_free(double x) const;
    double from_free(double u) const;
};

struct Stage {
    std::string label;
    std::vector<std::string> free;     // empty = every non-fixed parameter
    std::vector<Structure> init_from;  // nested fits; best mapped start wins (first stage only)
    std::map<std::string, double> set; // values assigned before the stage starts
};

struct StagePlan {
    std::vector<Stage> stages;

    static StagePlan default_for(Family family, Structure structure);
    // Throws ValidationError unless the final stage frees everything and every name exists.
    void validate(const DependenceSpec& spec) const;
};

struct FitConfig {
    optimize::NelderMeadConfig nm;
    // Restarts are applied to the last stage only; earlier stages run once.
    bool restart_final_only = true;
};

// Maps a fitted nested model onto the starting point of `target` (shared names copied,
// extra parameters placed at their nesting values). Returns false when no mapping exists.
bool map_nested(const DependenceSpec& fitted, DependenceSpec& target);

// True when `small` is a special case of `large` for the default parameterizations.
bool is_nested(Structure small, Structure large);

// Caches fits per structure for one panel/site set/family so that staged plans reuse nested optima.
class FitSession {
public:
    FitSession(const BlockMaximaPanel& panel, const SiteSet& sites, Family family, FitConfig cfg = {});

    // Values applied to every spec fitted in the session and held fixed.
    void fix(const std::string& name, double value);
    const PairwiseData& data() const noexcept { return *data_; }

    // Default spec and default plan; nested fits are computed on demand and cached.
    const FitReport& fit(Structure structure);
    // Explicit start spec and plan. Not cached.
    FitReport fit(DependenceSpec start, const StagePlan& plan);

    std::optional<FitReport> cached(Structure s) const;

private:
    DependenceSpec prepare(DependenceSpec spec) const;

    std::shared_ptr<PairwiseData> data_;
    Family family_;
    FitConfig cfg_;
    std::map<std::string, double> fixed_;
    std::map<Structure, FitReport> cache_;
};

FitReport fit(const BlockMaximaPanel& panel, const SiteSet& sites, const DependenceSpec& spec,
              const StagePlan& plan, const FitConfig& cfg = {});

// Sandwich penalty tr(J H^-1) for any block-decomposed log-likelihood.
struct Sandwich {
    Eigen::MatrixXd hessian;    // H = -d2 l
    Eigen::MatrixXd score_cov;  // J = sum_m s_m s_m'
    double penalty = 0.0;
    double condition_number = 0.0;
    bool positive_definite = false;
    bool used_pseudo_inverse = false;
};

using BlockLoglik = std::function<double(std::span<const double> psi, std::span<double> per_block)>;

// Central differences with h_i = max(1e-5, 1e-4 |psi_i|), one-sided within h of a bound.
// Throws TICError when H is singular (condition number above 1e12) unless allow_pinv.
Sandwich sandwich(const BlockLoglik& f, std::span<const double> psi, std::size_t n_blocks,
                  std::span<const Interval> bounds = {}, bool allow_pinv = false);

// Fills tic, penalty, hessian and score_cov. Requires fitted.converged (else ValidationError).
double tic(const PairwiseData& data, FitReport& fitted, bool allow_pinv = false);
double tic(const BlockMaximaPanel& panel, const SiteSet& sites, FitReport& fitted, bool allow_pinv = false);

struct CompareRow {
    std::string model;
    double tic;
    double loglik;
    bool converged;
};

// Fits each structure in one session (nested fits shared) and computes TIC for each.
std::vector<CompareRow> compare(const BlockMaximaPanel& panel, const SiteSet& sites, Family family,
                                std::span<const Structure> structures, const FitConfig& cfg = {},
                                std::vector<FitReport>* reports = nullptr);

struct BootstrapRow {
    std::string parameter;
    double truth;
    double mean;
    std::optional<double> sd;  // absent for fewer than two usable replicates
};

struct BootstrapResult {
    std::vector<BootstrapRow> rows;
    std::size_t n_reps = 0;
    std::size_t n_failed = 0;  // non-converged, excluded
    std::vector<DependenceSpec> estimates;
};

// Simulates n_reps panels from `truth` on `sites`, refits each with the default plan of
// truth's structure (fixed parameters stay fixed). Throws BootstrapError when more than
// half the replicates fail to converge.
BootstrapResult bootstrap(const DependenceSpec& truth, const SiteSet& sites, std::size_t n_years,
                          std::size_t n_reps, std::uint64_t seed, const FitConfig& cfg = {},
                          const std::function<void(std::size_t, const FitSession&)>& on_rep = {});

}  // namespace nsmax::inference
