#pragma once

// Exact simulation of Brown-Resnick and extremal-t vectors at finitely many
// sites with the extremal-functions algorithm.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "nsmax/core_types.hpp"
#include "nsmax/rng.hpp"

namespace nsmax::simulation {

inline constexpr std::size_t kMaxArrivalsPerAnchor = 1'000'000;
inline constexpr std::size_t kMaxGridNodes = 10'000;

// Draws extremal functions anchored at any site for a fixed dependence matrix
// (variogram with zero diagonal for BR, correlation with unit diagonal for ET).
class ExtremalFunctionSampler {
public:
    ExtremalFunctionSampler(const SiteSet& sites, const DependenceSpec& spec);
    ExtremalFunctionSampler(Family family, Eigen::MatrixXd dependence, double nu = 1.0);

    std::size_t size() const noexcept { return k_; }
    const Eigen::MatrixXd& dependence() const noexcept { return dep_; }

    // Extremal function with w[anchor] == 1.
    void draw(std::size_t anchor, Engine& rng, std::span<double> w) const;
    // One exact replicate with unit Frechet margins.
    void sample(Engine& rng, std::span<double> z) const;

private:
    void factorize();

    Family family_;
    std::size_t k_;
    double nu_;
    Eigen::MatrixXd dep_;
    Eigen::MatrixXd factor_;  // BR: k-1 columns for sites 1..k-1 relative to site 0; ET: k x k
};

// n_reps x k panel, replicate r drawn from an engine seeded by derive_seed(seed, r).
BlockMaximaPanel simulate_exact(const SiteSet& sites, const DependenceSpec& spec, std::size_t n_reps,
                                std::uint64_t seed);

struct GridSpec {
    double x0, x1, y0, y1;
    std::size_t nx, ny;
    std::size_t size() const noexcept { return nx * ny; }
};

// "grid:x0,x1,y0,y1,nx,ny"
GridSpec parse_grid(const std::string& text);

// Row-major nodes (x fastest). Covariates by inverse-distance weighting (power 2) from
// `source` when it carries covariates, otherwise a single zero covariate.
SiteSet grid_sites(const GridSpec& grid, const SiteSet* source = nullptr);

struct GridField {
    GridSpec grid;
    SiteSet sites;
    BlockMaximaPanel panel;
};

// Throws ResourceError above kMaxGridNodes nodes.
GridField simulate_field_grid(const GridSpec& grid, const DependenceSpec& spec, std::size_t n_reps,
                              std::uint64_t seed, const SiteSet* covariate_source = nullptr);

// Long format: rep,ix,iy,x,y,covariate,z
void write_grid_csv(std::ostream& os, const GridField& field);

// Exact bivariate Brown-Resnick draw for a single variogram value.
std::pair<double, double> br_pair(double gamma, Engine& rng);

}  // namespace nsmax::simulation
