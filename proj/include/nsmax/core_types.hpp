#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nsmax {

// Station coordinates (km) and aligned covariate vectors (altitude in km).
// Immutable once constructed.
class SiteSet {
public:
    SiteSet() = default;
    // coords: k rows of d values; covariates: k rows of p values (p may be 0).
    SiteSet(std::vector<std::vector<double>> coords, std::vector<std::vector<double>> covariates,
            std::vector<std::string> ids = {});

    std::size_t size() const noexcept { return k_; }
    std::size_t dim() const noexcept { return d_; }
    std::size_t n_covariates() const noexcept { return p_; }

    std::span<const double> coord(std::size_t i) const { return {coords_.data() + i * d_, d_}; }
    std::span<const double> covariate(std::size_t i) const { return {covs_.data() + i * p_, p_}; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    double distance(std::size_t i, std::size_t j) const;

    // Reorders sites; perm[new] = old.
    SiteSet permuted(std::span<const std::size_t> perm) const;

private:
    std::size_t k_ = 0, d_ = 0, p_ = 0;
    std::vector<double> coords_;
    std::vector<double> covs_;
    std::vector<std::string> ids_;
};

enum class MarginState { Raw, UnitFrechet };

// n blocks (years) x k sites of block maxima with a missing mask.
class BlockMaximaPanel {
public:
    BlockMaximaPanel() = default;
    BlockMaximaPanel(Eigen::MatrixXd values, MarginState state,
                     Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing = {},
                     std::vector<long> years = {});

    std::size_t n_blocks() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n_sites() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    MarginState state() const noexcept { return state_; }

    double value(std::size_t m, std::size_t i) const { return values_(m, i); }
    bool missing(std::size_t m, std::size_t i) const { return missing_(m, i); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& missing_mask() const noexcept {
        return missing_;
    }
    const std::vector<long>& years() const noexcept { return years_; }

    // Non-missing entries of one column.
    std::vector<double> column(std::size_t i) const;

    BlockMaximaPanel with_values(Eigen::MatrixXd values, MarginState state) const;
    BlockMaximaPanel permuted_sites(std::span<const std::size_t> perm) const;
    BlockMaximaPanel permuted_blocks(std::span<const std::size_t> perm) const;

private:
    Eigen::MatrixXd values_;
    MarginState state_ = MarginState::Raw;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing_;
    std::vector<long> years_;
};

enum class Family { BrownResnick, ExtremalT };
enum class Structure { Iso, Aniso, M1, M2, M3, MBD, MHG };

std::string to_string(Family f);
std::string to_string(Structure s);
Family family_from_string(const std::string& s);
Structure structure_from_string(const std::string& s);

struct Interval {
    double lo;
    double hi;
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

// Model family, structure and a named parameter vector with box bounds.
class DependenceSpec {
public:
    DependenceSpec() = default;
    // Builds a spec with default starting values and bounds for the structure.
    DependenceSpec(Family family, Structure structure);

    Family family() const noexcept { return family_; }
    Structure structure() const noexcept { return structure_; }

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }
    std::size_t size() const noexcept { return names_.size(); }

    bool has(const std::string& name) const;
    std::size_t index(const std::string& name) const;
    double get(const std::string& name) const { return values_[index(name)]; }
    void set(const std::string& name, double value) { values_[index(name)] = value; }
    void set_value(std::size_t i, double value) { values_[i] = value; }
    void set_bounds(const std::string& name, Interval b) { bounds_[index(name)] = b; }

    bool is_fixed(const std::string& name) const { return fixed_[index(name)]; }
    void set_fixed(const std::string& name, bool fixed = true) { fixed_[index(name)] = fixed; }
    // Names of parameters not held fixed, in declaration order.
    std::vector<std::string> free_names() const;

    // Throws ValidationError / BoundsError.
    void validate() const;

private:
    Family family_ = Family::BrownResnick;
    Structure structure_ = Structure::Iso;
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<Interval> bounds_;
    std::vector<bool> fixed_;
};

// Parameter names for a (family, structure) pair, in canonical order.
std::vector<std::string> parameter_names(Family f, Structure s);

struct StageRecord {
    std::string label;
    double initial_loglik;
    double loglik;
};

struct NestedRecord {
    Structure structure;
    double loglik;
};

struct FitReport {
    DependenceSpec spec;
    double loglik = 0.0;
    double tic = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::size_t evaluations = 0;
    std::vector<StageRecord> stage_trace;
    std::vector<NestedRecord> nested;  // fits used as starting points
    std::vector<std::string> free_names;  // row/column labels of the matrices below
    Eigen::MatrixXd score_cov;
    Eigen::MatrixXd hessian;
    double penalty = std::numeric_limits<double>::quiet_NaN();  // tr(J H^-1)
};

}  // namespace nsmax
