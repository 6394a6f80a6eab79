#include "nsmax/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <set>

#include "nsmax/errors.hpp"

namespace nsmax {

void log_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }
void log_note(const std::string& msg) { std::cerr << "note: " << msg << '\n'; }

SiteSet::SiteSet(std::vector<std::vector<double>> coords, std::vector<std::vector<double>> covariates,
                 std::vector<std::string> ids) {
    if (coords.empty()) throw ValidationError("site set must contain at least one site");
    if (covariates.empty()) covariates.assign(coords.size(), {});
    if (coords.size() != covariates.size())
        throw ValidationError("coordinates and covariates differ in length");
    k_ = coords.size();
    d_ = coords.front().size();
    p_ = covariates.front().size();
    if (d_ == 0) throw ValidationError("coordinates must have at least one dimension");
    coords_.reserve(k_ * d_);
    covs_.reserve(k_ * p_);
    for (std::size_t i = 0; i < k_; ++i) {
        if (coords[i].size() != d_ || covariates[i].size() != p_)
            throw ValidationError("ragged coordinate or covariate rows");
        for (double v : coords[i]) {
            if (!std::isfinite(v)) throw ValidationError("non-finite coordinate");
            coords_.push_back(v);
        }
        for (double v : covariates[i]) {
            if (!std::isfinite(v)) throw ValidationError("non-finite covariate");
            covs_.push_back(v);
        }
    }
    if (ids.empty()) {
        for (std::size_t i = 0; i < k_; ++i) ids.push_back(std::to_string(i + 1));
    }
    if (ids.size() != k_) throw ValidationError("site id count does not match site count");
    ids_ = std::move(ids);

    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < k_; ++i) {
        if (!seen.insert(coords[i]).second)
            throw ValidationError("duplicate site coordinates at site " + ids_[i]);
    }
}

double SiteSet::distance(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t r = 0; r < d_; ++r) {
        const double h = coords_[i * d_ + r] - coords_[j * d_ + r];
        s += h * h;
    }
    return std::sqrt(s);
}

SiteSet SiteSet::permuted(std::span<const std::size_t> perm) const {
    std::vector<std::vector<double>> c, v;
    std::vector<std::string> ids;
    for (std::size_t i : perm) {
        auto ci = coord(i);
        auto vi = covariate(i);
        c.emplace_back(ci.begin(), ci.end());
        v.emplace_back(vi.begin(), vi.end());
        ids.push_back(ids_[i]);
    }
    return SiteSet(std::move(c), std::move(v), std::move(ids));
}

BlockMaximaPanel::BlockMaximaPanel(Eigen::MatrixXd values, MarginState state,
                                   Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing,
                                   std::vector<long> years)
    : values_(std::move(values)), state_(state), missing_(std::move(missing)), years_(std::move(years)) {
    const auto n = values_.rows();
    const auto k = values_.cols();
    if (missing_.size() == 0) missing_.setConstant(n, k, false);
    if (missing_.rows() != n || missing_.cols() != k)
        throw ValidationError("missing mask shape does not match values");
    if (n < 2) throw ValidationError("panel needs at least two blocks");
    if (years_.empty()) {
        for (long m = 0; m < n; ++m) years_.push_back(m + 1);
    }
    if (static_cast<long>(years_.size()) != n) throw ValidationError("year labels do not match rows");
    for (long m = 0; m < n; ++m) {
        for (long i = 0; i < k; ++i) {
            if (missing_(m, i)) continue;
            const double v = values_(m, i);
            if (!std::isfinite(v)) throw ValidationError("non-finite panel value");
            if (state_ == MarginState::UnitFrechet && !(v > 0.0))
                throw ValidationError("unit-Frechet panel values must be strictly positive");
        }
    }
}

std::vector<double> BlockMaximaPanel::column(std::size_t i) const {
    std::vector<double> out;
    out.reserve(n_blocks());
    for (std::size_t m = 0; m < n_blocks(); ++m)
        if (!missing_(m, i)) out.push_back(values_(m, i));
    return out;
}

BlockMaximaPanel BlockMaximaPanel::with_values(Eigen::MatrixXd values, MarginState state) const {
    return BlockMaximaPanel(std::move(values), state, missing_, years_);
}

BlockMaximaPanel BlockMaximaPanel::permuted_sites(std::span<const std::size_t> perm) const {
    Eigen::MatrixXd v(values_.rows(), static_cast<long>(perm.size()));
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mk(values_.rows(), static_cast<long>(perm.size()));
    for (std::size_t c = 0; c < perm.size(); ++c) {
        v.col(static_cast<long>(c)) = values_.col(static_cast<long>(perm[c]));
        mk.col(static_cast<long>(c)) = missing_.col(static_cast<long>(perm[c]));
    }
    return BlockMaximaPanel(std::move(v), state_, std::move(mk), years_);
}

BlockMaximaPanel BlockMaximaPanel::permuted_blocks(std::span<const std::size_t> perm) const {
    Eigen::MatrixXd v(static_cast<long>(perm.size()), values_.cols());
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mk(static_cast<long>(perm.size()), values_.cols());
    std::vector<long> years;
    for (std::size_t r = 0; r < perm.size(); ++r) {
        v.row(static_cast<long>(r)) = values_.row(static_cast<long>(perm[r]));
        mk.row(static_cast<long>(r)) = missing_.row(static_cast<long>(perm[r]));
        years.push_back(years_[perm[r]]);
    }
    return BlockMaximaPanel(std::move(v), state_, std::move(mk), std::move(years));
}

std::string to_string(Family f) { return f == Family::BrownResnick ? "BR" : "ET"; }

std::string to_string(Structure s) {
    switch (s) {
        case Structure::Iso: return "iso";
        case Structure::Aniso: return "aniso";
        case Structure::M1: return "M1";
        case Structure::M2: return "M2";
        case Structure::M3: return "M3";
        case Structure::MBD: return "M_BD";
        case Structure::MHG: return "M_HG";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "BR" || s == "BrownResnick") return Family::BrownResnick;
    if (s == "ET" || s == "ExtremalT") return Family::ExtremalT;
    throw ValidationError("unknown model family '" + s + "'");
}

Structure structure_from_string(const std::string& s) {
    if (s == "iso" || s == "Iso") return Structure::Iso;
    if (s == "aniso" || s == "Aniso") return Structure::Aniso;
    if (s == "M1") return Structure::M1;
    if (s == "M2") return Structure::M2;
    if (s == "M3") return Structure::M3;
    if (s == "M_BD" || s == "MBD") return Structure::MBD;
    if (s == "M_HG" || s == "MHG") return Structure::MHG;
    throw ValidationError("unknown dependence structure '" + s + "'");
}

namespace {

struct ParamDefault {
    double start;
    Interval bounds;
};

ParamDefault default_for(const std::string& name, Family f) {
    constexpr double quarter_pi = std::numbers::pi / 4.0;
    if (name == "nu") return {3.0, {0.1, 50.0}};
    if (name == "nugget") return f == Family::ExtremalT ? ParamDefault{0.1, {0.0, 1.0}}
                                                        : ParamDefault{0.1, {0.0, 20.0}};
    if (name == "q" || name == "q1" || name == "q2") return {0.01, {1e-6, 100.0}};
    if (name == "theta") return {0.0, {-quarter_pi, quarter_pi}};
    if (name == "q3") return {0.5, {0.0, 50.0}};
    if (name == "alpha0" || name == "alpha1") return {1.0, {1e-3, 2.0}};
    if (name == "beta") return {0.9, {1e-3, 1.0}};
    if (name == "alpha") return {0.5, {-20.0, 1.0}};
    if (name == "wx_a" || name == "wy_a") return {std::log(100.0), {-5.0, 12.0}};
    if (name == "wx_b" || name == "wy_b") return {0.0, {-10.0, 10.0}};
    if (name == "delta_a" || name == "delta_b") return {0.0, {-5.0, 5.0}};
    throw ValidationError("no default for parameter '" + name + "'");
}

}  // namespace

std::vector<std::string> parameter_names(Family f, Structure s) {
    std::vector<std::string> names;
    if (f == Family::ExtremalT) names.push_back("nu");
    switch (s) {
        case Structure::Iso: names.insert(names.end(), {"q", "alpha0"}); break;
        case Structure::Aniso: names.insert(names.end(), {"q1", "q2", "theta", "alpha0"}); break;
        case Structure::M1: names.insert(names.end(), {"q1", "q2", "theta", "q3", "alpha0"}); break;
        case Structure::M2:
            names.insert(names.end(), {"q1", "q2", "theta", "q3", "alpha0", "alpha1", "beta"});
            break;
        case Structure::M3:
            names.insert(names.end(), {"q1", "q2", "theta", "q3", "alpha0", "alpha1", "beta", "alpha"});
            break;
        case Structure::MBD: names.insert(names.end(), {"q1", "q2", "theta", "q3", "beta"}); break;
        case Structure::MHG:
            if (f != Family::ExtremalT)
                throw ValidationError("M_HG is a correlation construction; only ET supports it");
            names.insert(names.end(), {"wx_a", "wx_b", "wy_a", "wy_b", "delta_a", "delta_b", "alpha0"});
            break;
    }
    names.push_back("nugget");
    return names;
}

DependenceSpec::DependenceSpec(Family family, Structure structure)
    : family_(family), structure_(structure), names_(parameter_names(family, structure)) {
    for (const auto& n : names_) {
        const auto d = default_for(n, family);
        values_.push_back(d.start);
        bounds_.push_back(d.bounds);
    }
    fixed_.assign(names_.size(), false);
}

bool DependenceSpec::has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t DependenceSpec::index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw ValidationError("parameter '" + name + "' not part of " + to_string(family_) + "-" +
                              to_string(structure_));
    return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::string> DependenceSpec::free_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (!fixed_[i]) out.push_back(names_[i]);
    return out;
}

void DependenceSpec::validate() const {
    const auto expected = parameter_names(family_, structure_);
    if (expected != names_) throw ValidationError("parameter list does not match structure");
    if (values_.size() != names_.size() || bounds_.size() != names_.size())
        throw ValidationError("parameter vector length mismatch");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!(bounds_[i].lo <= bounds_[i].hi))
            throw ValidationError("empty bound interval for '" + names_[i] + "'");
        if (!std::isfinite(values_[i]) || !bounds_[i].contains(values_[i]))
            throw BoundsError("parameter '" + names_[i] + "' = " + std::to_string(values_[i]) +
                              " outside [" + std::to_string(bounds_[i].lo) + ", " +
                              std::to_string(bounds_[i].hi) + "]");
    }
    if (family_ == Family::ExtremalT && !(get("nu") > 0.0)) throw ValidationError("nu must be positive");
}

}  // namespace nsmax
