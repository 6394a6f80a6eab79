#include "nsmax/inference.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "nsmax/bivariate.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/models.hpp"
#include "nsmax/rng.hpp"
#include "nsmax/simulation.hpp"

namespace nsmax::inference {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kClampFrac = 1e-10;
constexpr double kStageTol = 1e-9;
constexpr double kNestTol = 1e-6;
constexpr double kFarTail = 15.0;
constexpr double kTailVertex = 3.0;
constexpr double kMaxCondition = 1e12;

double clamp_to(const Interval& b, double x) { return std::clamp(x, b.lo, b.hi); }

void assign(DependenceSpec& s, const std::string& name, double v) {
    if (!s.has(name) || s.is_fixed(name)) return;
    s.set(name, clamp_to(s.bounds()[s.index(name)], v));
}

}  // namespace

// ---------------------------------------------------------------- likelihood

PairwiseData::PairwiseData(const BlockMaximaPanel& panel, const SiteSet& sites) : sites_(sites) {
    if (panel.state() != MarginState::UnitFrechet)
        throw ValidationError("pairwise likelihood needs unit Frechet margins");
    if (panel.n_sites() != sites.size()) throw ValidationError("panel columns and site count differ");
    if (sites.size() < 2) throw ValidationError("pairwise likelihood needs at least two sites");
    n_blocks_ = panel.n_blocks();
    const std::size_t k = sites.size();
    for (std::size_t m = 0; m < n_blocks_; ++m)
        for (std::size_t i = 0; i < k; ++i)
            if (!panel.missing(m, i) && !(panel.value(m, i) > 0.0))
                throw DomainError("non-positive unit Frechet datum at block " + std::to_string(m));
    pairs_.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            Pair p{i, j, {}, {}, {}};
            for (std::size_t m = 0; m < n_blocks_; ++m) {
                if (panel.missing(m, i) || panel.missing(m, j)) continue;
                p.years.push_back(m);
                p.z1.push_back(panel.value(m, i));
                p.z2.push_back(panel.value(m, j));
            }
            pairs_.push_back(std::move(p));
        }
    }
}

double PairwiseData::loglik(const DependenceSpec& spec) const { return loglik(spec, {}); }

double PairwiseData::loglik(const DependenceSpec& spec, std::span<double> per_year) const {
    spec.validate();
    models::check_sites_for(spec.structure(), sites_);
    if (!per_year.empty()) {
        if (per_year.size() != n_blocks_) throw ValidationError("per-year buffer has the wrong length");
        std::fill(per_year.begin(), per_year.end(), 0.0);
    }
    const auto kp = models::KernelParams::from_spec(spec);
    const Eigen::MatrixXd dep = models::pair_matrix(kp, sites_);
    const bool br = spec.family() == Family::BrownResnick;
    const double nu = kp.nu;
    const double df = nu + 1.0;
    const double t_logc =
        br ? 0.0 : std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

    double total = 0.0;
    for (const auto& p : pairs_) {
        const double d = dep(static_cast<long>(p.i), static_cast<long>(p.j));
        // Complete dependence has no bivariate density; such pairs carry no likelihood term.
        if (br ? !(d > 0.0) : !(d < 1.0)) continue;
        const std::size_t n = p.years.size();
        if (br) {
            const double b = std::sqrt(2.0 * d);
            const double ib = 1.0 / b;
            for (std::size_t t = 0; t < n; ++t) {
                const double iz1 = 1.0 / p.z1[t], iz2 = 1.0 / p.z2[t];
                const double l = std::log(p.z1[t] * iz2) * ib;
                const double w1 = 0.5 * b - l, w2 = 0.5 * b + l;
                const double c1 = bivariate::norm_cdf(w1), c2 = bivariate::norm_cdf(w2);
                const double v = c1 * iz1 + c2 * iz2;
                const double mixed = inv_sqrt_2pi * std::exp(-0.5 * w1 * w1) * ib * iz2 * iz1 * iz1;
                const double term = 2.0 * (-v + std::log(c1 * c2 * iz1 * iz1 * iz2 * iz2 + mixed));
                total += term;
                if (!per_year.empty()) per_year[p.years[t]] += term;
            }
        } else {
            const double a = std::sqrt((1.0 - d * d) / df);
            for (std::size_t t = 0; t < n; ++t) {
                const double iz1 = 1.0 / p.z1[t], iz2 = 1.0 / p.z2[t];
                const double lr = std::log(p.z2[t] * iz1) / nu;
                const double r1 = std::exp(lr), r2 = std::exp(-lr);
                double c1, c2, mixed;
                if (a == 0.0) {
                    c1 = c2 = 1.0;
                    mixed = 0.0;
                } else {
                    const double x1 = (r1 - d) / a, x2 = (r2 - d) / a;
                    c1 = bivariate::student_cdf(x1, df);
                    c2 = bivariate::student_cdf(x2, df);
                    const double pdf = std::exp(t_logc - 0.5 * (df + 1.0) * std::log1p(x1 * x1 / df));
                    mixed = pdf * r1 / (a * nu) * iz2 * iz1 * iz1;
                }
                const double v = c1 * iz1 + c2 * iz2;
                const double term = 2.0 * (-v + std::log(c1 * c2 * iz1 * iz1 * iz2 * iz2 + mixed));
                total += term;
                if (!per_year.empty()) per_year[p.years[t]] += term;
            }
        }
    }
    return total;
}

double pairwise_loglik(const BlockMaximaPanel& panel, const SiteSet& sites, const DependenceSpec& spec) {
    return PairwiseData(panel, sites).loglik(spec);
}

// ---------------------------------------------------------------- transforms

double BoxTransform::to_free(double x) const {
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) {
        const double f = std::clamp((x - lo) / (hi - lo), kClampFrac, 1.0 - kClampFrac);
        return std::log(f / (1.0 - f));
    }
    if (flo) return std::log(std::max(x - lo, kClampFrac));
    if (fhi) return std::log(std::max(hi - x, kClampFrac));
    return x;
}

double BoxTransform::from_free(double u) const {
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) {
        const double f = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
        return std::clamp(lo + (hi - lo) * f, lo, hi);
    }
    if (flo) return lo + std::exp(u);
    if (fhi) return hi - std::exp(u);
    return u;
}

// ---------------------------------------------------------------- plans

StagePlan StagePlan::default_for(Family family, Structure s) {
    const auto names = parameter_names(family, s);
    auto without = [&](std::initializer_list<const char*> drop) {
        std::vector<std::string> out;
        for (const auto& n : names)
            if (std::none_of(drop.begin(), drop.end(), [&](const char* d) { return n == d; })) out.push_back(n);
        return out;
    };
    StagePlan plan;
    switch (s) {
        case Structure::Iso: plan.stages = {{"all", {}, {}, {}}}; break;
        case Structure::Aniso: plan.stages = {{"all", {}, {Structure::Iso}, {}}}; break;
        case Structure::M1:
        case Structure::MBD:
            plan.stages = {{"spatial", without({"q3"}), {Structure::Aniso}, {{"q3", 0.0}}},
                           {"covariate", {"q3"}, {}, {}},
                           {"all", {}, {}, {}}};
            break;
        case Structure::M2: plan.stages = {{"all", {}, {Structure::M1, Structure::MBD}, {}}}; break;
        case Structure::M3: plan.stages = {{"all", {}, {Structure::M2}, {}}}; break;
        case Structure::MHG: plan.stages = {{"all", {}, {Structure::Aniso}, {}}}; break;
    }
    return plan;
}

void StagePlan::validate(const DependenceSpec& spec) const {
    if (stages.empty()) throw ValidationError("stage plan is empty");
    if (!stages.back().free.empty()) {
        std::set<std::string> last(stages.back().free.begin(), stages.back().free.end());
        for (const auto& n : spec.free_names())
            if (!last.count(n)) throw ValidationError("final stage must free every parameter (missing " + n + ")");
    }
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& st = stages[k];
        for (const auto& n : st.free)
            if (!spec.has(n)) throw ValidationError("stage '" + st.label + "' names unknown parameter " + n);
        for (const auto& [n, v] : st.set)
            if (!spec.has(n)) throw ValidationError("stage '" + st.label + "' sets unknown parameter " + n);
        if (k > 0 && !st.init_from.empty())
            throw ValidationError("only the first stage may start from nested fits");
        if (std::find(st.init_from.begin(), st.init_from.end(), spec.structure()) != st.init_from.end())
            throw ValidationError("a structure cannot start from itself");
    }
}

// ---------------------------------------------------------------- nesting

bool is_nested(Structure small, Structure large) {
    using S = Structure;
    auto direct = [](S a, S b) {
        return (a == S::Iso && b == S::Aniso) || (a == S::Aniso && b == S::M1) || (a == S::M1 && b == S::M2) ||
               (a == S::MBD && b == S::M2) || (a == S::M2 && b == S::M3);
    };
    if (direct(small, large)) return true;
    for (S mid : {S::Iso, S::Aniso, S::M1, S::M2, S::M3, S::MBD})
        if (mid != small && mid != large && direct(small, mid) && is_nested(mid, large)) return true;
    return false;
}

bool map_nested(const DependenceSpec& fitted, DependenceSpec& target) {
    if (fitted.family() != target.family()) return false;
    const Structure from = fitted.structure(), to = target.structure();
    for (const auto& n : fitted.names())
        if (target.has(n)) assign(target, n, fitted.get(n));

    const bool has_aniso_block = from != Structure::Iso && from != Structure::MHG;
    if (from == Structure::Iso && target.has("q1")) {
        assign(target, "q1", fitted.get("q"));
        assign(target, "q2", fitted.get("q"));
        assign(target, "theta", 0.0);
    }
    if (target.has("q3") && !fitted.has("q3")) assign(target, "q3", 0.0);

    if (to == Structure::MBD && !fitted.has("beta")) {
        // ||A h||^a0 = (||A h||^2)^(a0/2), so MBD with q3 = 0 and beta = a0/2 reproduces aniso.
        assign(target, "beta", fitted.get("alpha0") / 2.0);
    }
    if ((to == Structure::M2 || to == Structure::M3) && from == Structure::MBD) {
        assign(target, "alpha0", 2.0);
        assign(target, "alpha1", 2.0);
    }
    if ((to == Structure::M2 || to == Structure::M3) && !fitted.has("alpha1") && from != Structure::MBD) {
        assign(target, "alpha1", fitted.get("alpha0"));
        assign(target, "beta", fitted.has("beta") ? fitted.get("beta") : 1.0);
    }
    if (to == Structure::M3 && !fitted.has("alpha"))
        assign(target, "alpha", fitted.has("beta") ? fitted.get("beta") : 1.0);

    if (to == Structure::MHG && (from == Structure::Iso || has_aniso_block)) {
        const auto kp = models::KernelParams::from_spec(fitted);
        // Omega = A^-1 A^-T, so h' Omega^-1 h = ||A h||^2.
        const Eigen::Matrix2d a = kp.spatial_matrix();
        const Eigen::Matrix2d ai = a.inverse();
        const Eigen::Matrix2d om = ai * ai.transpose();
        const double wx = std::sqrt(om(0, 0)), wy = std::sqrt(om(1, 1));
        const double delta = std::clamp(om(0, 1) / (wx * wy), -0.999999, 0.999999);
        assign(target, "wx_a", std::log(wx));
        assign(target, "wy_a", std::log(wy));
        assign(target, "wx_b", 0.0);
        assign(target, "wy_b", 0.0);
        assign(target, "delta_a", std::atanh(delta));
        assign(target, "delta_b", 0.0);
    }
    return true;
}

// ---------------------------------------------------------------- fitting

namespace {

struct StageOutcome {
    double initial;
    double final;
    bool converged;
    std::size_t evals;
};

StageOutcome run_stage(const PairwiseData& data, DependenceSpec& spec, const std::vector<std::string>& free,
                       const std::string& label, const optimize::NelderMeadConfig& nm) {
    std::vector<std::size_t> idx;
    std::vector<BoxTransform> tr;
    for (const auto& n : free) {
        idx.push_back(spec.index(n));
        const auto b = spec.bounds()[idx.back()];
        tr.push_back({b.lo, b.hi});
    }
    std::vector<double> u0(idx.size()), steps(idx.size(), nm.step);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        u0[i] = tr[i].to_free(spec.values()[idx[i]]);
        // At a clamped bound additive steps are meaningless; pull the first vertex inward.
        if (std::abs(u0[i]) > kFarTail) steps[i] = std::copysign(kTailVertex, u0[i]) - u0[i];
    }
    DependenceSpec work = spec;
    auto apply = [&](std::span<const double> u) {
        for (std::size_t i = 0; i < idx.size(); ++i) work.set_value(idx[i], tr[i].from_free(u[i]));
    };
    auto objective = [&](std::span<const double> u) {
        apply(u);
        try {
            return -data.loglik(work);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double l0 = -objective(u0);
    if (!std::isfinite(l0))
        throw InitializationError("non-finite pairwise log-likelihood at the start of stage '" + label + "'");
    if (idx.empty()) return {l0, l0, true, 1};

    const auto res = optimize::nelder_mead(objective, u0, nm, steps);
    apply(res.x);
    spec = work;
    const double l1 = -res.f;
    if (l1 < l0 - kStageTol)
        throw InvariantError("stage '" + label + "' decreased the log-likelihood");
    return {l0, l1, res.converged, res.evaluations};
}

}  // namespace

FitSession::FitSession(const BlockMaximaPanel& panel, const SiteSet& sites, Family family, FitConfig cfg)
    : data_(std::make_shared<PairwiseData>(panel, sites)), family_(family), cfg_(cfg) {}

void FitSession::fix(const std::string& name, double value) {
    fixed_[name] = value;
    cache_.clear();
}

DependenceSpec FitSession::prepare(DependenceSpec spec) const {
    for (const auto& [n, v] : fixed_) {
        if (!spec.has(n)) continue;
        spec.set(n, v);
        spec.set_fixed(n, true);
    }
    return spec;
}

std::optional<FitReport> FitSession::cached(Structure s) const {
    auto it = cache_.find(s);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

const FitReport& FitSession::fit(Structure structure) {
    if (auto it = cache_.find(structure); it != cache_.end()) return it->second;
    auto start = prepare(DependenceSpec(family_, structure));
    auto rep = fit(std::move(start), StagePlan::default_for(family_, structure));
    return cache_.emplace(structure, std::move(rep)).first->second;
}

FitReport FitSession::fit(DependenceSpec start, const StagePlan& plan) {
    if (start.family() != family_) throw ValidationError("spec family differs from the session family");
    start = prepare(std::move(start));
    plan.validate(start);
    start.validate();
    models::check_sites_for(start.structure(), data_->sites());

    FitReport rep;
    std::vector<std::pair<Structure, double>> nested;
    const auto& first = plan.stages.front();
    if (!first.init_from.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        DependenceSpec chosen = start;
        for (Structure s : first.init_from) {
            const FitReport& base = fit(s);
            nested.emplace_back(s, base.loglik);
            DependenceSpec cand = start;
            map_nested(base.spec, cand);
            for (const auto& [n, v] : first.set) assign(cand, n, v);
            double l = -std::numeric_limits<double>::infinity();
            try {
                l = data_->loglik(cand);
            } catch (const Error&) {
            }
            if (l > best) {
                best = l;
                chosen = cand;
            }
        }
        start = chosen;
    }

    DependenceSpec spec = start;
    const auto all_free = spec.free_names();
    bool converged = true;
    for (std::size_t k = 0; k < plan.stages.size(); ++k) {
        const auto& st = plan.stages[k];
        for (const auto& [n, v] : st.set) assign(spec, n, v);
        std::vector<std::string> free;
        for (const auto& n : st.free.empty() ? all_free : st.free)
            if (!spec.is_fixed(n)) free.push_back(n);
        auto nm = cfg_.nm;
        const bool last = k + 1 == plan.stages.size();
        if (cfg_.restart_final_only && !last) nm.restarts = 0;
        const auto out = run_stage(*data_, spec, free, st.label, nm);
        rep.stage_trace.push_back({st.label, out.initial, out.final});
        rep.evaluations += out.evals;
        rep.loglik = out.final;
        if (last) converged = out.converged;
    }
    rep.spec = spec;
    rep.converged = converged && std::isfinite(rep.loglik);
    rep.free_names = all_free;
    for (const auto& [s, l] : nested) rep.nested.push_back({s, l});

    for (const auto& [s, l] : nested) {
        if (is_nested(s, spec.structure()) && rep.loglik < l - kNestTol)
            throw InvariantError("fitted " + to_string(spec.structure()) + " log-likelihood falls below nested " +
                                 to_string(s));
    }
    return rep;
}

FitReport fit(const BlockMaximaPanel& panel, const SiteSet& sites, const DependenceSpec& spec,
              const StagePlan& plan, const FitConfig& cfg) {
    FitSession session(panel, sites, spec.family(), cfg);
    for (const auto& n : spec.names())
        if (spec.is_fixed(n)) session.fix(n, spec.get(n));
    return session.fit(spec, plan);
}

// ---------------------------------------------------------------- sandwich / TIC

Sandwich sandwich(const BlockLoglik& f, std::span<const double> psi, std::size_t n_blocks,
                  std::span<const Interval> bounds, bool allow_pinv) {
    const std::size_t p = psi.size();
    const long lp = static_cast<long>(p);
    std::vector<double> h(p);
    // Two abscissae per coordinate: central (x-h, x+h) or one-sided (x, x+h) / (x-h, x) near a bound.
    std::vector<double> lo_pt(p), hi_pt(p);
    std::vector<int> side(p, 0);
    for (std::size_t i = 0; i < p; ++i) {
        h[i] = std::max(1e-5, 1e-4 * std::abs(psi[i]));
        lo_pt[i] = psi[i] - h[i];
        hi_pt[i] = psi[i] + h[i];
        if (!bounds.empty()) {
            if (lo_pt[i] < bounds[i].lo) {
                side[i] = 1;
                lo_pt[i] = psi[i];
            } else if (hi_pt[i] > bounds[i].hi) {
                side[i] = -1;
                hi_pt[i] = psi[i];
            }
        }
    }
    std::vector<double> x(psi.begin(), psi.end());
    // Stencils are combined per block before summing, so the result does not depend on block order
    // and rounding scales with one block's log-likelihood rather than the total.
    auto blocks_at = [&](const std::vector<double>& at) {
        std::vector<double> b(n_blocks);
        if (!std::isfinite(f(at, b))) throw NumericalError("non-finite log-likelihood in finite differences");
        return b;
    };
    auto combine = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
        double sum = 0.0;
        for (std::size_t m = 0; m < n_blocks; ++m) {
            double v = 0.0;
            for (const auto& [w, b] : terms) v += w * (*b)[m];
            sum += v;
        }
        return sum;
    };

    const auto b0 = blocks_at(x);
    Eigen::MatrixXd scores(static_cast<long>(n_blocks), lp);
    std::vector<std::vector<double>> b_hi(p), b_lo(p);
    for (std::size_t i = 0; i < p; ++i) {
        x[i] = hi_pt[i];
        b_hi[i] = blocks_at(x);
        x[i] = lo_pt[i];
        b_lo[i] = blocks_at(x);
        x[i] = psi[i];
        const double span = hi_pt[i] - lo_pt[i];
        for (std::size_t m = 0; m < n_blocks; ++m)
            scores(static_cast<long>(m), static_cast<long>(i)) = (b_hi[i][m] - b_lo[i][m]) / span;
    }

    Eigen::MatrixXd d2(lp, lp);
    for (std::size_t i = 0; i < p; ++i) {
        const double hh = h[i] * h[i];
        if (side[i] == 0) {
            d2(i, i) = combine({{1.0, &b_hi[i]}, {-2.0, &b0}, {1.0, &b_lo[i]}}) / hh;
        } else {
            // Three points on the admissible side.
            x[i] = psi[i] + 2.0 * side[i] * h[i];
            const auto b2 = blocks_at(x);
            x[i] = psi[i];
            const auto* b1 = side[i] > 0 ? &b_hi[i] : &b_lo[i];
            d2(i, i) = combine({{1.0, &b2}, {-2.0, b1}, {1.0, &b0}}) / hh;
        }
        for (std::size_t j = 0; j < i; ++j) {
            std::vector<double> corner[2][2];
            for (int si : {0, 1})
                for (int sj : {0, 1}) {
                    x[i] = si ? hi_pt[i] : lo_pt[i];
                    x[j] = sj ? hi_pt[j] : lo_pt[j];
                    corner[si][sj] = blocks_at(x);
                }
            x[i] = psi[i];
            x[j] = psi[j];
            d2(i, j) = d2(j, i) = combine({{1.0, &corner[1][1]}, {-1.0, &corner[1][0]}, {-1.0, &corner[0][1]},
                                           {1.0, &corner[0][0]}}) /
                                  ((hi_pt[i] - lo_pt[i]) * (hi_pt[j] - lo_pt[j]));
        }
    }

    Sandwich out;
    out.hessian = -0.5 * (d2 + d2.transpose());
    out.score_cov = scores.transpose() * scores;
    if (p == 0) {
        out.positive_definite = true;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.hessian);
    const auto& lam = es.eigenvalues();
    const double amax = lam.cwiseAbs().maxCoeff();
    const double amin = lam.cwiseAbs().minCoeff();
    out.condition_number = amin > 0.0 ? amax / amin : std::numeric_limits<double>::infinity();
    out.positive_definite = lam.minCoeff() > 0.0;
    Eigen::MatrixXd hinv;
    if (!(out.condition_number <= kMaxCondition)) {
        if (!allow_pinv) throw TICError("Hessian of the pairwise log-likelihood is numerically singular", out.condition_number);
        log_warning("singular Hessian (condition number " + std::to_string(out.condition_number) +
                    "); using the pseudo-inverse for the TIC penalty");
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(lp);
        for (long i = 0; i < lp; ++i)
            if (std::abs(lam[i]) > amax / kMaxCondition) inv[i] = 1.0 / lam[i];
        hinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
        out.used_pseudo_inverse = true;
    } else {
        hinv = es.eigenvectors() * lam.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    }
    out.penalty = (out.score_cov * hinv).trace();
    if (out.positive_definite && out.penalty < -1e-8 * std::max(1.0, out.score_cov.norm() * hinv.norm()))
        throw InvariantError("negative TIC penalty with a positive-definite Hessian");
    return out;
}

namespace {

double tic_impl(const PairwiseData& data, FitReport& fitted, bool allow_pinv) {
    DependenceSpec work = fitted.spec;
    std::vector<std::size_t> idx;
    std::vector<Interval> bounds;
    std::vector<double> psi;
    for (const auto& n : fitted.free_names) {
        idx.push_back(work.index(n));
        bounds.push_back(work.bounds()[idx.back()]);
        psi.push_back(work.values()[idx.back()]);
    }
    const BlockLoglik f = [&](std::span<const double> x, std::span<double> blocks) {
        for (std::size_t i = 0; i < idx.size(); ++i) work.set_value(idx[i], x[i]);
        try {
            return data.loglik(work, blocks);
        } catch (const Error&) {
            return kNaN;
        }
    };
    const auto sw = sandwich(f, psi, data.n_blocks(), bounds, allow_pinv);
    fitted.hessian = sw.hessian;
    fitted.score_cov = sw.score_cov;
    fitted.penalty = sw.penalty;
    fitted.tic = -2.0 * fitted.loglik + 2.0 * sw.penalty;
    return fitted.tic;
}

}  // namespace

double tic(const PairwiseData& data, FitReport& fitted, bool allow_pinv) {
    if (!fitted.converged) throw ValidationError("TIC needs a converged fit");
    return tic_impl(data, fitted, allow_pinv);
}

double tic(const BlockMaximaPanel& panel, const SiteSet& sites, FitReport& fitted, bool allow_pinv) {
    return tic(PairwiseData(panel, sites), fitted, allow_pinv);
}

std::vector<CompareRow> compare(const BlockMaximaPanel& panel, const SiteSet& sites, Family family,
                                std::span<const Structure> structures, const FitConfig& cfg,
                                std::vector<FitReport>* reports) {
    FitSession session(panel, sites, family, cfg);
    std::vector<CompareRow> rows;
    for (Structure s : structures) {
        FitReport rep = session.fit(s);
        if (!rep.converged) log_warning("fit of " + to_string(s) + " did not converge; TIC reported anyway");
        tic_impl(session.data(), rep, true);
        rows.push_back({to_string(s), rep.tic, rep.loglik, rep.converged});
        if (reports) reports->push_back(std::move(rep));
    }
    return rows;
}

// ---------------------------------------------------------------- bootstrap

BootstrapResult bootstrap(const DependenceSpec& truth, const SiteSet& sites, std::size_t n_years,
                          std::size_t n_reps, std::uint64_t seed, const FitConfig& cfg,
                          const std::function<void(std::size_t, const FitSession&)>& on_rep) {
    truth.validate();
    if (n_reps == 0) throw ValidationError("bootstrap needs at least one replicate");
    BootstrapResult res;
    res.n_reps = n_reps;
    for (std::size_t r = 0; r < n_reps; ++r) {
        const auto panel = simulation::simulate_exact(sites, truth, n_years, derive_seed(seed, r));
        FitSession session(panel, sites, truth.family(), cfg);
        for (const auto& n : truth.names())
            if (truth.is_fixed(n)) session.fix(n, truth.get(n));
        const FitReport& rep = session.fit(truth.structure());
        if (on_rep) on_rep(r, session);
        if (!rep.converged) {
            ++res.n_failed;
            continue;
        }
        res.estimates.push_back(rep.spec);
    }
    if (2 * res.n_failed > n_reps)
        throw BootstrapError(std::to_string(res.n_failed) + " of " + std::to_string(n_reps) +
                             " bootstrap fits failed to converge");
    const std::size_t used = res.estimates.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        BootstrapRow row{truth.names()[i], truth.values()[i], kNaN, std::nullopt};
        if (used > 0) {
            double s = 0.0;
            for (const auto& e : res.estimates) s += e.values()[i];
            row.mean = s / static_cast<double>(used);
            if (used > 1) {
                double ss = 0.0;
                for (const auto& e : res.estimates) ss += (e.values()[i] - row.mean) * (e.values()[i] - row.mean);
                row.sd = std::sqrt(ss / static_cast<double>(used - 1));
            }
        }
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace nsmax::inference
