#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "nsmax/bivariate.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/inference.hpp"
#include "nsmax/models.hpp"
#include "nsmax/simulation.hpp"

using namespace nsmax;
using namespace nsmax::inference;

namespace {

DependenceSpec iso_br(double q, double a0, double nugget) {
    DependenceSpec s(Family::BrownResnick, Structure::Iso);
    s.set("q", q);
    s.set("alpha0", a0);
    s.set("nugget", nugget);
    return s;
}

DependenceSpec et_m1() {
    DependenceSpec s(Family::ExtremalT, Structure::M1);
    s.set("nu", 3.0);
    s.set("q1", 0.01);
    s.set("q2", 0.006);
    s.set("theta", -0.4);
    s.set("q3", 1.0);
    s.set("alpha0", 1.2);
    s.set("nugget", 0.2);
    return s;
}

// Independent pairwise sum over ordered pairs from the bivariate density.
double brute_force(const BlockMaximaPanel& panel, const SiteSet& sites, const DependenceSpec& spec) {
    const auto kp = models::KernelParams::from_spec(spec);
    double total = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = 0; j < sites.size(); ++j) {
            if (i == j) continue;
            const double v = models::pair_value(kp, sites, i, j);
            const auto pd = spec.family() == Family::BrownResnick ? bivariate::PairDependence::br(v)
                                                                   : bivariate::PairDependence::et(v, spec.get("nu"));
            for (std::size_t m = 0; m < panel.n_blocks(); ++m) {
                if (panel.missing(m, i) || panel.missing(m, j)) continue;
                total += bivariate::log_pair_density(panel.value(m, i), panel.value(m, j), pd);
            }
        }
    return total;
}

}  // namespace

TEST_CASE("two sites: log-likelihood is twice the summed log density") {
    const SiteSet sites({{0.0, 0.0}, {10.0, 5.0}}, {});
    Eigen::MatrixXd z(2, 2);
    z << 0.8, 1.7, 3.0, 0.4;
    const BlockMaximaPanel panel(z, MarginState::UnitFrechet);
    const auto spec = iso_br(0.05, 1.0, 0.2);
    const double g = models::pair_value(models::KernelParams::from_spec(spec), sites, 0, 1);
    const auto pd = bivariate::PairDependence::br(g);
    const double expected =
        2.0 * (bivariate::log_pair_density(0.8, 1.7, pd) + bivariate::log_pair_density(3.0, 0.4, pd));
    CHECK(pairwise_loglik(panel, sites, spec) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("brute-force agreement, missing values and site permutation") {
    const auto sites = testing::random_sites(6, 4);
    const auto spec = et_m1();
    auto panel = simulation::simulate_exact(sites, spec, 15, 8);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mk(15, 6);
    mk.setConstant(false);
    mk(3, 2) = mk(7, 0) = mk(7, 5) = true;
    const BlockMaximaPanel masked(panel.values(), MarginState::UnitFrechet, mk);
    const double ll = pairwise_loglik(masked, sites, spec);
    CHECK(ll == doctest::Approx(brute_force(masked, sites, spec)).epsilon(1e-11));

    std::vector<std::size_t> perm{4, 1, 5, 0, 3, 2};
    CHECK(pairwise_loglik(masked.permuted_sites(perm), sites.permuted(perm), spec) ==
          doctest::Approx(ll).epsilon(1e-12));

    // a site missing everywhere contributes nothing
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> all(15, 6);
    all.setConstant(false);
    all.col(5).setConstant(true);
    const BlockMaximaPanel gone(panel.values(), MarginState::UnitFrechet, all);
    std::vector<std::size_t> first5{0, 1, 2, 3, 4};
    const SiteSet s5 = sites.permuted(first5);
    Eigen::MatrixXd v5 = panel.values().leftCols(5);
    CHECK(pairwise_loglik(gone, sites, spec) ==
          doctest::Approx(pairwise_loglik(BlockMaximaPanel(v5, MarginState::UnitFrechet), s5, spec)).epsilon(1e-12));

    std::vector<double> per_year(15);
    PairwiseData data(masked, sites);
    const double with_years = data.loglik(spec, per_year);
    CHECK(with_years == doctest::Approx(std::accumulate(per_year.begin(), per_year.end(), 0.0)));
}

TEST_CASE("input validation") {
    const auto sites = testing::random_sites(3, 1);
    Eigen::MatrixXd z = Eigen::MatrixXd::Constant(4, 3, 1.0);
    CHECK_THROWS_AS(PairwiseData(BlockMaximaPanel(z, MarginState::Raw), sites), ValidationError);
    CHECK_THROWS_AS(PairwiseData(BlockMaximaPanel(Eigen::MatrixXd::Constant(4, 2, 1.0), MarginState::UnitFrechet), sites),
                    ValidationError);
}

TEST_CASE("box transform round trip and nesting relations") {
    for (Interval b : {Interval{0.0, 1.0}, Interval{1e-3, 2.0}, Interval{0.0, INFINITY}, Interval{-INFINITY, INFINITY}}) {
        BoxTransform t{b.lo, b.hi};
        for (double u : {-4.0, -0.3, 0.0, 1.1, 5.0}) {
            const double x = t.from_free(u);
            CHECK(x >= b.lo);
            CHECK(x <= b.hi);
            CHECK(t.to_free(x) == doctest::Approx(u).epsilon(1e-9));
        }
    }
    CHECK(is_nested(Structure::Iso, Structure::M3));
    CHECK(is_nested(Structure::MBD, Structure::M2));
    CHECK_FALSE(is_nested(Structure::M2, Structure::M1));
    CHECK_FALSE(is_nested(Structure::MBD, Structure::M1));

    auto iso = iso_br(0.07, 1.3, 0.4);
    DependenceSpec m2(Family::BrownResnick, Structure::M2);
    REQUIRE(map_nested(iso, m2));
    const auto sites = testing::random_sites(8, 2);
    const auto a = models::pair_matrix(iso, sites), b = models::pair_matrix(m2, sites);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);

    for (Family f : {Family::BrownResnick, Family::ExtremalT})
        for (Structure s : {Structure::Iso, Structure::Aniso, Structure::M1, Structure::M2, Structure::M3, Structure::MBD}) {
            DependenceSpec spec(f, s);
            CHECK_NOTHROW(StagePlan::default_for(f, s).validate(spec));
        }
    StagePlan bad{{Stage{"partial", {"q"}, {}, {}}}};
    CHECK_THROWS_AS(bad.validate(DependenceSpec(Family::BrownResnick, Structure::Iso)), ValidationError);
}

TEST_CASE("sandwich penalty for a correctly specified Gaussian model") {
    Engine rng(21);
    std::normal_distribution<double> nd(3.0, 2.0);
    const std::size_t n = 2000;
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sigma = std::sqrt(ss / n);
    BlockLoglik f = [&](std::span<const double> psi, std::span<double> per) {
        double total = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double r = (x[m] - psi[0]) / psi[1];
            per[m] = -std::log(psi[1]) - 0.5 * r * r;
            total += per[m];
        }
        return total;
    };
    const std::vector<double> psi{mu, sigma};
    const auto s = sandwich(f, psi, n);
    CHECK(s.positive_definite);
    CHECK(s.penalty == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("fit: stage monotonicity, fixed point, TIC year invariance") {
    const auto sites = testing::random_sites(8, 6);
    const auto truth = iso_br(0.02, 1.0, 0.1);
    const auto panel = simulation::simulate_exact(sites, truth, 30, 12);
    FitSession session(panel, sites, Family::BrownResnick);
    const auto rep = session.fit(Structure::Iso);
    CHECK(rep.converged);
    for (const auto& st : rep.stage_trace) CHECK(st.loglik >= st.initial_loglik - 1e-9);

    // refit from the optimum with a single stage stays put
    FitConfig cfg;
    cfg.nm.restarts = 0;
    const auto again = fit(panel, sites, rep.spec, StagePlan{{Stage{"refit", {}, {}, {}}}}, cfg);
    CHECK(std::abs(again.loglik - rep.loglik) <= 1e-6 * std::abs(rep.loglik));

    FitReport a = rep;
    const double t1 = tic(panel, sites, a);
    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), Engine(3));
    FitReport b = rep;
    const double t2 = tic(panel.permuted_blocks(perm), sites, b);
    CHECK(t2 == doctest::Approx(t1).epsilon(1e-9));
    CHECK(a.penalty == doctest::Approx(b.penalty).epsilon(1e-8));
    CHECK(t1 == doctest::Approx(-2.0 * rep.loglik + 2.0 * a.penalty).epsilon(1e-12));

    FitReport nc = rep;
    nc.converged = false;
    CHECK_THROWS_AS(tic(panel, sites, nc), ValidationError);
}

TEST_CASE("nesting dominance: M2 never below M1") {
    const auto sites = testing::random_sites(7, 9);
    DependenceSpec truth(Family::BrownResnick, Structure::M1);
    truth.set("q1", 0.02);
    truth.set("q2", 0.01);
    truth.set("q3", 2.0);
    truth.set("alpha0", 1.0);
    truth.set("nugget", 0.1);
    const auto panel = simulation::simulate_exact(sites, truth, 25, 4);
    FitConfig cfg;
    cfg.nm.restarts = 1;
    FitSession session(panel, sites, Family::BrownResnick, cfg);
    const double l1 = session.fit(Structure::M1).loglik;
    const double l2 = session.fit(Structure::M2).loglik;
    CHECK(l2 >= l1 - 1e-6);
    CHECK(session.fit(Structure::M1).loglik >= session.fit(Structure::Aniso).loglik - 1e-6);
}

TEST_CASE("bootstrap determinism and single replicate") {
    const auto sites = testing::random_sites(5, 14);
    auto truth = iso_br(0.03, 1.0, 0.1);
    truth.set_fixed("nugget", true);
    FitConfig cfg;
    cfg.nm.restarts = 0;
    const auto a = bootstrap(truth, sites, 20, 2, 77, cfg);
    const auto b = bootstrap(truth, sites, 20, 2, 77, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean == b.rows[i].mean);
        CHECK(a.rows[i].sd == b.rows[i].sd);
    }
    const auto one = bootstrap(truth, sites, 20, 1, 77, cfg);
    for (const auto& row : one.rows) CHECK_FALSE(row.sd.has_value());
}

TEST_CASE("isotropic Brown-Resnick recovery") {
    const auto sites = testing::random_sites(20, 31);
    const auto truth = iso_br(0.05, 1.0, 0.1);
    FitConfig cfg;
    cfg.nm.restarts = 1;
    int hits = 0;
    for (int r = 0; r < 20; ++r) {
        const auto panel = simulation::simulate_exact(sites, truth, 50, 1000 + r);
        const auto rep = FitSession(panel, sites, Family::BrownResnick, cfg).fit(Structure::Iso);
        const double q = rep.spec.get("q");
        if (std::abs(q - 0.05) <= 0.025) ++hits;
    }
    CHECK(hits >= 16);
}
