// Acceptance suite: one PASS/FAIL line per criterion.
//
//   nsmax_acceptance                  all criteria, bootstrap at smoke scale
//   nsmax_acceptance -c 5 -c 8        selected criteria
//   nsmax_acceptance -c 5 --full      bootstrap at 72 sites x 69 years

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../common/oracles.hpp"
#include "nsmax/bivariate.hpp"
#include "nsmax/empirical.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/inference.hpp"
#include "nsmax/models.hpp"
#include "nsmax/random_scale.hpp"
#include "nsmax/simulation.hpp"
#include "nsmax/validity.hpp"

using namespace nsmax;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string summary;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

const std::vector<Structure> kAllStructures{Structure::Iso, Structure::Aniso, Structure::M1, Structure::M2,
                                            Structure::M3,  Structure::MBD,   Structure::MHG};

// ------------------------------------------------------------------ invariant ledger (criterion 8)

struct InvariantTally {
    std::size_t fits = 0;
    std::size_t stages = 0;
    std::size_t nesting_checks = 0;
    std::vector<std::string> violations;

    void check_session(const inference::FitSession& session, const std::string& where) {
        std::map<Structure, double> ll;
        for (Structure s : kAllStructures) {
            const auto rep = session.cached(s);
            if (!rep) continue;
            ++fits;
            ll[s] = rep->loglik;
            for (const auto& st : rep->stage_trace) {
                ++stages;
                if (st.loglik < st.initial_loglik - 1e-9)
                    violations.push_back(where + ": stage '" + st.label + "' of " + to_string(s) + " decreased loglik");
            }
            for (const auto& n : rep->nested) {
                ++nesting_checks;
                if (inference::is_nested(n.structure, s) && rep->loglik < n.loglik - 1e-6)
                    violations.push_back(where + ": " + to_string(s) + " below its start " + to_string(n.structure));
            }
        }
        for (const auto& [a, la] : ll)
            for (const auto& [b, lb] : ll)
                if (inference::is_nested(a, b)) {
                    ++nesting_checks;
                    if (lb < la - 1e-6)
                        violations.push_back(where + ": " + to_string(b) + " below nested " + to_string(a));
                }
    }
};

InvariantTally g_tally;
bool g_fits_ran = false;

// ------------------------------------------------------------------ criterion 1

Outcome closed_forms() {
    const double e1 = std::abs(bivariate::theta_br(2.0) - 2.0 * oracle::std_normal_cdf(1.0));
    const double e2 = std::abs(bivariate::theta_et(0.0, 1.0) - (1.0 + std::sqrt(0.5)));
    bool chi_exact = true;
    for (double t : {1.0, 1.25, bivariate::theta_br(2.0), bivariate::theta_et(0.0, 1.0), 2.0})
        chi_exact = chi_exact && bivariate::chi_pair(t) == 2.0 - t && bivariate::chi_pair(t) + t == 2.0;
    Outcome o;
    o.pass = e1 < 1e-10 && e2 < 1e-10 && chi_exact;
    o.summary = "theta_br(2) err " + fmt("%.2e", e1) + ", theta_et(0,1) err " + fmt("%.2e", e2) +
                (chi_exact ? ", chi = 2 - theta exact" : ", chi identity broken");
    return o;
}

// ------------------------------------------------------------------ criterion 2

Outcome density_oracle() {
    Engine rng(2024);
    std::uniform_real_distribution<double> g(0.05, 6.0), r(-0.8, 0.95), nu(0.3, 12.0), lz(std::log(0.3), std::log(4.0));
    double worst_mass = 0.0, worst_fd = 0.0;
    for (int d = 0; d < 20; ++d) {
        const auto p = d % 2 == 0 ? bivariate::PairDependence::br(g(rng)) : bivariate::PairDependence::et(r(rng), nu(rng));
        const double mass =
            oracle::integrate_positive_quadrant([&](double a, double b) { return bivariate::pair_density(a, b, p); });
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        auto V = [&](double a, double b) { return bivariate::exponent(a, b, p); };
        for (int k = 0; k < 5; ++k) {
            const double z1 = std::exp(lz(rng)), z2 = std::exp(lz(rng));
            const double f = bivariate::pair_density(z1, z2, p);
            const double fd = oracle::mixed_fd_density(V, z1, z2);
            worst_fd = std::max(worst_fd, std::abs(f - fd) / std::abs(fd));
        }
    }
    return {worst_mass < 1e-4 && worst_fd < 1e-4,
            "20 draws: max |mass - 1| " + fmt("%.2e", worst_mass) + ", max rel err vs FD " + fmt("%.2e", worst_fd)};
}

// ------------------------------------------------------------------ criterion 3

Outcome definiteness() {
    std::size_t combos = 0, draws = 0, failures = 0;
    std::string first_failure;
    for (Family f : {Family::BrownResnick, Family::ExtremalT})
        for (Structure s : kAllStructures) {
            if (f == Family::BrownResnick && s == Structure::MHG) continue;
            ++combos;
            Engine rng(derive_seed(3, combos));
            for (std::size_t d = 0; d < 100; ++d) {
                const auto spec = validity::random_spec(f, s, rng);
                const auto rep = validity::check_spec(spec, 10, 5, derive_seed(30 + combos, d));
                ++draws;
                if (!rep.passed) {
                    ++failures;
                    if (first_failure.empty()) first_failure = to_string(f) + "-" + to_string(s);
                }
            }
        }
    const validity::PairKernel neg = [](const SiteSet& x, std::size_t i, std::size_t j) { return -x.distance(i, j); };
    const validity::PairKernel cosine = [](const SiteSet& x, std::size_t i, std::size_t j) {
        return std::cos(10.0 * x.distance(i, j));
    };
    const bool neg_fails = !validity::check_cnd(neg, validity::default_site_generator, 10, 20, 5).passed;
    const bool cos_fails = !validity::check_psd(cosine, validity::default_site_generator, 10, 20, 6).passed;
    Outcome o;
    o.pass = failures == 0 && neg_fails && cos_fails;
    o.summary = std::to_string(combos) + " family/structure combos x 100 draws x 5 ten-site configs: " +
                std::to_string(failures) + " failures" + (first_failure.empty() ? "" : " (first " + first_failure + ")") +
                "; planted -|h| " + (neg_fails ? "rejected" : "ACCEPTED") + ", cos(10|h|) " +
                (cos_fails ? "rejected" : "ACCEPTED");
    return o;
}

// ------------------------------------------------------------------ criterion 4

double frechet_cdf(double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; }

DependenceSpec et_m1_reference_truth() {
    DependenceSpec s(Family::ExtremalT, Structure::M1);
    s.set("nu", 4.094);
    s.set("theta", -0.726);
    s.set("q1", 0.011);
    s.set("q2", 0.006);
    s.set("q3", 1.302);
    s.set("alpha0", 1.323);
    s.set("nugget", 0.315);
    return s;
}

SiteSet study_sites(std::size_t k, std::uint64_t seed) {
    Engine rng(seed);
    return validity::default_site_generator(k, rng);
}

Outcome simulation_exactness() {
    const std::size_t n = 10000;
    const double band = 1.36 / std::sqrt(double(n));
    const auto sites = study_sites(10, 41);
    DependenceSpec br(Family::BrownResnick, Structure::M2);
    br.set("q1", 0.01);
    br.set("q2", 0.02);
    br.set("theta", 0.4);
    br.set("q3", 1.0);
    br.set("alpha0", 1.2);
    br.set("alpha1", 1.5);
    br.set("beta", 0.8);
    br.set("nugget", 0.2);
    double worst_ks = 0.0;
    for (const auto& spec : {et_m1_reference_truth(), br}) {
        const auto panel = simulation::simulate_exact(sites, spec, n, 4);
        for (std::size_t i = 0; i < sites.size(); ++i)
            worst_ks = std::max(worst_ks, oracle::ks_distance(panel.column(i), frechet_cdf));
    }

    struct PairCase {
        Family f;
        double dep, nu;
    };
    const std::vector<PairCase> cases{{Family::BrownResnick, 0.3, 1},  {Family::BrownResnick, 1.0, 1},
                                      {Family::BrownResnick, 2.0, 1},  {Family::BrownResnick, 4.0, 1},
                                      {Family::BrownResnick, 8.0, 1},  {Family::ExtremalT, 0.0, 1.0},
                                      {Family::ExtremalT, 0.6, 4.0},   {Family::ExtremalT, 0.3, 2.0},
                                      {Family::ExtremalT, 0.8, 10.0},  {Family::ExtremalT, -0.3, 3.0}};
    double worst_theta = 0.0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& pc = cases[c];
        Eigen::Matrix2d m;
        if (pc.f == Family::BrownResnick) m << 0.0, pc.dep, pc.dep, 0.0;
        else m << 1.0, pc.dep, pc.dep, 1.0;
        const simulation::ExtremalFunctionSampler sampler(pc.f, m, pc.nu);
        Engine rng(derive_seed(44, c));
        std::vector<double> a(n), b(n);
        double z[2];
        for (std::size_t r = 0; r < n; ++r) {
            sampler.sample(rng, z);
            a[r] = z[0];
            b[r] = z[1];
        }
        const double th = pc.f == Family::BrownResnick ? bivariate::theta_br(pc.dep) : bivariate::theta_et(pc.dep, pc.nu);
        worst_theta = std::max(worst_theta, std::abs(empirical::empirical_theta_fmad(a, b) - th));
    }

    const std::size_t groups = 2000;
    const auto panel = simulation::simulate_exact(sites, et_m1_reference_truth(), 5 * groups, 45);
    double worst_ms = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        std::vector<double> m(groups);
        for (std::size_t g = 0; g < groups; ++g) {
            double mx = 0.0;
            for (std::size_t r = 0; r < 5; ++r) mx = std::max(mx, panel.value(5 * g + r, i));
            m[g] = mx / 5.0;
        }
        worst_ms = std::max(worst_ms, oracle::ks_distance(m, frechet_cdf));
    }
    const double ms_band = 1.36 / std::sqrt(double(groups));

    // Reported, not asserted: with 20 site tests at the 95% level a calibrated simulator
    // leaves the band somewhere about two runs in three, so the exceedance rate over
    // extra panels shows whether a failure above is sampling noise.
    std::size_t exceed = 0, tests = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        const auto extra = simulation::simulate_exact(sites, et_m1_reference_truth(), n, derive_seed(46, rep));
        for (std::size_t i = 0; i < sites.size(); ++i, ++tests)
            exceed += oracle::ks_distance(extra.column(i), frechet_cdf) >= band;
    }
    return {worst_ks < band && worst_theta < 0.05 && worst_ms < ms_band,
            "max site KS " + fmt("%.4f", worst_ks) + " (band " + fmt("%.4f", band) + "), max |theta_hat - theta| " +
                fmt("%.4f", worst_theta) + " over 10 pairs, max-stability KS " + fmt("%.4f", worst_ms) + " (band " +
                fmt("%.4f", ms_band) + "); calibration: " + std::to_string(exceed) + "/" + std::to_string(tests) +
                " extra site tests outside the band (5% expected)"};
}

// ------------------------------------------------------------------ criterion 5

Outcome bootstrap_recovery(bool full) {
    const std::size_t k = full ? 72 : 20, years = full ? 69 : 30, reps = 20;
    const auto sites = study_sites(k, 55);
    const auto truth = et_m1_reference_truth();
    const auto t0 = Clock::now();
    g_fits_ran = true;
    inference::BootstrapResult res;
    try {
        res = inference::bootstrap(truth, sites, years, reps, 555, {}, [&](std::size_t r, const inference::FitSession& s) {
            g_tally.check_session(s, "bootstrap rep " + std::to_string(r));
            std::cerr << "  bootstrap replicate " << r + 1 << "/" << reps << " done (" << fmt("%.0f", seconds_since(t0))
                      << " s)\n";
        });
    } catch (const InvariantError& e) {
        g_tally.violations.push_back(std::string("bootstrap: ") + e.what());
        return {false, std::string("invariant violated: ") + e.what()};
    }
    bool all_within = true;
    std::string worst;
    double rel_q1 = 0.0, rel_q3 = 0.0;
    std::cout << "  parameter      truth       mean         sd   |mean-truth|/sd\n";
    for (const auto& row : res.rows) {
        if (!row.sd) return {false, "standard deviation unavailable (" + std::to_string(res.estimates.size()) + " usable fits)"};
        const double ratio = std::abs(row.mean - row.truth) / *row.sd;
        std::printf("  %-10s %10.4f %10.4f %10.4f %10.3f\n", row.parameter.c_str(), row.truth, row.mean, *row.sd, ratio);
        if (!(ratio < 1.0)) {
            all_within = false;
            worst += (worst.empty() ? "" : ",") + row.parameter;
        }
        if (row.parameter == "q1") rel_q1 = *row.sd / std::abs(row.truth);
        if (row.parameter == "q3") rel_q3 = *row.sd / std::abs(row.truth);
    }
    const bool q_order = rel_q3 > rel_q1;
    std::ostringstream os;
    os << k << " sites x " << years << " years x " << reps << " reps (" << res.n_failed << " non-converged), "
       << (all_within ? "|mean - truth| < sd for every parameter" : "|mean - truth| >= sd for " + worst)
       << ", q3 sd/|truth| " << fmt("%.3f", rel_q3) << (q_order ? " > " : " <= ") << "q1 sd/|truth| "
       << fmt("%.3f", rel_q1) << ", " << fmt("%.0f", seconds_since(t0)) << " s";
    return {all_within && q_order, os.str()};
}

// ------------------------------------------------------------------ criterion 6

DependenceSpec strong_m1_truth() {
    DependenceSpec s(Family::ExtremalT, Structure::M1);
    s.set("nu", 3.0);
    s.set("theta", -0.7);
    s.set("q1", 0.004);
    s.set("q2", 0.002);
    s.set("q3", 2.0);
    s.set("alpha0", 1.3);
    s.set("nugget", 0.1);
    return s;
}

DependenceSpec iso_truth() {
    DependenceSpec s(Family::ExtremalT, Structure::Iso);
    s.set("nu", 3.0);
    s.set("q", 0.004);
    s.set("alpha0", 1.3);
    s.set("nugget", 0.1);
    return s;
}

// Fraction of replicates whose TIC prefers `expected` between iso and M1.
std::size_t tic_wins(const DependenceSpec& truth, Structure expected, const SiteSet& sites, std::uint64_t seed,
                     std::string& detail) {
    std::size_t wins = 0;
    for (std::size_t r = 0; r < 10; ++r) {
        const auto panel = simulation::simulate_exact(sites, truth, 50, derive_seed(seed, r));
        inference::FitSession session(panel, sites, Family::ExtremalT);
        auto iso = session.fit(Structure::Iso);
        auto m1 = session.fit(Structure::M1);
        g_tally.check_session(session, "tic " + to_string(truth.structure()) + " rep " + std::to_string(r));
        if (!iso.converged || !m1.converged) {
            detail += "x";
            continue;
        }
        const double t_iso = inference::tic(session.data(), iso, true);
        const double t_m1 = inference::tic(session.data(), m1, true);
        const bool pick_m1 = t_m1 < t_iso;
        const bool win = (expected == Structure::M1) == pick_m1;
        wins += win;
        detail += win ? "+" : "-";
        std::printf("  %s data rep %zu: TIC iso %.2f (pen %.2f), M1 %.2f (pen %.2f) -> %s\n",
                    to_string(truth.structure()).c_str(), r, t_iso, iso.penalty, t_m1, m1.penalty, pick_m1 ? "M1" : "iso");
        std::fflush(stdout);
    }
    return wins;
}

Outcome tic_ordering() {
    const auto sites = study_sites(20, 66);
    const auto t0 = Clock::now();
    g_fits_ran = true;
    std::string d1, d2;
    std::size_t w1 = 0, w2 = 0;
    try {
        w1 = tic_wins(strong_m1_truth(), Structure::M1, sites, 661, d1);
        w2 = tic_wins(iso_truth(), Structure::Iso, sites, 662, d2);
    } catch (const InvariantError& e) {
        g_tally.violations.push_back(std::string("tic: ") + e.what());
        return {false, std::string("invariant violated: ") + e.what()};
    }
    std::ostringstream os;
    os << "M1 data: M1 chosen " << w1 << "/10 [" << d1 << "], iso data: iso chosen " << w2 << "/10 [" << d2 << "], "
       << fmt("%.0f", seconds_since(t0)) << " s";
    return {w1 >= 8 && w2 >= 7, os.str()};
}

// ------------------------------------------------------------------ criterion 7

Outcome regimes() {
    using namespace random_scale;
    const std::map<Regime, std::string> expected{{Regime::Thm51, "decreasing-to-zero"},
                                                 {Regime::Thm52, "bounded-away"},
                                                 {Regime::Thm53, "decreasing-to-zero"}};
    bool pass = true;
    std::ostringstream os;
    for (const auto& [r, want] : expected) {
        std::set<std::string> got;
        std::string chis;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto cfg = default_config(r);
            cfg.n = 1'000'000;
            const auto res = regime_experiment(r, cfg, seed);
            got.insert(res.verdict);
            chis += (chis.empty() ? "" : "/") + fmt("%.3f", res.curve.chi_hat.back().value_or(NAN));
        }
        const bool ok = got.size() == 1 && *got.begin() == want;
        pass = pass && ok;
        os << to_string(r) << " ";
        if (got.size() == 1) os << *got.begin();
        else os << "unstable";
        os << (ok ? "" : " (expected " + want + ")") << " chi_hat(0.999)=" << chis << "; ";
    }
    auto s = os.str();
    s.resize(s.size() - 2);
    return {pass, s};
}

// ------------------------------------------------------------------ criterion 8

Outcome invariants(bool full) {
    if (!g_fits_ran) {
        bootstrap_recovery(full);
        tic_ordering();
    }
    std::ostringstream os;
    os << g_tally.fits << " fits, " << g_tally.stages << " stages, " << g_tally.nesting_checks
       << " nesting comparisons, " << g_tally.violations.size() << " violations";
    if (!g_tally.violations.empty()) os << " (first: " << g_tally.violations.front() << ")";
    return {g_tally.violations.empty() && g_tally.fits > 0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> which;
    bool full = false;
    app.add_option("-c,--criterion", which, "criterion number (repeatable); all when omitted")->check(CLI::Range(1, 8));
    app.add_flag("--full", full, "criterion 5 at 72 sites x 69 years");
    CLI11_PARSE(app, argc, argv);
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

    static const char* names[] = {"",
                                  "closed-form cross-checks",
                                  "density oracle",
                                  "definiteness certification",
                                  "simulation exactness",
                                  "bootstrap recovery",
                                  "TIC ordering",
                                  "random-scale regimes",
                                  "fit invariants"};
    bool all_pass = true;
    for (int c : which) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            switch (c) {
                case 1: o = closed_forms(); break;
                case 2: o = density_oracle(); break;
                case 3: o = definiteness(); break;
                case 4: o = simulation_exactness(); break;
                case 5: o = bootstrap_recovery(full); break;
                case 6: o = tic_ordering(); break;
                case 7: o = regimes(); break;
                case 8: o = invariants(full); break;
            }
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all_pass = all_pass && o.pass;
        std::printf("criterion %d %s: %s [%s, %.1f s]\n", c, o.pass ? "PASS" : "FAIL", names[c], o.summary.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
