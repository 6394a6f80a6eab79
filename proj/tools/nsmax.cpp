// Command-line front end: check, fit, compare, bootstrap, diagnose, margins, simulate, regimes.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsmax/config.hpp"
#include "nsmax/empirical.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/inference.hpp"
#include "nsmax/io.hpp"
#include "nsmax/random_scale.hpp"
#include "nsmax/simulation.hpp"
#include "nsmax/validity.hpp"

using namespace nsmax;

namespace {

// Writes to `path`, or stdout for "-" / empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw IngestError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

struct Data {
    SiteSet sites;
    BlockMaximaPanel panel;
};

// Loads panel + metadata; fits GEV margins unless the panel is already unit Frechet.
Data load_data(const std::string& panel, const std::string& meta, bool frechet) {
    auto [sites, raw] = io::load_panel(panel, meta);
    if (frechet) return {sites, raw.with_values(raw.values(), MarginState::UnitFrechet)};
    const auto margins = empirical::fit_margins(raw, sites.ids());
    return {sites, empirical::to_unit_frechet(raw, margins)};
}

SiteSet load_sites(const std::string& meta) {
    const auto records = io::read_site_metadata(meta);
    return io::sites_from_records(records);
}

std::vector<Structure> parse_structures(const std::string& list) {
    std::vector<Structure> out;
    std::stringstream ss(list);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(structure_from_string(tok));
    if (out.empty()) throw ValidationError("empty model list");
    return out;
}

inference::FitConfig fit_config(std::size_t max_evals, std::size_t restarts) {
    inference::FitConfig cfg;
    cfg.nm.max_evals = max_evals;
    cfg.nm.restarts = restarts;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial max-stable modelling with covariate-driven non-stationarity"};
    app.require_subcommand(1);

    std::string model, panel_csv, meta_csv, out = "-";
    std::uint64_t seed = 1;
    bool frechet = false;
    std::size_t max_evals = 4000, restarts = 3;

    auto add_data = [&](CLI::App* c) {
        c->add_option("--panel", panel_csv, "panel CSV (year,<site ids>)")->required()->check(CLI::ExistingFile);
        c->add_option("--sites", meta_csv, "site metadata CSV (site_id,lon,lat,alt_m)")->required()->check(CLI::ExistingFile);
        c->add_flag("--frechet", frechet, "panel is already on the unit Frechet scale");
    };
    auto add_opt = [&](CLI::App* c) {
        c->add_option("--max-evals", max_evals, "Nelder-Mead evaluations per run");
        c->add_option("--restarts", restarts, "restarts of the final stage");
    };

    // check
    auto* check = app.add_subcommand("check", "certify definiteness of a model's kernel");
    std::size_t trials = 100, n_sites = 10;
    check->add_option("--model", model, "model JSON")->required()->check(CLI::ExistingFile);
    check->add_option("--trials", trials, "number of random site draws");
    check->add_option("--n-sites", n_sites, "sites per draw");
    check->add_option("--seed", seed);
    check->add_option("--out", out);

    // fit
    auto* fitc = app.add_subcommand("fit", "fit one model by staged pairwise likelihood");
    bool with_tic = false;
    fitc->add_option("--model", model, "model JSON (start values, fixed parameters)")->required()->check(CLI::ExistingFile);
    add_data(fitc);
    add_opt(fitc);
    fitc->add_flag("--tic", with_tic, "also compute TIC");
    fitc->add_option("--out", out);

    // compare
    auto* cmp = app.add_subcommand("compare", "fit several structures and tabulate TIC");
    std::string family = "ET", models = "iso,aniso,M1";
    cmp->add_option("--family", family, "BR or ET");
    cmp->add_option("--models", models, "comma-separated structures");
    add_data(cmp);
    add_opt(cmp);
    cmp->add_option("--out", out);

    // bootstrap
    auto* boot = app.add_subcommand("bootstrap", "parametric bootstrap from a fitted model");
    std::size_t years = 69, reps = 20;
    boot->add_option("--model", model, "fitted model JSON (the truth)")->required()->check(CLI::ExistingFile);
    boot->add_option("--sites", meta_csv, "site metadata CSV")->required()->check(CLI::ExistingFile);
    boot->add_option("--years", years);
    boot->add_option("--reps", reps);
    boot->add_option("--seed", seed);
    add_opt(boot);
    boot->add_option("--out", out);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "empirical vs fitted extremal coefficients by distance");
    std::vector<std::string> diag_models;
    diag->add_option("--model", diag_models, "fitted model JSON (repeatable)")->check(CLI::ExistingFile);
    add_data(diag);
    diag->add_option("--out", out);

    // margins
    auto* marg = app.add_subcommand("margins", "site-wise GEV estimates");
    marg->add_option("--panel", panel_csv)->required()->check(CLI::ExistingFile);
    marg->add_option("--sites", meta_csv)->required()->check(CLI::ExistingFile);
    marg->add_option("--out", out);

    // simulate
    auto* sim = app.add_subcommand("simulate", "exact simulation at sites or on a grid");
    std::string sites_arg, covariates;
    sim->add_option("--model", model, "model JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--sites", sites_arg, "site metadata CSV or grid:x0,x1,y0,y1,nx,ny")->required();
    sim->add_option("--covariates", covariates, "site metadata CSV interpolated onto a grid")->check(CLI::ExistingFile);
    sim->add_option("--reps", reps, "replicates")->default_val(100);
    sim->add_option("--seed", seed);
    sim->add_option("--out", out);

    // regimes
    auto* reg = app.add_subcommand("regimes", "random-scale tail dependence experiments");
    std::string which = "thm52";
    std::size_t n_draws = 1'000'000;
    reg->add_option("--which", which, "thm51, thm52 or thm53")->required();
    reg->add_option("--n", n_draws);
    reg->add_option("--seed", seed);
    reg->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) {
            const auto spec = config::read_spec(model);
            const auto rep = validity::check_spec(spec, n_sites, trials, seed);
            Output o(out);
            o.stream() << rep.to_json().dump(2) << '\n';
            return rep.passed ? 0 : 3;
        }
        if (*fitc) {
            const auto start = config::read_spec(model);
            const auto d = load_data(panel_csv, meta_csv, frechet);
            inference::FitSession session(d.panel, d.sites, start.family(), fit_config(max_evals, restarts));
            for (const auto& n : start.names())
                if (start.is_fixed(n)) session.fix(n, start.get(n));
            auto rep = session.fit(start, inference::StagePlan::default_for(start.family(), start.structure()));
            if (with_tic) inference::tic(session.data(), rep, true);
            Output o(out);
            o.stream() << config::report_to_json(rep).dump(2) << '\n';
            return 0;
        }
        if (*cmp) {
            const auto d = load_data(panel_csv, meta_csv, frechet);
            const auto structs = parse_structures(models);
            const auto rows = inference::compare(d.panel, d.sites, family_from_string(family), structs,
                                                 fit_config(max_evals, restarts));
            Output o(out);
            o.stream() << "model,TIC,loglik,converged\n";
            for (const auto& r : rows)
                o.stream() << r.model << ',' << io::format_double(r.tic) << ',' << io::format_double(r.loglik) << ','
                           << (r.converged ? "true" : "false") << '\n';
            return 0;
        }
        if (*boot) {
            const auto truth = config::read_spec(model);
            const auto sites = load_sites(meta_csv);
            const auto res = inference::bootstrap(truth, sites, years, reps, seed, fit_config(max_evals, restarts));
            Output o(out);
            o.stream() << "parameter,true_value,mean,sd\n";
            for (const auto& r : res.rows)
                o.stream() << r.parameter << ',' << io::format_double(r.truth) << ',' << io::format_double(r.mean)
                           << ',' << (r.sd ? io::format_double(*r.sd) : std::string("NA")) << '\n';
            if (res.n_failed) log_note(std::to_string(res.n_failed) + " non-converged replicates excluded");
            return 0;
        }
        if (*diag) {
            const auto d = load_data(panel_csv, meta_csv, frechet);
            std::vector<DependenceSpec> specs;
            std::vector<std::string> labels;
            for (const auto& m : diag_models) {
                specs.push_back(config::read_spec(m));
                labels.push_back(to_string(specs.back().family()) + "_" + to_string(specs.back().structure()));
            }
            const auto rows = empirical::theta_vs_distance(d.panel, d.sites, specs);
            Output o(out);
            empirical::write_theta_csv(o.stream(), rows, d.sites, labels);
            return 0;
        }
        if (*marg) {
            auto [sites, raw] = io::load_panel(panel_csv, meta_csv);
            const auto fits = empirical::fit_margins(raw, sites.ids());
            Output o(out);
            o.stream() << "site_id,xi,mu,sigma\n";
            for (std::size_t i = 0; i < fits.size(); ++i)
                o.stream() << sites.id(i) << ',' << io::format_double(fits[i].xi) << ','
                           << io::format_double(fits[i].mu) << ',' << io::format_double(fits[i].sigma) << '\n';
            return 0;
        }
        if (*sim) {
            const auto spec = config::read_spec(model);
            Output o(out);
            if (sites_arg.rfind("grid:", 0) == 0) {
                std::optional<SiteSet> source;
                if (!covariates.empty()) source = load_sites(covariates);
                const auto field = simulation::simulate_field_grid(simulation::parse_grid(sites_arg), spec, reps, seed,
                                                                   source ? &*source : nullptr);
                simulation::write_grid_csv(o.stream(), field);
            } else {
                const auto sites = load_sites(sites_arg);
                const auto panel = simulation::simulate_exact(sites, spec, reps, seed);
                io::write_panel_csv(o.stream(), panel, sites.ids());
            }
            return 0;
        }
        if (*reg) {
            const auto r = random_scale::regime_from_string(which);
            auto cfg = random_scale::default_config(r);
            cfg.n = n_draws;
            const auto res = random_scale::regime_experiment(r, cfg, seed);
            Output o(out);
            random_scale::write_chi_csv(o.stream(), res.curve);
            std::cerr << "verdict: " << res.verdict << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
