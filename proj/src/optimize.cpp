#include "nsmax/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nsmax::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
    std::vector<double> x;
    double f;
    bool converged;
};

Run run_once(const std::function<double(const std::vector<double>&)>& eval, const std::vector<double>& x0,
             double f0, std::span<const double> steps, double default_step, const NelderMeadConfig& cfg,
             std::size_t& evals) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> sx(n + 1, x0);
    std::vector<double> fx(n + 1);
    fx[0] = f0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = steps.empty() ? default_step : steps[i];
        sx[i + 1][i] += s == 0.0 ? default_step : s;
        fx[i + 1] = eval(sx[i + 1]);
    }
    const std::size_t budget = evals + cfg.max_evals;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    auto diameter = [&](std::size_t best) {
        double d = 0.0;
        for (std::size_t v = 0; v <= n; ++v)
            for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(sx[v][i] - sx[best][i]));
        return d;
    };

    while (true) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        if (diameter(best) < cfg.xtol) return {sx[best], fx[best], true};
        if (evals >= budget) return {sx[best], fx[best], false};

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v <= n; ++v)
            if (v != worst)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += sx[v][i] / static_cast<double>(n);

        for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - sx[worst][i]);
        const double fr = eval(xr);
        if (fr < fx[best]) {
            for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - sx[worst][i]);
            const double fe = eval(xe);
            if (fe < fr) {
                sx[worst] = xe;
                fx[worst] = fe;
            } else {
                sx[worst] = xr;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr < fx[second]) {
            sx[worst] = xr;
            fx[worst] = fr;
            continue;
        }
        const bool outside = fr < fx[worst];
        for (std::size_t i = 0; i < n; ++i)
            xc[i] = outside ? centroid[i] + 0.5 * (xr[i] - centroid[i])
                            : centroid[i] + 0.5 * (sx[worst][i] - centroid[i]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fx[worst])) {
            sx[worst] = xc;
            fx[worst] = fc;
            continue;
        }
        for (std::size_t v = 0; v <= n; ++v) {
            if (v == best) continue;
            for (std::size_t i = 0; i < n; ++i) sx[v][i] = sx[best][i] + 0.5 * (sx[v][i] - sx[best][i]);
            fx[v] = eval(sx[v]);
        }
    }
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadConfig& cfg,
                             std::span<const double> steps) {
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : kInf;
    };
    res.f_start = eval(x0);
    res.x = x0;
    res.f = res.f_start;
    if (x0.empty()) {
        res.converged = true;
        return res;
    }

    Run r = run_once(eval, x0, res.f_start, steps, cfg.step, cfg, res.evaluations);
    if (r.f <= res.f) {
        res.x = r.x;
        res.f = r.f;
    }
    res.converged = r.converged;
    for (std::size_t k = 0; k < cfg.restarts; ++k) {
        const double before = res.f;
        // Fresh simplex around the incumbent with a shrinking edge.
        const double step = cfg.step / static_cast<double>(2 * (k + 1));
        Run rr = run_once(eval, res.x, res.f, {}, step, cfg, res.evaluations);
        if (rr.f <= res.f) {
            res.x = rr.x;
            res.f = rr.f;
            res.converged = rr.converged;
        }
        if (!(before - res.f > cfg.ftol * (1.0 + std::abs(before)))) break;
    }
    return res;
}

}  // namespace nsmax::optimize
