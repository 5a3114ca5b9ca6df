#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace scorecast {

struct NelderMeadOptions {
    double initial_step = 0.25;
    double diameter_tol = 1e-6;
    std::size_t max_iterations = 2000;
    std::size_t restarts = 1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fmin = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

/// One Nelder-Mead run from a given starting simplex scale. Convergence is
/// declared on the simplex diameter in x-space (max infinity-norm distance
/// from the best vertex), which makes the iterate path invariant to positive
/// rescaling of the objective.
inline NelderMeadResult nelder_mead_run(const std::function<double(const std::vector<double>&)>& f,
                                        const std::vector<double>& x0, double step,
                                        double diameter_tol, std::size_t max_iterations) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i + 1][i] += step * std::max(1.0, std::fabs(x0[i]));
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadResult res;
    res.iterations = 0;

    auto diameter = [&]() {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                d = std::max(d, std::fabs(xs[order[i]][j] - xs[order[0]][j]));
            }
        }
        return d;
    };

    for (;;) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        if (diameter() < diameter_tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_iterations) break;
        ++res.iterations;

        const std::size_t worst = order[n];
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[order[i]][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) {
                p[j] = centroid[j] + coef * (centroid[j] - xs[worst][j]);
            }
            return p;
        };

        std::vector<double> xr = blend(alpha);
        double fr = f(xr);
        if (fr < fs[order[0]]) {
            std::vector<double> xe = blend(alpha * gamma);
            double fe = f(xe);
            if (fe < fr) {
                xs[worst] = std::move(xe);
                fs[worst] = fe;
            } else {
                xs[worst] = std::move(xr);
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[order[n - 1]]) {
            xs[worst] = std::move(xr);
            fs[worst] = fr;
            continue;
        }
        // Contraction: outside when the reflection improved on the worst
        // vertex, inside otherwise.
        const bool outside = fr < fs[worst];
        std::vector<double> xc = blend(outside ? rho : -rho);
        double fc = f(xc);
        if (fc < (outside ? fr : fs[worst])) {
            xs[worst] = std::move(xc);
            fs[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            std::size_t k = order[i];
            for (std::size_t j = 0; j < n; ++j) {
                xs[k][j] = xs[order[0]][j] + sigma * (xs[k][j] - xs[order[0]][j]);
            }
            fs[k] = f(xs[k]);
        }
    }

    res.x = xs[order[0]];
    res.fmin = fs[order[0]];
    return res;
}

}  // namespace detail

/// Derivative-free minimization of f from x0. After the first run the search
/// restarts from the incumbent with a smaller simplex (options.restarts
/// times), which guards against premature contraction along a ridge.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& options = {}) {
    if (x0.empty()) throw std::invalid_argument("nelder_mead: empty start point");
    NelderMeadResult best = detail::nelder_mead_run(f, x0, options.initial_step,
                                                    options.diameter_tol, options.max_iterations);
    double step = options.initial_step;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        step *= 0.1;
        NelderMeadResult next = detail::nelder_mead_run(f, best.x, step, options.diameter_tol,
                                                        options.max_iterations);
        next.iterations += best.iterations;
        if (next.fmin <= best.fmin) {
            best = std::move(next);
        } else {
            best.iterations = next.iterations;
        }
    }
    return best;
}

}  // namespace scorecast
