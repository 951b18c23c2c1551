#include "gdspin/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gdspin {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sup_norm(std::span<const double> a)
{
    double m = 0.0;
    for (double x : a) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

// Minimiser of the cubic matching (a, fa, da) and (b, fb, db), falling back
// to bisection when the cubic has no real minimiser.
double cubic_step(double a, double fa, double da, double b, double fb, double db)
{
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) {
        return 0.5 * (a + b);
    }
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) {
        return 0.5 * (a + b);
    }
    const double x = b - (b - a) * (db + d2 - d1) / denom;
    return std::isfinite(x) ? x : 0.5 * (a + b);
}

struct Point {
    double alpha;
    double f;
    double dg;
};

} // namespace

void LbfgsParams::validate() const
{
    if (memory < 1) {
        throw std::invalid_argument("L-BFGS memory must be >= 1");
    }
    if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) {
        throw std::invalid_argument("line search constants need 0 < c1 < c2 < 1");
    }
    if (max_iters < 0 || grad_tol < 0.0 || max_line_search < 1) {
        throw std::invalid_argument("invalid L-BFGS limits");
    }
}

LineSearchResult line_search_strong_wolfe(const LineFunction& phi, double f0, double dg0,
                                          double alpha0, double c1, double c2, int max_evals)
{
    LineSearchResult result;
    if (!(dg0 < 0.0)) {
        return result;
    }
    // Near a minimum the decrease c1 alpha dg0 drops below the rounding error
    // of f; there the approximate Wolfe test on the slope stands in for it.
    const double f_tol = 1e-12 * std::max(1.0, std::abs(f0));
    const auto armijo = [&](const Point& p) {
        return p.f <= f0 + c1 * p.alpha * dg0 || (p.f <= f0 + f_tol && p.dg <= (2 * c1 - 1) * dg0);
    };
    const auto curvature = [&](const Point& p) { return std::abs(p.dg) <= -c2 * dg0; };

    int evals = 0;
    const auto eval = [&](double alpha) {
        ++evals;
        const auto [f, dg] = phi(alpha);
        return Point{alpha, f, dg};
    };
    const auto finish = [&](const Point& p, bool ok) {
        result.ok = ok;
        result.alpha = p.alpha;
        result.f = p.f;
        result.dg = p.dg;
        result.evaluations = evals;
        return result;
    };

    // lo always satisfies sufficient decrease and has the lowest f seen so far
    auto zoom = [&](Point lo, Point hi) {
        while (evals < max_evals) {
            const double left = std::min(lo.alpha, hi.alpha);
            const double right = std::max(lo.alpha, hi.alpha);
            const double width = right - left;
            if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, right)) {
                break;
            }
            double a = cubic_step(lo.alpha, lo.f, lo.dg, hi.alpha, hi.f, hi.dg);
            a = std::clamp(a, left + 0.1 * width, right - 0.1 * width);
            const Point p = eval(a);
            if (!std::isfinite(p.f) || !armijo(p) || p.f >= lo.f) {
                hi = p;
            }
            else {
                if (curvature(p)) {
                    return finish(p, true);
                }
                if (p.dg * (hi.alpha - lo.alpha) >= 0.0) {
                    hi = lo;
                }
                lo = p;
            }
        }
        return finish(lo, false);
    };

    Point prev{0.0, f0, dg0};
    double alpha = alpha0;
    constexpr double alpha_max = 1e10;
    while (evals < max_evals) {
        const Point p = eval(alpha);
        if (!std::isfinite(p.f) || !armijo(p) || (evals > 1 && p.f >= prev.f)) {
            return zoom(prev, p);
        }
        if (curvature(p)) {
            return finish(p, true);
        }
        if (p.dg >= 0.0) {
            return zoom(p, prev);
        }
        prev = p;
        alpha = std::min(2.0 * alpha, alpha_max);
    }
    return finish(prev, false);
}

LbfgsOutcome minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                            const LbfgsParams& params)
{
    params.validate();
    const std::size_t n = x0.size();

    LbfgsOutcome out;
    out.x = std::move(x0);
    out.grad.assign(n, 0.0);
    out.f = objective(out.x, out.grad);
    out.evaluations = 1;
    out.history.push_back(out.f);

    std::deque<std::vector<double>> s_hist;
    std::deque<std::vector<double>> y_hist;
    std::deque<double> rho_hist;
    std::vector<double> d(n);
    std::vector<double> alpha_coef(static_cast<std::size_t>(params.memory));
    std::vector<double> x_trial(n);
    std::vector<double> g_trial(n);
    double trial_alpha = -1.0;
    double trial_f = 0.0;

    out.status = LbfgsStatus::max_iterations;
    while (true) {
        if (sup_norm(out.grad) <= params.grad_tol) {
            out.status = LbfgsStatus::converged;
            break;
        }
        if (out.iterations >= params.max_iters) {
            break;
        }

        // two-loop recursion: d = -H g
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = -out.grad[i];
        }
        const std::size_t m = s_hist.size();
        for (std::size_t k = m; k-- > 0;) {
            alpha_coef[k] = rho_hist[k] * dot(s_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) {
                d[i] -= alpha_coef[k] * y_hist[k][i];
            }
        }
        if (m > 0) {
            const double gamma = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
            for (double& v : d) {
                v *= gamma;
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) {
                d[i] += (alpha_coef[k] - beta) * s_hist[k][i];
            }
        }

        double dg0 = dot(d, out.grad);
        if (!(dg0 < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = -out.grad[i];
            }
            dg0 = dot(d, out.grad);
        }
        const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(out.grad, out.grad)))
                                             : 1.0;

        const auto phi = [&](double alpha) {
            for (std::size_t i = 0; i < n; ++i) {
                x_trial[i] = out.x[i] + alpha * d[i];
            }
            trial_f = objective(x_trial, g_trial);
            trial_alpha = alpha;
            ++out.evaluations;
            return std::pair{trial_f, dot(g_trial, d)};
        };
        const LineSearchResult ls =
            line_search_strong_wolfe(phi, out.f, dg0, alpha0, params.c1, params.c2,
                                     params.max_line_search);
        if (!(ls.alpha > 0.0) || !(ls.ok || ls.f < out.f)) {
            out.status = LbfgsStatus::line_search_failed;
            break;
        }
        if (trial_alpha != ls.alpha) {
            phi(ls.alpha);
        }

        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_trial[i] - out.x[i];
            y[i] = g_trial[i] - out.grad[i];
        }
        const double sy = dot(s, y);
        out.x.swap(x_trial);
        out.grad.swap(g_trial);
        out.f = trial_f;
        trial_alpha = -1.0;
        ++out.iterations;
        out.history.push_back(out.f);

        if (!ls.ok) {
            // accepted a decreasing step without the curvature condition
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            continue;
        }
        if (sy > std::numeric_limits<double>::epsilon() * std::sqrt(dot(y, y) * dot(s, s))) {
            if (s_hist.size() == static_cast<std::size_t>(params.memory)) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            rho_hist.push_back(1.0 / sy);
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
        }
    }
    return out;
}

} // namespace gdspin
