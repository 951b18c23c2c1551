#include "oracles.hpp"

#include "gdspin/baselines.hpp"
#include "gdspin/lbfgs.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gdspin;

namespace {

double rosenbrock(std::span<const double> x, std::span<double> g)
{
    double f = 0.0;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        f += 100.0 * a * a + b * b;
        g[i] += -400.0 * x[i] * a - 2.0 * b;
        g[i + 1] += 200.0 * a;
    }
    return f;
}

// f = 0.5 sum_i c_i x_i^2 with condition number 1e3.
double quadratic(std::span<const double> x, std::span<double> g)
{
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = std::pow(1e3, static_cast<double>(i) / static_cast<double>(x.size() - 1));
        f += 0.5 * c * x[i] * x[i];
        g[i] = c * x[i];
    }
    return f;
}

} // namespace

TEST_CASE("lbfgs on rosenbrock")
{
    LbfgsParams p;
    p.grad_tol = 1e-8;
    const auto r = minimize_lbfgs(rosenbrock, {-1.2, 1.0, -1.2, 1.0}, p);
    CHECK(r.status == LbfgsStatus::converged);
    for (double x : r.x) {
        CHECK(x == doctest::Approx(1.0).epsilon(1e-6));
    }
    for (std::size_t k = 1; k < r.history.size(); ++k) {
        CHECK(r.history[k] <= r.history[k - 1]);
    }
}

TEST_CASE("lbfgs beats steepest descent on an ill-conditioned quadratic")
{
    const std::size_t n = 20;
    std::vector<double> x0(n, 1.0);
    LbfgsParams p;
    p.grad_tol = 1e-6;
    const auto r = minimize_lbfgs(quadratic, x0, p);
    CHECK(r.status == LbfgsStatus::converged);

    // steepest descent with the optimal fixed step 2 / (L + mu)
    std::vector<double> x = x0;
    std::vector<double> g(n);
    int gd_iters = 0;
    const double step = 2.0 / (1e3 + 1.0);
    while (true) {
        quadratic(x, g);
        double gmax = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::abs(v));
        }
        if (gmax <= p.grad_tol || gd_iters > 1000000) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            x[i] -= step * g[i];
        }
        ++gd_iters;
    }
    CHECK(r.iterations * 10 < gd_iters);
}

TEST_CASE("strong wolfe line search")
{
    // phi(a) = (a - 2)^2 - 4 has phi'(0) = -4
    const LineFunction phi = [](double a) { return std::pair{(a - 2) * (a - 2) - 4, 2 * (a - 2)}; };
    for (double a0 : {0.01, 1.0, 10.0}) {
        const auto r = line_search_strong_wolfe(phi, 0.0, -4.0, a0, 1e-4, 0.1, 40);
        REQUIRE(r.ok);
        CHECK(r.f <= 1e-4 * r.alpha * -4.0);
        CHECK(std::abs(r.dg) <= 0.1 * 4.0);
    }
    CHECK_FALSE(line_search_strong_wolfe(phi, 0.0, 1.0, 1.0, 1e-4, 0.9, 40).ok);
    LbfgsParams bad;
    bad.c1 = 0.95;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("antiferromagnetic triangle")
{
    const auto J = CouplingMatrix::dense(3, {0, -1, -1, -1, 0, -1, -1, -1, 0});
    // grid search over theta_2, theta_3 with theta_1 = 0
    double grid_min = INFINITY;
    const int m = 360;
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            const std::vector<double> t{0.0, kTwoPi * a / m, kTwoPi * b / m};
            grid_min = std::min(grid_min, oracle::xy_energy({0, -1, -1, -1, 0, -1, -1, -1, 0}, 3, t));
        }
    }
    CHECK(grid_min == doctest::Approx(-3.0).epsilon(1e-9));
    const auto r = mc_multistart(J, {}, 5, LbfgsParams{}, 1);
    CHECK(r.best_energy == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(r.method == "mc");
}

TEST_CASE("local minimum is stationary")
{
    const std::size_t n = 12;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 31));
    const auto m = lbfgs_minimize(J, {}, random_configuration(n, 32), LbfgsParams{});
    CHECK(m.converged);
    const auto g = xy_gradient(J, {}, m.conf);
    for (double v : g) {
        CHECK(std::abs(v) < 1e-8);
    }
    CHECK(m.energy == doctest::Approx(xy_energy(J, m.conf)).epsilon(1e-14));
    CHECK(m.history.front() >= m.energy);
}

TEST_CASE("mc and basin hopping agree on the global minimum")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const std::size_t n = 8;
        const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 300 + seed));
        const auto mc = mc_multistart(J, {}, 200, LbfgsParams{}, seed);
        double bh_best = INFINITY;
        for (std::uint64_t s = 0; s < 20; ++s) {
            BasinHoppingParams bh;
            bh.seed = s;
            const auto r = basin_hopping(J, {}, random_configuration(n, 1000 + s), bh, LbfgsParams{});
            bh_best = std::min(bh_best, r.record.best_energy);
        }
        CHECK(std::abs(mc.best_energy - bh_best) <= 1e-9 * std::abs(mc.best_energy));
    }
}

TEST_CASE("basin hopping bookkeeping")
{
    const std::size_t n = 10;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 41));
    BasinHoppingParams bh;
    bh.seed = 5;
    bh.n_hops = 15;
    const auto r = basin_hopping(J, {}, random_configuration(n, 6), bh, LbfgsParams{});
    CHECK(r.accepted_energies.size() == 16);
    CHECK(r.accepted >= 0);
    CHECK(r.accepted <= 15);
    for (double e : r.accepted_energies) {
        CHECK(r.record.best_energy <= e);
    }
    CHECK(r.record.method == "bh");
    const auto again = basin_hopping(J, {}, random_configuration(n, 6), bh, LbfgsParams{});
    CHECK(r.record.same_outcome(again.record));

    bh.n_hops = -1;
    CHECK_THROWS(bh.validate());
    bh = BasinHoppingParams{};
    bh.temperature = 0.0;
    CHECK_THROWS(bh.validate());
}

TEST_CASE("metropolis rule")
{
    CHECK(metropolis_accept(-1.0, 1.0, 0.999));
    CHECK(metropolis_accept(0.0, 1.0, 0.999));
    CHECK_FALSE(metropolis_accept(1.0, 1.0, 0.5));
    CHECK(metropolis_accept(1.0, 1.0, 0.3));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int trials = 200000;
    for (double dE : {0.5, 1.0, 2.0}) {
        int hits = 0;
        for (int k = 0; k < trials; ++k) {
            hits += metropolis_accept(dE, 0.8, u(rng)) ? 1 : 0;
        }
        const double p = std::exp(-dE / 0.8);
        const double sigma = std::sqrt(p * (1 - p) / trials);
        CHECK(std::abs(static_cast<double>(hits) / trials - p) < 5 * sigma);
    }
}

TEST_CASE("baselines on the generalized landscape")
{
    const std::size_t n = 6;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 51));
    const auto f = FieldSpec::ising(n, 1.5 * J.max_abs_row_sum());
    const auto land = Landscape::generalized(J, f, 1.0);
    const auto r = mc_multistart(land, 50, LbfgsParams{}, 3);
    const auto d = discretize(r.best_conf, ModelTag::ising());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(std::remainder(r.best_conf[i] - d[i], kTwoPi)));
    }
    CHECK(worst < 1e-6);
    const double brute = oracle::ising_brute_force(
        [&] {
            std::vector<double> a(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    a[i * n + j] = J(i, j);
                }
            }
            return a;
        }(),
        n);
    CHECK(ising_energy(J, d.ising_spins()) == doctest::Approx(brute));
}
