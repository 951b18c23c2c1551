#include "oracles.hpp"

#include "gdspin/gd.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace gdspin;

namespace {

GdParams quiet_params()
{
    GdParams p;
    p.noise = 0.0;
    return p;
}

// Term-by-term evaluation of the rate equations on a dense matrix with K in
// row-major layout.
struct OracleDerivative {
    std::vector<std::complex<double>> psi;
    std::vector<double> gamma;
    std::vector<double> K;
};

OracleDerivative oracle_rhs(const std::vector<double>& J, std::size_t n,
                            const std::vector<std::complex<double>>& psi, const std::vector<double>& gamma,
                            const std::vector<double>& K, bool gain,
                            const std::vector<std::pair<int, std::vector<double>>>& fields,
                            const GdParams& p, const std::vector<std::complex<double>>& xi)
{
    OracleDerivative d;
    d.psi.resize(n);
    d.gamma.resize(n);
    d.K.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> v = psi[i] * (gamma[i] - p.gamma_c - std::norm(psi[i]));
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double delta = gain ? gamma[i] + gamma[j] : 1.0;
            const double k = gain ? K[i * n + j] : J[i * n + j];
            v += delta * k * psi[j];
            if (gain) {
                d.K[i * n + j] = p.eps_hat * (J[i * n + j] - delta * k);
            }
        }
        for (const auto& [q, h] : fields) {
            std::complex<double> c(1.0, 0.0);
            for (int r = 0; r < q - 1; ++r) {
                c *= std::conj(psi[i]);
            }
            v += h[i] * c;
        }
        if (!xi.empty()) {
            v += p.noise * xi[i];
        }
        d.psi[i] = v;
        d.gamma[i] = p.eps * (p.rho_th - std::norm(psi[i]));
    }
    return d;
}

OscillatorState random_state(const CouplingMatrix& J, CouplingMode mode, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto s = OscillatorState::vacuum(J, mode);
    for (auto& z : s.psi) {
        z = {u(rng), u(rng)};
    }
    for (auto& g : s.gamma_inj) {
        g = 1.0 + 0.5 * u(rng);
    }
    if (mode == CouplingMode::gain) {
        const std::size_t n = J.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = J(i, j) * (1.0 + 0.3 * u(rng));
                s.K[i * n + j] = v;
                s.K[j * n + i] = v;
            }
        }
    }
    return s;
}

double state_distance(const OscillatorState& a, const OscillatorState& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a.psi[i] - b.psi[i]));
        d = std::max(d, std::abs(a.gamma_inj[i] - b.gamma_inj[i]));
    }
    for (std::size_t k = 0; k < a.K.size(); ++k) {
        d = std::max(d, std::abs(a.K[k] - b.K[k]));
    }
    return d;
}

OscillatorState integrate(OscillatorState s, const CouplingMatrix& J, const FieldSpec& f, CouplingMode mode,
                          GdParams p, double T, int steps)
{
    p.dt = T / steps;
    for (int k = 0; k < steps; ++k) {
        s = step_rk4(s, J, f, mode, p);
    }
    return s;
}

// Dormand-Prince 5(4) with error control on y = (Re psi, Im psi, gamma) for
// one uncoupled site.
using Vec3 = std::array<double, 3>;

Vec3 single_site(const Vec3& y, const GdParams& p)
{
    const double rho = y[0] * y[0] + y[1] * y[1];
    const double a = y[2] - p.gamma_c - rho;
    return {a * y[0], a * y[1], p.eps * (p.rho_th - rho)};
}

Vec3 dopri(Vec3 y, double t0, double t1, const GdParams& p, double tol)
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;
    double t = t0;
    double h = 1e-3;
    auto axpy = [](const Vec3& y0, std::initializer_list<std::pair<double, const Vec3*>> terms, double hh) {
        Vec3 r = y0;
        for (const auto& [c, k] : terms) {
            for (int i = 0; i < 3; ++i) {
                r[i] += hh * c * (*k)[i];
            }
        }
        return r;
    };
    while (t < t1) {
        h = std::min(h, t1 - t);
        const Vec3 k1 = single_site(y, p);
        const Vec3 k2 = single_site(axpy(y, {{a21, &k1}}, h), p);
        const Vec3 k3 = single_site(axpy(y, {{a31, &k1}, {a32, &k2}}, h), p);
        const Vec3 k4 = single_site(axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h), p);
        const Vec3 k5 = single_site(axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h), p);
        const Vec3 k6 =
            single_site(axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h), p);
        const Vec3 y5 = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
        const Vec3 k7 = single_site(y5, p);
        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            err = std::max(err, std::abs(e) / (tol + tol * std::abs(y5[i])));
        }
        if (err <= 1.0) {
            t += h;
            y = y5;
        }
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    }
    return y;
}

} // namespace

TEST_CASE("params validation")
{
    GdParams p;
    CHECK(p.validate().empty());
    p.dt = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = GdParams{};
    p.rho_th = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = GdParams{};
    p.noise = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = GdParams{};
    p.dt = 0.9;
    CHECK_FALSE(p.validate().empty());
    p = GdParams{};
    p.window = 5000.0;
    CHECK_FALSE(p.validate().empty());
}

TEST_CASE("rhs at the vacuum")
{
    const auto J = CouplingMatrix::dense(3, oracle::random_symmetric(3, 1));
    for (auto mode : {CouplingMode::dissipative, CouplingMode::gain}) {
        const auto s = OscillatorState::vacuum(J, mode);
        const auto p = quiet_params();
        const auto d = rhs(s, J, FieldSpec{}, mode, p);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(d.psi[i] == cplx(0.0, 0.0));
            CHECK(d.gamma_inj[i] == doctest::Approx(p.eps * p.rho_th));
        }
    }
}

TEST_CASE("single site fixed point")
{
    const auto J = CouplingMatrix::dense(1, {0.0});
    auto p = quiet_params();
    p.rho_th = 2.0;
    auto s = OscillatorState::vacuum(J, CouplingMode::dissipative);
    s.psi[0] = std::polar(std::sqrt(p.rho_th), 0.7);
    s.gamma_inj[0] = p.gamma_c + p.rho_th;
    const auto d = rhs(s, J, FieldSpec{}, CouplingMode::dissipative, p);
    CHECK(std::abs(d.psi[0]) < 1e-14);
    CHECK(std::abs(d.gamma_inj[0]) < 1e-14);
    CHECK(fixed_point_residual(s, J, FieldSpec{}, p) < 1e-12);

    const auto v = OscillatorState::vacuum(J, CouplingMode::dissipative);
    CHECK(fixed_point_residual(v, J, FieldSpec{}, p) == doctest::Approx(p.rho_th + p.gamma_c));
}

TEST_CASE("rhs matches an independent evaluation")
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 3 + seed % 3;
        const auto a = oracle::random_symmetric(n, 40 + seed, 1.0);
        const auto J = CouplingMatrix::dense(n, a);
        const std::vector<std::pair<int, std::vector<double>>> raw{
            {1, oracle::random_phases(n, 50 + seed)},
            {2, std::vector<double>(n, 1.3)},
            {4, oracle::random_phases(n, 60 + seed)}};
        std::vector<FieldTerm> terms;
        for (const auto& [q, h] : raw) {
            terms.push_back({q, h});
        }
        const FieldSpec f(terms);
        GdParams p;
        p.noise = 0.3;
        std::vector<cplx> xi(n);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        for (auto& x : xi) {
            x = {nd(rng), nd(rng)};
        }
        for (auto mode : {CouplingMode::dissipative, CouplingMode::gain}) {
            const auto s = random_state(J, mode, 70 + seed);
            const bool gain = mode == CouplingMode::gain;
            const auto ref = oracle_rhs(a, n, s.psi, s.gamma_inj, s.K, gain, raw, p, xi);
            const auto d = rhs(s, J, f, mode, p, xi);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(d.psi[i] - ref.psi[i]) < 1e-12);
                CHECK(std::abs(d.gamma_inj[i] - ref.gamma[i]) < 1e-14);
            }
            if (gain) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (i != j) {
                            CHECK(std::abs(d.K[i * n + j] - ref.K[i * n + j]) < 1e-14);
                        }
                    }
                }
            }
        }
    }
    const auto J = CouplingMatrix::dense(2, {0.0, 1.0, 1.0, 0.0});
    auto s = OscillatorState::vacuum(J, CouplingMode::dissipative);
    CHECK_THROWS_AS(rhs(s, J, FieldSpec::ising(3, 1.0), CouplingMode::dissipative, GdParams{}), DimensionError);
    s.psi.pop_back();
    CHECK_THROWS_AS(rhs(s, J, FieldSpec{}, CouplingMode::dissipative, GdParams{}), DimensionError);
}

TEST_CASE("rk4 preserves a fixed point")
{
    const std::size_t n = 4;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 9, 0.3));
    auto p = quiet_params();
    auto s = OscillatorState::vacuum(J, CouplingMode::dissipative);
    for (std::size_t i = 0; i < n; ++i) {
        // all phases equal is stationary for any J
        s.psi[i] = std::polar(std::sqrt(p.rho_th), 1.1);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum += J(i, j);
        }
        s.gamma_inj[i] = p.rho_th + p.gamma_c - sum;
    }
    CHECK(fixed_point_residual(s, J, FieldSpec{}, p) < 1e-12);
    auto t = s;
    for (int k = 0; k < 100; ++k) {
        t = step_rk4(t, J, FieldSpec{}, CouplingMode::dissipative, p);
    }
    CHECK(state_distance(s, t) < 1e-10);
}

TEST_CASE("rk4 convergence order")
{
    const std::size_t n = 4;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 21, 0.4));
    const FieldSpec f = FieldSpec::ising(n, 0.5);
    for (auto mode : {CouplingMode::dissipative, CouplingMode::gain}) {
        const auto s0 = random_state(J, mode, 22);
        auto p = quiet_params();
        p.eps = 0.3;
        p.eps_hat = 0.3;
        const double T = 1.0;
        const auto y1 = integrate(s0, J, f, mode, p, T, 16);
        const auto y2 = integrate(s0, J, f, mode, p, T, 32);
        const auto y3 = integrate(s0, J, f, mode, p, T, 64);
        const double order = std::log2(state_distance(y1, y2) / state_distance(y2, y3));
        CHECK(order >= 3.7);
        CHECK(order <= 4.3);
    }
}

TEST_CASE("single site against an adaptive integrator")
{
    const auto J = CouplingMatrix::dense(1, {0.0});
    auto p = quiet_params();
    p.rho_th = 1.0;
    p.eps = 0.05;
    p.dt = 0.02;
    auto s = OscillatorState::vacuum(J, CouplingMode::dissipative);
    s.psi[0] = {0.01, 0.0};
    Vec3 y{0.01, 0.0, 0.0};
    double t = 0.0;
    for (double checkpoint : {50.0, 100.0, 200.0, 400.0}) {
        const int steps = static_cast<int>(std::lround((checkpoint - t) / p.dt));
        for (int k = 0; k < steps; ++k) {
            s = step_rk4(s, J, FieldSpec{}, CouplingMode::dissipative, p);
        }
        y = dopri(y, t, checkpoint, p, 1e-12);
        t = checkpoint;
        CHECK(std::abs(s.psi[0].real() - y[0]) < 1e-7);
        CHECK(std::abs(s.gamma_inj[0] - y[2]) < 1e-7);
    }
    CHECK(std::abs(s.density(0) - p.rho_th) < 1e-6);
}

TEST_CASE("gain clamp and abort")
{
    const auto J = CouplingMatrix::dense(1, {0.0});
    auto p = quiet_params();
    auto s = OscillatorState::vacuum(J, CouplingMode::dissipative);
    s.psi[0] = {3.0, 0.0};
    s.gamma_inj[0] = 0.0;
    const auto t = step_rk4(s, J, FieldSpec{}, CouplingMode::dissipative, p);
    CHECK(t.gamma_inj[0] == 0.0);

    p.dt = 5.0;
    s.psi[0] = {30.0, 0.0};
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 10; ++k) {
                s = step_rk4(s, J, FieldSpec{}, CouplingMode::dissipative, p);
            }
        }(),
        NumericalAbort);
}

TEST_CASE("k is clamped in gain mode")
{
    const auto J = CouplingMatrix::dense(2, {0.0, 1.0, 1.0, 0.0});
    auto p = quiet_params();
    p.k_max = 2.0;
    auto s = OscillatorState::vacuum(J, CouplingMode::gain);
    s.K = {0.0, 5.0, 5.0, 0.0};
    const auto t = step_rk4(s, J, FieldSpec{}, CouplingMode::gain, p);
    CHECK(t.K[1] == 2.0);
    CHECK(t.K[2] == 2.0);
}

TEST_CASE("two-spin runs")
{
    SUBCASE("ferromagnet aligns")
    {
        const auto J = CouplingMatrix::dense(2, {0.0, 1.0, 1.0, 0.0});
        GdParams p;
        p.seed = 3;
        const auto r = run_gd(J, FieldSpec{}, CouplingMode::dissipative, p);
        CHECK(r.converged);
        const double d = std::remainder(r.best_conf[0] - r.best_conf[1], kTwoPi);
        CHECK(std::abs(d) < 1e-3);
        CHECK(r.best_energy == doctest::Approx(-2.0));
    }
    SUBCASE("ising antiferromagnet")
    {
        const auto J = CouplingMatrix::dense(2, {0.0, -1.0, -1.0, 0.0});
        const auto f = FieldSpec::ising(2, 3.0);
        GdParams p;
        p.seed = 4;
        const auto r = run_gd(J, f, CouplingMode::dissipative, p);
        const auto spins = r.best_conf.ising_spins();
        CHECK(spins[0] == -spins[1]);
        const double brute = oracle::ising_brute_force({0.0, -1.0, -1.0, 0.0}, 2);
        CHECK(r.best_energy == doctest::Approx(brute - 6.0));
    }
}

TEST_CASE("converged runs sit at the fixed point")
{
    const std::size_t n = 20;
    const auto J = CouplingMatrix::dense(n, oracle::random_symmetric(n, 5));
    for (auto mode : {CouplingMode::dissipative, CouplingMode::gain}) {
        GdParams p;
        p.seed = 11;
        GdSolver solver(J, FieldSpec{}, mode, p);
        const auto r = solver.run();
        REQUIRE(r.converged);
        const auto& s = solver.final_state();
        CHECK(fixed_point_residual(s, solver.scaled_couplings(), solver.scaled_fields(), p)
              < 10 * p.delta_rho * p.rho_th);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(s.density(i) - p.rho_th) < p.delta_rho * p.rho_th);
        }
        if (mode == CouplingMode::gain) {
            const auto& Js = solver.scaled_couplings();
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                Js.for_each_in_row(i, [&](std::size_t j, double v, std::size_t slot) {
                    worst = std::max(worst, std::abs(v - (s.gamma_inj[i] + s.gamma_inj[j]) * s.K[slot]));
                });
            }
            CHECK(worst < 10 * p.delta_rho * Js.max_abs());
            CHECK(r.method == "gd_mod");
        }
        else {
            CHECK(r.method == "gd");
        }
        CHECK(r.iterations == r.feedback_updates);
        CHECK(r.best_energy == doctest::Approx(xy_energy(J, r.best_conf)).epsilon(1e-12));
    }
}

TEST_CASE("determinism and trajectories")
{
    const auto J = CouplingMatrix::dense(8, oracle::random_symmetric(8, 2));
    GdParams p;
    p.seed = 99;
    p.sample_interval = 5.0;
    std::vector<double> times;
    const auto a = run_gd(J, FieldSpec{}, CouplingMode::dissipative, p,
                          [&](const TrajectorySample& s) { times.push_back(s.t); });
    const auto b = run_gd(J, FieldSpec{}, CouplingMode::dissipative, p);
    CHECK(a.same_outcome(b));
    CHECK_FALSE(a.trajectory.empty());
    CHECK(times.size() == a.trajectory.size());
    for (std::size_t k = 1; k < times.size(); ++k) {
        CHECK(times[k] > times[k - 1]);
    }
    p.seed = 100;
    const auto c = run_gd(J, FieldSpec{}, CouplingMode::dissipative, p);
    CHECK_FALSE(a.same_outcome(c));
}

TEST_CASE("noise-free vacuum stays put")
{
    const auto J = CouplingMatrix::dense(3, oracle::random_symmetric(3, 6));
    auto p = quiet_params();
    p.t_max = 10.0;
    p.window = 5.0;
    GdSolver solver(J, FieldSpec{}, CouplingMode::dissipative, p);
    const auto r = solver.run();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(solver.final_state().psi[i] == cplx(0.0, 0.0));
        CHECK(solver.final_state().gamma_inj[i] == doctest::Approx(p.eps * p.rho_th * 10.0));
    }
    CHECK_FALSE(r.converged);
}

TEST_CASE("time budget stops a run")
{
    const auto J = CouplingMatrix::dense(30, oracle::random_symmetric(30, 8));
    GdParams p;
    p.t_max = 1e6;
    p.window = 1e5;
    p.time_budget = 0.05;
    const auto r = run_gd(J, FieldSpec{}, CouplingMode::dissipative, p);
    CHECK_FALSE(r.converged);
    CHECK(r.wall_time < 2.0);
    CHECK(r.iterations > 0);
}
