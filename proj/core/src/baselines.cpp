#include "gdspin/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gdspin {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::vector<double> uniform_phases(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    std::vector<double> theta(n);
    for (double& t : theta) {
        t = u(rng);
    }
    return theta;
}

} // namespace

Landscape Landscape::xy(const CouplingMatrix& J, std::span<const double> g)
{
    if (!g.empty() && g.size() != J.size()) {
        throw DimensionError("external field size does not match the coupling matrix");
    }
    Landscape l;
    l.J = &J;
    l.g = g;
    return l;
}

Landscape Landscape::generalized(const CouplingMatrix& J, const FieldSpec& fields, double rho_th)
{
    fields.check_size(J.size());
    if (!(rho_th > 0.0)) {
        throw std::invalid_argument("rho_th must be positive");
    }
    Landscape l;
    l.J = &J;
    l.fields = &fields;
    l.rho_th = rho_th;
    return l;
}

double Landscape::energy_and_gradient(std::span<const double> theta, std::span<double> grad) const
{
    if (fields != nullptr) {
        return generalized_energy_and_gradient(*J, *fields, rho_th, theta, grad);
    }
    static const FieldSpec none;
    double e = generalized_energy_and_gradient(*J, none, rho_th, theta, grad);
    for (std::size_t i = 0; i < g.size(); ++i) {
        e += g[i] * std::cos(theta[i]);
        grad[i] -= g[i] * std::sin(theta[i]);
    }
    return e;
}

double Landscape::energy(const SpinConfiguration& conf) const
{
    if (fields != nullptr) {
        return generalized_energy(*J, *fields, rho_th, conf);
    }
    return xy_energy(*J, g, conf);
}

LocalMinimum lbfgs_minimize(const Landscape& land, const SpinConfiguration& theta0,
                            const LbfgsParams& params)
{
    if (theta0.size() != land.size()) {
        throw DimensionError("initial configuration size does not match the coupling matrix");
    }
    const Objective f = [&land](std::span<const double> x, std::span<double> grad) {
        return land.energy_and_gradient(x, grad);
    };
    LbfgsOutcome out = minimize_lbfgs(f, theta0.theta(), params);

    LocalMinimum m;
    m.conf = SpinConfiguration(std::move(out.x));
    m.energy = land.energy(m.conf);
    m.iterations = out.iterations;
    m.converged = out.status == LbfgsStatus::converged;
    m.line_search_failed = out.status == LbfgsStatus::line_search_failed;
    m.history = std::move(out.history);
    return m;
}

LocalMinimum lbfgs_minimize(const CouplingMatrix& J, std::span<const double> g,
                            const SpinConfiguration& theta0, const LbfgsParams& params)
{
    return lbfgs_minimize(Landscape::xy(J, g), theta0, params);
}

SpinConfiguration random_configuration(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return SpinConfiguration(uniform_phases(rng, n));
}

RunRecord mc_multistart(const Landscape& land, int n_starts, const LbfgsParams& lbfgs,
                        std::uint64_t seed)
{
    if (n_starts < 1) {
        throw std::invalid_argument("mc_multistart needs n_starts >= 1");
    }
    const auto started = clock_type::now();
    std::mt19937_64 rng(seed);
    RunRecord rec;
    rec.method = "mc";
    rec.seed = seed;
    rec.converged = true;
    for (int s = 0; s < n_starts; ++s) {
        const SpinConfiguration start(uniform_phases(rng, land.size()));
        LocalMinimum m = lbfgs_minimize(land, start, lbfgs);
        rec.iterations += m.iterations;
        rec.converged = rec.converged && m.converged;
        if (s == 0 || m.energy < rec.best_energy) {
            rec.best_energy = m.energy;
            rec.best_conf = std::move(m.conf);
        }
    }
    rec.wall_time = seconds_since(started);
    return rec;
}

RunRecord mc_multistart(const CouplingMatrix& J, std::span<const double> g, int n_starts,
                        const LbfgsParams& lbfgs, std::uint64_t seed)
{
    return mc_multistart(Landscape::xy(J, g), n_starts, lbfgs, seed);
}

void BasinHoppingParams::validate() const
{
    if (n_hops < 1) {
        throw std::invalid_argument("basin hopping needs n_hops >= 1");
    }
    if (!(step_size > 0.0)) {
        throw std::invalid_argument("basin hopping step size must be positive");
    }
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("basin hopping temperature must be positive");
    }
}

bool metropolis_accept(double delta_energy, double temperature, double uniform01) noexcept
{
    if (delta_energy <= 0.0) {
        return true;
    }
    return uniform01 < std::exp(-delta_energy / temperature);
}

BasinHoppingResult basin_hopping(const Landscape& land, const SpinConfiguration& theta0,
                                 const BasinHoppingParams& bh, const LbfgsParams& lbfgs)
{
    bh.validate();
    const auto started = clock_type::now();
    std::mt19937_64 rng(bh.seed);
    std::uniform_real_distribution<double> kick(-bh.step_size, bh.step_size);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    BasinHoppingResult res;
    RunRecord& rec = res.record;
    rec.method = "bh";
    rec.seed = bh.seed;

    LocalMinimum current = lbfgs_minimize(land, theta0, lbfgs);
    rec.iterations = current.iterations;
    rec.converged = current.converged;
    rec.best_energy = current.energy;
    rec.best_conf = current.conf;
    res.accepted_energies.push_back(current.energy);

    std::vector<double> trial(land.size());
    for (int hop = 0; hop < bh.n_hops; ++hop) {
        const auto& base = current.conf.theta();
        for (std::size_t i = 0; i < trial.size(); ++i) {
            trial[i] = base[i] + kick(rng);
        }
        LocalMinimum cand = lbfgs_minimize(land, SpinConfiguration(trial), lbfgs);
        rec.iterations += cand.iterations;
        rec.converged = rec.converged && cand.converged;
        if (cand.energy < rec.best_energy) {
            rec.best_energy = cand.energy;
            rec.best_conf = cand.conf;
        }
        if (metropolis_accept(cand.energy - current.energy, bh.temperature, u01(rng))) {
            current = std::move(cand);
            ++res.accepted;
        }
        res.accepted_energies.push_back(current.energy);
    }
    rec.wall_time = seconds_since(started);
    return res;
}

BasinHoppingResult basin_hopping(const CouplingMatrix& J, std::span<const double> g,
                                 const SpinConfiguration& theta0, const BasinHoppingParams& bh,
                                 const LbfgsParams& lbfgs)
{
    return basin_hopping(Landscape::xy(J, g), theta0, bh, lbfgs);
}

} // namespace gdspin
