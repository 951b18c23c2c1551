#pragma once

// Classical comparison optimisers for the XY energy: an L-BFGS local
// minimiser, multistart Monte Carlo and basin hopping.

#include "gdspin/lbfgs.hpp"
#include "gdspin/model.hpp"
#include "gdspin/run_record.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gdspin {

/// Energy surface minimised by the baselines. Either the XY energy with an
/// optional external field (plus_cosine convention) or, when `fields` is
/// non-empty, the generalized functional with resonant terms.
struct Landscape {
    const CouplingMatrix* J = nullptr;
    std::span<const double> g;
    const FieldSpec* fields = nullptr;
    double rho_th = 1.0;

    static Landscape xy(const CouplingMatrix& J, std::span<const double> g = {});
    static Landscape generalized(const CouplingMatrix& J, const FieldSpec& fields, double rho_th);

    std::size_t size() const noexcept { return J->size(); }
    double energy_and_gradient(std::span<const double> theta, std::span<double> grad) const;
    double energy(const SpinConfiguration& conf) const;
};

struct LocalMinimum {
    SpinConfiguration conf;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    /// Energy after every accepted iteration, first entry at theta0.
    std::vector<double> history;
};

LocalMinimum lbfgs_minimize(const Landscape& land, const SpinConfiguration& theta0,
                            const LbfgsParams& params);
LocalMinimum lbfgs_minimize(const CouplingMatrix& J, std::span<const double> g,
                            const SpinConfiguration& theta0, const LbfgsParams& params);

/// Uniform random phases in [0, 2pi).
SpinConfiguration random_configuration(std::size_t n, std::uint64_t seed);

/// Best of n_starts L-BFGS descents from uniform random phases.
RunRecord mc_multistart(const Landscape& land, int n_starts, const LbfgsParams& lbfgs,
                        std::uint64_t seed);
RunRecord mc_multistart(const CouplingMatrix& J, std::span<const double> g, int n_starts,
                        const LbfgsParams& lbfgs, std::uint64_t seed);

struct BasinHoppingParams {
    int n_hops = 10;
    double step_size = 1.0;  ///< half-width of the uniform phase perturbation
    double temperature = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BasinHoppingResult {
    RunRecord record;
    int accepted = 0;
    /// Energy of the current (accepted) minimum after the initial descent and
    /// after every hop.
    std::vector<double> accepted_energies;
};

/// Descends from theta0, then performs n_hops rounds of perturb, descend,
/// Metropolis accept. The record carries the best minimum visited.
BasinHoppingResult basin_hopping(const Landscape& land, const SpinConfiguration& theta0,
                                 const BasinHoppingParams& bh, const LbfgsParams& lbfgs);
BasinHoppingResult basin_hopping(const CouplingMatrix& J, std::span<const double> g,
                                 const SpinConfiguration& theta0, const BasinHoppingParams& bh,
                                 const LbfgsParams& lbfgs);

/// Metropolis rule: accept if dE <= 0, otherwise with probability exp(-dE / T).
bool metropolis_accept(double delta_energy, double temperature, double uniform01) noexcept;

} // namespace gdspin
