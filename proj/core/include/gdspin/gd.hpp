#pragma once

// Gain-dissipative (GD) and GD-mod solvers.
//
// Each coherent centre i carries a complex amplitude psi_i whose phase is the
// spin. The injection rate gamma_i is raised from zero and fed back so that
// every density |psi_i|^2 settles at rho_th; the phases then sit at a minimum
// of the functional computed by generalized_energy. In gain mode the coupling
// is Delta_ij K_ij with Delta_ij = gamma_i + gamma_j and K adapted so that
// Delta_ij K_ij -> J_ij.

#include "gdspin/model.hpp"
#include "gdspin/run_record.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdspin {

using cplx = std::complex<double>;

enum class CouplingMode {
    dissipative, ///< Delta_ij = 1, K = J fixed (GD)
    gain,        ///< Delta_ij = gamma_i + gamma_j, K evolved (GD-mod)
};

/// Thrown when the integration produces non-finite values.
class NumericalAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct GdParams {
    double gamma_c = 1.0;        ///< particle loss rate
    double rho_th = 0.1;         ///< target density
    double eps = 0.02;           ///< gain feedback speed
    double eps_hat = 0.05;       ///< coupling feedback speed (gain mode)
    double noise = 0.05;         ///< diffusion coefficient D
    double dt = 0.05;            ///< RK4 step
    double t_max = 2000.0;       ///< integration horizon
    double k_max = 0.0;          ///< coupling cap, 0 selects 10 * max|J| of the scaled couplings
    double delta_rho = 1e-3;     ///< relative density tolerance for stationarity
    double delta_theta = 1e-4;   ///< phase velocity tolerance for stationarity
    double window = 50.0;        ///< time the stationarity criteria must hold
    double time_budget = 0.0;    ///< wall-clock seconds, 0 disables
    double sample_interval = 0.0; ///< trajectory sampling period, 0 disables
    double readout_interval = 1.0; ///< period of best-so-far readouts for discrete models
    bool clamp_gain = true;       ///< keep gamma_inj >= 0
    bool anneal_noise = true;     ///< scale noise by max(0, (rho_th - rho_i) / rho_th)
    bool normalize_couplings = true; ///< integrate with max_i (sum_j |J_ij| + sum_q |h_qi| rho_th^(q/2-1)) = 1
    bool polish = true;           ///< refine continuous readouts with a local descent
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when a positivity constraint fails;
    /// returns heuristic warnings otherwise.
    std::vector<std::string> validate() const;
};

struct OscillatorState {
    std::vector<cplx> psi;
    std::vector<double> gamma_inj;
    std::vector<double> K; ///< adaptive couplings in the slot layout of J, gain mode only
    double t = 0.0;

    /// psi = 0, gamma_inj = 0, K = J in gain mode.
    static OscillatorState vacuum(const CouplingMatrix& J, CouplingMode mode);

    std::size_t size() const noexcept { return psi.size(); }
    double density(std::size_t i) const noexcept
    {
        return psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
    }
    double phase(std::size_t i) const noexcept;
};

struct StateDerivative {
    std::vector<cplx> psi;
    std::vector<double> gamma_inj;
    std::vector<double> K;
};

/// Time derivatives of (psi, gamma_inj, K). noise_sample may be empty; when
/// present it contributes noise * noise_sample[i] to dpsi_i/dt.
StateDerivative rhs(const OscillatorState& state, const CouplingMatrix& J, const FieldSpec& fields,
                    CouplingMode mode, const GdParams& params,
                    std::span<const cplx> noise_sample = {});

/// One classical RK4 step of size params.dt. noise_sample is held fixed over
/// the four stages; pass xi / sqrt(dt) to obtain Euler-Maruyama scaling.
/// Clamps gamma_inj at zero (if enabled) and K to [-k_max, k_max].
/// Throws NumericalAbort on non-finite results.
OscillatorState step_rk4(const OscillatorState& state, const CouplingMatrix& J,
                         const FieldSpec& fields, CouplingMode mode, const GdParams& params,
                         std::span<const cplx> noise_sample = {});

/// max_i |rho_th - (gamma_i - gamma_c + sum_j J_ij cos(theta_ij)
///                  + sum_q h_qi rho_th^(q/2 - 1) cos(q theta_i))|
double fixed_point_residual(const OscillatorState& state, const CouplingMatrix& J,
                            const FieldSpec& fields, const GdParams& params);

using SampleCallback = std::function<void(const TrajectorySample&)>;

/// Runs GD or GD-mod on one instance. The couplings and fields are rescaled
/// internally when params.normalize_couplings is set; energies are reported
/// in the original units.
class GdSolver {
  public:
    GdSolver(CouplingMatrix J, FieldSpec fields, CouplingMode mode, GdParams params);

    RunRecord run(const SampleCallback& on_sample = {});

    const OscillatorState& final_state() const noexcept { return state_; }
    const CouplingMatrix& scaled_couplings() const noexcept { return scaled_J_; }
    const FieldSpec& scaled_fields() const noexcept { return scaled_fields_; }
    double scale() const noexcept { return scale_; }
    const GdParams& params() const noexcept { return params_; }
    /// Effective coupling cap used in gain mode.
    double k_max() const noexcept { return k_max_; }

    /// Continuous phases at the end of the last run, before discretization.
    const std::vector<double>& raw_phases() const noexcept { return raw_phases_; }

  private:
    SpinConfiguration readout(const OscillatorState& s) const;

    CouplingMatrix J_;
    FieldSpec fields_;
    CouplingMode mode_;
    GdParams params_;
    ModelTag model_;
    double scale_ = 1.0;
    double k_max_ = 0.0;
    CouplingMatrix scaled_J_;
    FieldSpec scaled_fields_;
    OscillatorState state_;
    std::vector<double> raw_phases_;
};

/// Convenience wrapper around GdSolver.
RunRecord run_gd(const CouplingMatrix& J, const FieldSpec& fields, CouplingMode mode,
                 const GdParams& params, const SampleCallback& on_sample = {});

} // namespace gdspin
