#include "gdspin/gd.hpp"

#include "gdspin/lbfgs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace gdspin {

namespace {

void check_state(const OscillatorState& s, const CouplingMatrix& J, const FieldSpec& fields,
                 CouplingMode mode)
{
    const std::size_t n = J.size();
    if (s.psi.size() != n || s.gamma_inj.size() != n) {
        throw DimensionError("oscillator state size does not match the coupling matrix");
    }
    if (mode == CouplingMode::gain && s.K.size() != J.slot_count()) {
        throw DimensionError("gain mode needs K in the slot layout of J");
    }
    fields.check_size(n);
}

// |z|^2 without the hypot that std::norm uses for double
inline double sq_abs(cplx z) noexcept
{
    return z.real() * z.real() + z.imag() * z.imag();
}

inline cplx mul(cplx a, cplx b) noexcept
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// (conj z)^p for p >= 0
cplx conj_pow(cplx z, int p)
{
    cplx zc = std::conj(z);
    cplx r(1.0, 0.0);
    while (p > 0) {
        if (p & 1) {
            r = mul(r, zc);
        }
        zc = mul(zc, zc);
        p >>= 1;
    }
    return r;
}

void rhs_into(const OscillatorState& s, const CouplingMatrix& J, const FieldSpec& fields,
              CouplingMode mode, const GdParams& p, std::span<const cplx> noise, StateDerivative& out)
{
    const std::size_t n = J.size();
    out.psi.resize(n);
    out.gamma_inj.resize(n);
    out.K.resize(mode == CouplingMode::gain ? s.K.size() : 0);

    // Dense GD: J psi as a sum of columns (J is symmetric), which keeps the
    // inner loop a vectorizable axpy with the same per-row summation order.
    const bool dense_dissipative = mode == CouplingMode::dissipative && !J.is_sparse();
    thread_local std::vector<double> coupled_re;
    thread_local std::vector<double> coupled_im;
    if (dense_dissipative) {
        coupled_re.assign(n, 0.0);
        coupled_im.assign(n, 0.0);
        double* yr = coupled_re.data();
        double* yi = coupled_im.data();
        for (std::size_t j = 0; j < n; ++j) {
            const double pr = s.psi[j].real();
            const double pi = s.psi[j].imag();
            const double* col = J.dense_row(j).data();
            for (std::size_t i = 0; i < n; ++i) {
                yr[i] += col[i] * pr;
                yi[i] += col[i] * pi;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const cplx psi_i = s.psi[i];
        const double rho_i = sq_abs(psi_i);
        double cre = 0.0;
        double cim = 0.0;
        if (dense_dissipative) {
            cre = coupled_re[i];
            cim = coupled_im[i];
        }
        else if (mode == CouplingMode::dissipative) {
            J.for_each_in_row(i, [&](std::size_t j, double v, std::size_t) {
                cre += v * s.psi[j].real();
                cim += v * s.psi[j].imag();
            });
        }
        else {
            const double gi = s.gamma_inj[i];
            J.for_each_in_row(i, [&](std::size_t j, double v, std::size_t slot) {
                const double delta = gi + s.gamma_inj[j];
                const double k = s.K[slot];
                cre += (delta * k) * s.psi[j].real();
                cim += (delta * k) * s.psi[j].imag();
                out.K[slot] = p.eps_hat * (v - delta * k);
            });
        }
        const double gain = s.gamma_inj[i] - p.gamma_c - rho_i;
        cplx d(psi_i.real() * gain + cre, psi_i.imag() * gain + cim);
        for (const auto& term : fields.terms()) {
            d += term.h[i] * conj_pow(psi_i, term.q - 1);
        }
        if (!noise.empty()) {
            d += p.noise * noise[i];
        }
        out.psi[i] = d;
        out.gamma_inj[i] = p.eps * (p.rho_th - rho_i);
    }
}

void axpy_state(const OscillatorState& base, double h, const StateDerivative& d, OscillatorState& out)
{
    const std::size_t n = base.psi.size();
    out.psi.resize(n);
    out.gamma_inj.resize(n);
    out.K.resize(base.K.size());
    for (std::size_t i = 0; i < n; ++i) {
        out.psi[i] = base.psi[i] + h * d.psi[i];
        out.gamma_inj[i] = base.gamma_inj[i] + h * d.gamma_inj[i];
    }
    for (std::size_t k = 0; k < base.K.size(); ++k) {
        out.K[k] = base.K[k] + h * d.K[k];
    }
    out.t = base.t + h;
}

// Reused buffers for one integration; a run owns one of these.
struct Workspace {
    StateDerivative k1, k2, k3, k4;
    OscillatorState stage;
};

void step_into(const OscillatorState& s, const CouplingMatrix& J, const FieldSpec& fields,
               CouplingMode mode, const GdParams& p, std::span<const cplx> noise, double k_max,
               Workspace& w, OscillatorState& out)
{
    const double h = p.dt;
    rhs_into(s, J, fields, mode, p, noise, w.k1);
    axpy_state(s, 0.5 * h, w.k1, w.stage);
    rhs_into(w.stage, J, fields, mode, p, noise, w.k2);
    axpy_state(s, 0.5 * h, w.k2, w.stage);
    rhs_into(w.stage, J, fields, mode, p, noise, w.k3);
    axpy_state(s, h, w.k3, w.stage);
    rhs_into(w.stage, J, fields, mode, p, noise, w.k4);

    const std::size_t n = s.psi.size();
    out.psi.resize(n);
    out.gamma_inj.resize(n);
    out.K.resize(s.K.size());
    const double c = h / 6.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        out.psi[i] = s.psi[i] + c * (w.k1.psi[i] + 2.0 * w.k2.psi[i] + 2.0 * w.k3.psi[i] + w.k4.psi[i]);
        double g = s.gamma_inj[i]
                   + c * (w.k1.gamma_inj[i] + 2.0 * w.k2.gamma_inj[i] + 2.0 * w.k3.gamma_inj[i]
                          + w.k4.gamma_inj[i]);
        if (p.clamp_gain && g < 0.0) {
            g = 0.0;
        }
        out.gamma_inj[i] = g;
        finite = finite && std::isfinite(out.psi[i].real()) && std::isfinite(out.psi[i].imag())
                 && std::isfinite(g);
    }
    for (std::size_t k = 0; k < s.K.size(); ++k) {
        const double v = s.K[k] + c * (w.k1.K[k] + 2.0 * w.k2.K[k] + 2.0 * w.k3.K[k] + w.k4.K[k]);
        finite = finite && std::isfinite(v);
        out.K[k] = std::clamp(v, -k_max, k_max);
    }
    out.t = s.t + h;
    if (!finite) {
        std::ostringstream msg;
        msg << "non-finite state at t = " << out.t << " (dt = " << h << " is likely too large)";
        throw NumericalAbort(msg.str());
    }
}

double default_k_max(const CouplingMatrix& J, const GdParams& p)
{
    return p.k_max > 0.0 ? p.k_max : 10.0 * J.max_abs();
}


} // namespace

std::vector<std::string> GdParams::validate() const
{
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be positive");
        }
    };
    const auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be non-negative");
        }
    };
    non_negative(gamma_c, "gamma_c");
    positive(rho_th, "rho_th");
    positive(eps, "eps");
    positive(eps_hat, "eps_hat");
    non_negative(noise, "noise");
    positive(dt, "dt");
    positive(t_max, "t_max");
    non_negative(k_max, "k_max");
    positive(delta_rho, "delta_rho");
    positive(delta_theta, "delta_theta");
    positive(window, "window");
    non_negative(time_budget, "time_budget");
    non_negative(sample_interval, "sample_interval");
    positive(readout_interval, "readout_interval");

    std::vector<std::string> warnings;
    // The fastest linear rate near threshold is about gamma_c + rho_th plus
    // the coupling scale, which is 1 after normalization.
    const double rate = gamma_c + 2.0 * rho_th + (normalize_couplings ? 1.0 : 0.0);
    if (dt * rate > 1.0) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds 1 / " << rate << "; RK4 may be unstable";
        warnings.push_back(msg.str());
    }
    if (window > t_max) {
        warnings.emplace_back("stationarity window is longer than t_max; runs cannot converge");
    }
    return warnings;
}

OscillatorState OscillatorState::vacuum(const CouplingMatrix& J, CouplingMode mode)
{
    OscillatorState s;
    s.psi.assign(J.size(), cplx(0.0, 0.0));
    s.gamma_inj.assign(J.size(), 0.0);
    if (mode == CouplingMode::gain) {
        s.K.resize(J.slot_count());
        for (std::size_t k = 0; k < s.K.size(); ++k) {
            s.K[k] = J.slot_value(k);
        }
    }
    return s;
}

double OscillatorState::phase(std::size_t i) const noexcept
{
    return wrap_phase(std::arg(psi[i]));
}

StateDerivative rhs(const OscillatorState& state, const CouplingMatrix& J, const FieldSpec& fields,
                    CouplingMode mode, const GdParams& params, std::span<const cplx> noise_sample)
{
    check_state(state, J, fields, mode);
    if (!noise_sample.empty() && noise_sample.size() != J.size()) {
        throw DimensionError("noise sample size does not match the coupling matrix");
    }
    StateDerivative d;
    rhs_into(state, J, fields, mode, params, noise_sample, d);
    return d;
}

OscillatorState step_rk4(const OscillatorState& state, const CouplingMatrix& J,
                         const FieldSpec& fields, CouplingMode mode, const GdParams& params,
                         std::span<const cplx> noise_sample)
{
    check_state(state, J, fields, mode);
    if (!noise_sample.empty() && noise_sample.size() != J.size()) {
        throw DimensionError("noise sample size does not match the coupling matrix");
    }
    Workspace w;
    OscillatorState out;
    step_into(state, J, fields, mode, params, noise_sample, default_k_max(J, params), w, out);
    return out;
}

double fixed_point_residual(const OscillatorState& state, const CouplingMatrix& J,
                            const FieldSpec& fields, const GdParams& params)
{
    const std::size_t n = J.size();
    if (state.psi.size() != n || state.gamma_inj.size() != n) {
        throw DimensionError("oscillator state size does not match the coupling matrix");
    }
    fields.check_size(n);
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = std::arg(state.psi[i]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double balance = state.gamma_inj[i] - params.gamma_c;
        J.for_each_in_row(i, [&](std::size_t j, double v, std::size_t) {
            balance += v * std::cos(theta[i] - theta[j]);
        });
        for (const auto& term : fields.terms()) {
            balance += term.h[i] * std::pow(params.rho_th, 0.5 * term.q - 1.0) * std::cos(term.q * theta[i]);
        }
        worst = std::max(worst, std::abs(params.rho_th - balance));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// GdSolver

GdSolver::GdSolver(CouplingMatrix J, FieldSpec fields, CouplingMode mode, GdParams params)
    : J_(std::move(J)), fields_(std::move(fields)), mode_(mode), params_(params),
      model_(fields_.implied_model())
{
    params_.validate();
    fields_.check_size(J_.size());
    if (J_.size() == 0) {
        throw std::invalid_argument("empty problem instance");
    }
    if (params_.normalize_couplings) {
        // fields act as extra gain of h rho_th^(q/2 - 1) per site; count them
        // so that the threshold stays reachable with gamma_inj >= 0
        std::vector<double> gain(J_.size(), 0.0);
        for (std::size_t i = 0; i < J_.size(); ++i) {
            J_.for_each_in_row(i, [&](std::size_t, double v, std::size_t) { gain[i] += std::abs(v); });
        }
        for (const auto& term : fields_.terms()) {
            const double w = std::pow(params_.rho_th, 0.5 * term.q - 1.0);
            for (std::size_t i = 0; i < gain.size(); ++i) {
                gain[i] += w * std::abs(term.h[i]);
            }
        }
        const double row = *std::max_element(gain.begin(), gain.end());
        scale_ = row > 0.0 ? 1.0 / row : 1.0;
    }
    scaled_J_ = J_.scaled(scale_);
    scaled_fields_ = fields_.scaled(scale_);
    k_max_ = default_k_max(scaled_J_, params_);
}

SpinConfiguration GdSolver::readout(const OscillatorState& s) const
{
    std::vector<double> theta(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        theta[i] = s.phase(i);
    }
    SpinConfiguration conf(std::move(theta));
    if (model_.is_discrete()) {
        return discretize(conf, model_);
    }
    return conf;
}

RunRecord GdSolver::run(const SampleCallback& on_sample)
{
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    const GdParams& p = params_;
    const std::size_t n = J_.size();

    RunRecord rec;
    rec.method = mode_ == CouplingMode::dissipative ? "gd" : "gd_mod";
    rec.seed = p.seed;

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

    state_ = OscillatorState::vacuum(scaled_J_, mode_);
    OscillatorState next;
    Workspace work;
    std::vector<cplx> noise(n);
    const double inv_sqrt_dt = 1.0 / std::sqrt(p.dt);
    const double rho_tol = p.delta_rho * p.rho_th;
    const double speed_tol = std::tan(p.delta_theta * p.dt);

    const auto window_steps = static_cast<std::int64_t>(std::ceil(p.window / p.dt - 1e-9));
    const auto max_steps = static_cast<std::int64_t>(std::ceil(p.t_max / p.dt - 1e-9));
    const auto sample_every =
        p.sample_interval > 0.0 ? std::max<std::int64_t>(1, std::llround(p.sample_interval / p.dt)) : 0;
    const auto readout_every = std::max<std::int64_t>(1, std::llround(p.readout_interval / p.dt));

    const auto emit_sample = [&](const OscillatorState& s) {
        TrajectorySample smp;
        smp.t = s.t;
        smp.rho.resize(n);
        smp.theta.resize(n);
        smp.gamma_inj = s.gamma_inj;
        for (std::size_t i = 0; i < n; ++i) {
            smp.rho[i] = s.density(i);
            smp.theta[i] = s.phase(i);
        }
        if (on_sample) {
            on_sample(smp);
        }
        rec.trajectory.push_back(std::move(smp));
    };

    double best_energy = 0.0;
    SpinConfiguration best_conf;
    bool have_best = false;
    const auto consider = [&](const OscillatorState& s) {
        SpinConfiguration conf = readout(s);
        const double e = generalized_energy(J_, fields_, p.rho_th, conf);
        if (!have_best || e < best_energy) {
            best_energy = e;
            best_conf = std::move(conf);
            have_best = true;
        }
    };

    if (sample_every > 0) {
        emit_sample(state_);
    }

    std::int64_t steps = 0;
    std::int64_t stable = 0;
    bool converged = false;
    while (steps < max_steps) {
        for (std::size_t i = 0; i < n; ++i) {
            double amp = inv_sqrt_dt;
            if (p.anneal_noise) {
                // switched off inside the stationarity band so that converged
                // sites are noise-free
                const double below = (p.rho_th - sq_abs(state_.psi[i])) / p.rho_th;
                amp *= below > p.delta_rho ? below : 0.0;
            }
            if (amp == 0.0 || p.noise == 0.0) {
                // no draw: sites at or above threshold receive no noise
                noise[i] = cplx(0.0, 0.0);
                continue;
            }
            const double re = normal(rng);
            const double im = normal(rng);
            noise[i] = cplx(re * amp, im * amp);
        }
        step_into(state_, scaled_J_, scaled_fields_, mode_, p, noise, k_max_, work, next);
        ++steps;

        // |dtheta| < delta_theta dt  <=>  |Im(a conj b)| < tan(delta_theta dt) Re(a conj b)
        bool still = true;
        for (std::size_t i = 0; i < n && still; ++i) {
            const cplx a = next.psi[i];
            const cplx b = state_.psi[i];
            const double re = a.real() * b.real() + a.imag() * b.imag();
            const double im = a.imag() * b.real() - a.real() * b.imag();
            still = std::abs(sq_abs(a) - p.rho_th) < rho_tol && re > 0.0 && std::abs(im) < speed_tol * re;
        }
        std::swap(state_, next);

        if (still) {
            ++stable;
        }
        else {
            stable = 0;
        }
        if (sample_every > 0 && steps % sample_every == 0) {
            emit_sample(state_);
        }
        if (model_.is_discrete() && steps % readout_every == 0) {
            consider(state_);
        }
        if (stable >= window_steps) {
            converged = true;
            break;
        }
        if (p.time_budget > 0.0 && (steps & 31) == 0) {
            const std::chrono::duration<double> elapsed = clock::now() - started;
            if (elapsed.count() >= p.time_budget) {
                break;
            }
        }
    }

    raw_phases_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        raw_phases_[i] = state_.phase(i);
    }

    if (model_.is_discrete()) {
        consider(state_);
        rec.best_conf = std::move(best_conf);
        rec.best_energy = best_energy;
    }
    else {
        std::vector<double> theta = raw_phases_;
        if (p.polish) {
            const Objective f = [&](std::span<const double> x, std::span<double> g) {
                return generalized_energy_and_gradient(J_, fields_, p.rho_th, x, g);
            };
            LbfgsParams lp;
            lp.max_iters = 500;
            theta = minimize_lbfgs(f, std::move(theta), lp).x;
        }
        rec.best_conf = SpinConfiguration(std::move(theta));
        rec.best_energy = generalized_energy(J_, fields_, p.rho_th, rec.best_conf);
    }

    rec.iterations = steps;
    rec.feedback_updates = steps;
    rec.converged = converged;
    const std::chrono::duration<double> elapsed = clock::now() - started;
    rec.wall_time = elapsed.count();
    return rec;
}

RunRecord run_gd(const CouplingMatrix& J, const FieldSpec& fields, CouplingMode mode,
                 const GdParams& params, const SampleCallback& on_sample)
{
    GdSolver solver(J, fields, mode, params);
    return solver.run(on_sample);
}

} // namespace gdspin
