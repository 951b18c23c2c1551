#pragma once

// Experiment harness: success probabilities against a reference minimum,
// Max-Cut quality under a time budget, log-log scaling fits and projected
// hardware run time.

#include "gdspin/baselines.hpp"
#include "gdspin/gd.hpp"
#include "gdspin/instances.hpp"
#include "gdspin/run_record.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gdspin {

enum class Algorithm { gd, gd_mod, mc, bh };

std::string algorithm_name(Algorithm a);
/// Accepts gd, gd-mod, gd_mod, mc, bh.
Algorithm parse_algorithm(const std::string& text);

/// What a single run of each algorithm means.
struct SolverConfig {
    GdParams gd;
    LbfgsParams lbfgs;
    BasinHoppingParams bh;   ///< n_hops per run; seed is replaced per run
    int mc_starts = 1;       ///< L-BFGS descents per MC run
    double ising_penalty = 1.5; ///< h2 (and Potts h_q) as a multiple of max_i sum_j |J_ij|
};

/// Resonant-field terms that realize the given model on J.
FieldSpec fields_for_model(const CouplingMatrix& J, ModelTag model, double penalty_factor);

/// One run of `algorithm` on (J, fields). Baselines minimise the same
/// functional as GD; for discrete models their result is discretized and
/// re-evaluated. time_budget (seconds, 0 = none) applies to GD only.
RunRecord solve_once(Algorithm algorithm, const CouplingMatrix& J, const FieldSpec& fields,
                     const SolverConfig& config, std::uint64_t seed, double time_budget = 0.0);

/// Deterministic per-run seed derived from a base seed and run coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Runs fn(0) .. fn(count - 1) on up to `jobs` threads (0 = hardware
/// concurrency). The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

enum class ReferencePolicy {
    consensus, ///< minimum over every run of every method
    metadata,  ///< best-known Max-Cut value, falling back to consensus
};

struct ExperimentSpec {
    std::vector<Algorithm> algorithms{Algorithm::gd};
    std::vector<EnsembleSpec> ensembles;
    std::vector<std::filesystem::path> files;
    ModelTag model = ModelTag::xy();
    int runs_per_instance = 10;
    ReferencePolicy reference_policy = ReferencePolicy::consensus;
    std::map<std::string, double> metadata; ///< best-known cut values by instance name
    double time_budget = 0.0;   ///< seconds per GD run, 0 = none
    double success_rtol = 1e-9; ///< |E - E_ref| <= rtol |E_ref| counts as success
    SolverConfig solver;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    std::optional<std::filesystem::path> archive; ///< NDJSON RunRecord output

    void validate() const;
};

struct MethodOutcome {
    std::string method;
    double best_energy = 0.0;
    double success_probability = 0.0;
    int runs = 0;
};

struct InstanceOutcome {
    std::string name;
    std::size_t n = 0;
    double reference = 0.0;
    bool reference_violated = false; ///< a run went below a metadata reference
    std::string error;               ///< non-empty when the instance failed to load
    std::vector<MethodOutcome> methods;
};

struct SuccessStats {
    std::string method;
    std::vector<std::string> instances;
    std::vector<double> probabilities; ///< per instance, in [0, 1]
    std::vector<int> histogram;        ///< counts over [0, 0.1), ..., [0.9, 1.0]
    double mean = 0.0;
};

struct ExperimentResult {
    std::vector<InstanceOutcome> instances;
    std::vector<SuccessStats> stats; ///< one per algorithm, same order as the spec
    std::vector<RunRecord> records;  ///< sorted by (instance, method, seed)

    const SuccessStats& stats_for(Algorithm a) const;
};

/// Fraction of energies within rtol of the reference.
double success_probability(const std::vector<double>& energies, double reference, double rtol);

/// Ten-bin histogram of probabilities; 1.0 falls into the last bin.
std::vector<int> probability_histogram(const std::vector<double>& probabilities);

ExperimentResult run_experiment(const ExperimentSpec& spec);

struct MaxCutStats {
    std::string name;
    std::size_t n = 0;
    std::size_t edges = 0;
    int runs = 0;
    int converged = 0;
    double best_cut = 0.0;
    double mean_cut = 0.0;
    std::optional<double> best_known;
    std::optional<double> best_deviation_pct; ///< 100 (best_known - best_cut) / best_known
    std::optional<double> mean_deviation_pct;
};

struct MaxCutSuiteSpec {
    Algorithm algorithm = Algorithm::gd;
    int runs_per_instance = 20;
    double time_budget = 60.0;
    SolverConfig solver;
    std::map<std::string, double> metadata;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
};

/// Max-Cut runs on named graphs. Instances missing from the metadata report
/// raw cuts only.
std::vector<MaxCutStats> run_maxcut_suite(const std::vector<std::pair<std::string, WeightedGraph>>& graphs,
                                          const MaxCutSuiteSpec& spec,
                                          std::vector<RunRecord>* records = nullptr);

struct ScalingFit {
    std::string label;
    std::vector<double> sizes;
    std::vector<double> times;     ///< seconds
    double slope = 0.0;            ///< in log T = slope log N + intercept (natural logs)
    double intercept = 0.0;
    std::vector<double> residuals; ///< log T - fitted log T
    double r_squared = 0.0;
};

/// Least-squares line through (log N, log T). Sizes must be strictly increasing.
ScalingFit fit_loglog(std::vector<double> sizes, std::vector<double> times, std::string label = {});

/// Seconds for one timed run at size n, repetition rep.
using RunTimer = std::function<double(std::size_t n, int rep)>;

/// Averages `repeats` timed runs per size (one at a time) and fits the
/// power law.
ScalingFit scaling_study(const std::vector<std::size_t>& sizes, int repeats, const RunTimer& timer,
                         std::string label = {});

/// Timer running `algorithm` to completion on dense ensemble instances:
/// GD/GD-mod until stationarity, BH per configured hop count, MC per start set.
RunTimer make_solver_timer(Algorithm algorithm, const SolverConfig& config, std::uint64_t seed,
                           EnsembleKind kind = EnsembleKind::dense);

/// feedback_updates * feedback_latency: the wall time of a physical
/// simulator executing the same feedback schedule.
double project_hw_time(const RunRecord& record, double feedback_latency = 1e-4);

// Persistence ---------------------------------------------------------------

inline constexpr const char* kRunRecordSchema = "gdspin.run_record/1";

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& line);
void write_archive(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_archive(std::istream& in);

/// Columns: method,instance,n,reference_energy,best_energy,success_probability,runs
void write_success_csv(std::ostream& out, const ExperimentResult& result);
/// Columns: method,bin_low,bin_high,count
void write_histogram_csv(std::ostream& out, const ExperimentResult& result);
/// Columns: label,n,time_s,log_n,log_time,fitted_log_time,residual,slope,intercept
void write_scaling_csv(std::ostream& out, const ScalingFit& fit);
/// Columns: instance,n,edges,runs,converged,best_cut,mean_cut,best_known,best_deviation_pct,mean_deviation_pct
void write_maxcut_csv(std::ostream& out, const std::vector<MaxCutStats>& stats);

} // namespace gdspin
