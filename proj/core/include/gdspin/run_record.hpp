#pragma once

#include "gdspin/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gdspin {

/// One snapshot of a gain-dissipative trajectory.
struct TrajectorySample {
    double t = 0.0;
    std::vector<double> rho;
    std::vector<double> theta;
    std::vector<double> gamma_inj;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// Outcome of a single solver run.
struct RunRecord {
    std::string method;
    std::string instance;
    std::uint64_t seed = 0;
    double best_energy = 0.0;
    SpinConfiguration best_conf;
    std::int64_t iterations = 0;
    std::int64_t feedback_updates = 0;
    double wall_time = 0.0; ///< seconds
    bool converged = false;
    std::vector<TrajectorySample> trajectory;

    /// Equality of everything except wall_time.
    bool same_outcome(const RunRecord& other) const
    {
        return method == other.method && instance == other.instance && seed == other.seed
               && best_energy == other.best_energy && best_conf == other.best_conf
               && iterations == other.iterations && feedback_updates == other.feedback_updates
               && converged == other.converged && trajectory == other.trajectory;
    }

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

} // namespace gdspin
