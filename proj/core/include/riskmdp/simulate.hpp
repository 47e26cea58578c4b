#pragma once

#include "riskmdp/embedded.hpp"
#include "riskmdp/ext_real.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/rng.hpp"
#include "riskmdp/timegrid.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace riskmdp {

/// Policies the simulator can run.
using Policy = std::variant<StationaryPolicy, MarkovPolicyGrid>;

enum class Termination { absorbed, time_truncated, jump_capped };
[[nodiscard]] std::string_view to_string(Termination t) noexcept;

struct JumpRecord {
    double t = 0.0;
    StateIndex x = 0;
    ActionIndex a = 0;  ///< action in force at t
};

struct TrajectorySample {
    std::vector<JumpRecord> jumps;  ///< starts with (0, x0, f(0, x0))
    ExtReal accumulated_exponent;   ///< integral of the cost along the path; +inf marks a divergent sample
    Termination terminated_by = Termination::absorbed;
    std::size_t jump_count = 0;
};

struct SimulationOptions {
    double t_max = 1e6;
    std::size_t jump_cap = 1000000;
    unsigned workers = 0;       ///< 0: hardware parallelism, capped by RISKMDP_THREADS
    bool record_jumps = true;   ///< estimate_utility never records
};

struct McEstimate {
    ExtReal mean{1.0};
    ExtReal std_error;
    std::size_t n_samples = 0;
    double truncation_fraction = 0.0;
    std::uint64_t seed = 0;
    bool divergent = false;          ///< some sample had an infinite exponent
    bool heavy_tail_warning = false; ///< c >= q/2 somewhere reachable: variance may be infinite
    std::size_t time_truncated = 0;
    std::size_t jump_capped = 0;

    friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

/**
 * First time the integrated rate from 0 reaches -log(u), or +inf when the total
 * mass on [0, inf) stays below it (the process never jumps again).
 */
[[nodiscard]] ExtReal sample_sojourn(const TimeFunction& rate, double u);

/// Draws one trajectory from x0 at t = 0. Throws std::invalid_argument on a bad x0 or policy.
[[nodiscard]] TrajectorySample sample_trajectory(const TimeVaryingModel& m, const Policy& policy, StateIndex x0,
                                                 CounterRng& rng, const SimulationOptions& opts = {});

/**
 * Monte Carlo estimate of E_x0[exp(integral of cost)] over n >= 2 trajectories.
 * Trajectory i uses stream (seed, i) and the reduction runs in index order, so
 * the estimate is bit-identical for any worker count.
 */
[[nodiscard]] McEstimate estimate_utility(const TimeVaryingModel& m, const Policy& policy, StateIndex x0,
                                          std::size_t n, std::uint64_t seed, const SimulationOptions& opts = {});
[[nodiscard]] McEstimate estimate_utility(const CtmdpModel& m, const StationaryPolicy& policy, StateIndex x0,
                                          std::size_t n, std::uint64_t seed, const SimulationOptions& opts = {});

/// requested (or hardware parallelism when 0), capped by RISKMDP_THREADS when set.
[[nodiscard]] unsigned resolve_worker_count(unsigned requested);

}  // namespace riskmdp
