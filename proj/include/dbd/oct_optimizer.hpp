#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dbd/five_level.hpp"
#include "dbd/pulses.hpp"

namespace dbd {

// Mirror controls: Gaussian envelope plus detuning values at knots spread
// uniformly over the 10 tau window [t0 - 5 tau, t0 + 5 tau]. The laser phase
// is referenced to t = 0, so the centre t0 is a genuine control.
struct ControlParams {
    double omega_peak = 2.89;
    double tau = 0.64;
    double t0 = 0.0;
    std::vector<double> knots;

    static constexpr double kOmegaMin = 1.0, kOmegaMax = 4.0;
    static constexpr double kTauMin = 0.4, kTauMax = 3.0;
    static constexpr double kT0Min = -8.0, kT0Max = 8.0;
    static constexpr double kKnotMin = -8.0, kKnotMax = 8.0;

    std::vector<double> knot_times() const;
    PulseSpec to_pulse() const;
    bool within_bounds() const;

    // The DS-DBD mirror (linear sweep) expressed on `n_knots` knots.
    static ControlParams from_ds_mirror(std::size_t n_knots = 16);
};

struct CostConfig {
    double p_min = -0.2;
    double p_max = 0.2;
    int n_samples = 9;
    double eps_pol = 0.0;
    IntegratorOptions integrator{};

    std::vector<double> samples() const;
};

// Mean over momentum samples of (1 - F_M+(p)) + (1 - F_M-(p)).
double mirror_cost(const ControlParams& params, const CostConfig& cfg);
// Same cost for an arbitrary mirror response.
double mirror_cost(const std::function<SMatrix5(double)>& mirror, const CostConfig& cfg);

struct OptimizationResult {
    ControlParams best;
    double best_cost = 0.0;
    double initial_cost = 0.0;
    std::vector<double> trace;  // best-so-far cost after each evaluation
    std::vector<std::string> log;  // one delimited line per generation
    int evaluations = 0;
    bool improved = false;
};

struct OptimizerSettings {
    int budget = 5000;
    std::uint64_t seed = 1;
    // Seeded samples of a smooth detuning (Chebyshev series with `smooth_terms`
    // terms), then local CMA-ES runs from the best `explore_keep` of them.
    int smooth_terms = 6;
    int explore_samples = 600;
    int explore_keep = 6;
    int local_budget = 200;
    double coarse_step = 0.1;
    // Knot stage: Levenberg-Marquardt, then CMA-ES restarts with this step (box-normalized units).
    double initial_step = 0.01;
    // Looser tolerance while searching; the returned cost is re-evaluated at cfg's tolerance.
    double search_tolerance = 1e-8;
};

// Seeded search over (omega_peak, tau, t0, knots) inside the box constraints:
// exploration and CMA-ES on a smooth low-order detuning, then least squares
// and restarted CMA-ES on the knots.
OptimizationResult optimize_mirror(const ControlParams& init, const CostConfig& cfg, const OptimizerSettings& settings);

}  // namespace dbd
