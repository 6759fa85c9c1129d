#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dbd/interferometer.hpp"

namespace dbd {

// Monte Carlo scan of peak lattice-depth fluctuations.
struct RobustnessSpec {
    std::vector<double> sigma_r;  // relative std of the peak depth, each in [0, 0.1]
    int realizations = 10;
    std::uint64_t seed = 1;
    // One factor for all three pulses instead of independent draws per pulse.
    bool shared_factor = false;
    // Deterministic envelope evaluated at depth factors 1 +- band_scale * sigma_R.
    double band_scale = 1.05;
    double dt = 0.05;  // T-scan step for the contrast
    double table_spacing = 0.01;

    void validate() const;
};

// Depth factors for (BS1, M, BS2); a pure function of (seed, sigma index, realization).
std::array<double, 3> depth_factors(std::uint64_t seed, std::size_t sigma_index, int realization, double sigma_r,
                                    bool shared);

struct RobustnessRow {
    double sigma_r = 0.0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation over realizations
    double nominal = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    std::vector<double> contrasts;
};

// Contrast of the sequence with each pulse's peak Rabi frequency scaled.
double scaled_contrast(const MZConfig& cfg, const std::array<double, 3>& factors, double dt = 0.05,
                       double table_spacing = 0.01);

std::vector<RobustnessRow> robustness_scan(const MZConfig& cfg, const RobustnessSpec& spec);

}  // namespace dbd
