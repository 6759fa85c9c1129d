#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dbd/five_level.hpp"
#include "dbd/pulses.hpp"

namespace dbd {

inline constexpr double kDefaultAcceleration = 0.000357;

// Free-fall phases U(p + 2n), n in basis order, accumulated over T.
struct FreePropagatorDiag {
    double p = 0.0;
    double T = 0.0;
    double g = 0.0;
    std::array<cplx, 5> phases{};

    static FreePropagatorDiag make(double p, double T, double g);
};

// exp(-i (m g T^2 q + T q^2) / (2 m hbar)); the T^3 global phase is dropped.
cplx free_phase(double q, double T, double g);

// B3 U(p2) M U(p1) B1 with p1 = p, p2 = p + mgT, p3 = p + 2mgT.
SMatrix5 compose_mz(const SMatrix5& bs1, const SMatrix5& mirror, const SMatrix5& bs2, double p, double T, double g);
SMatrix5 total_smatrix(double g, double p, double T, const StrategyPreset& pulses);

struct MZConfig {
    double g = kDefaultAcceleration;
    double T = 0.0;
    double p0 = 0.0;
    double sigma_p = 0.05;
    double eps_pol = 0.0;
    StrategyPreset preset;
    int nodes = 65;  // lower bound; raised automatically for long T
};

// Quadrature size for T: the integrand carries parasitic-path phases that
// wind like 8 p T, so the node count grows with sigma_p T.
int quadrature_nodes(double sigma_p, double T, int min_nodes);

// One S-matrix response per pulse, evaluated at the quasi-momentum seen by
// that pulse.
using PulseResponse = std::function<SMatrix5(double)>;

struct FringeSignal {
    double g = 0.0;
    std::vector<double> T;
    std::vector<double> conjugate;  // P2 + P3
    std::vector<double> port1;      // P1
    std::vector<std::array<double, 5>> ports;
};

struct ContrastResult {
    double contrast = 0.0;
    double t_max = 0.0;
    double t_min = 0.0;
    double p_max = 0.0;
    double p_min = 0.0;
    double offset = 0.0;  // P(T_max) + P(T_min)
};

struct FringeFit {
    double phase_scale = 0.0;  // fitted frequency in units of 4 k_L g T^2
    double mean = 0.0;
    double amplitude = 0.0;
    double residual_rms = 0.0;
};

// Five-level model of the BS-M-BS sequence with Gaussian momentum averaging.
class FiveLevelInterferometer {
public:
    // Tabulates the pulse S-matrices over [p_lo, p_hi].
    FiveLevelInterferometer(const StrategyPreset& pulses, double p_lo, double p_hi, double spacing = 0.005);
    // Sized for momentum distributions N(p0, sigma_p^2) and T up to t_max at acceleration g.
    static FiveLevelInterferometer for_config(const MZConfig& cfg, double t_max);
    FiveLevelInterferometer(PulseResponse bs1, PulseResponse mirror, PulseResponse bs2, double min_separation = 0.0);

    std::array<double, 5> populations(double g, double T, double p0, double sigma_p, int min_nodes = 65) const;
    std::array<double, 5> populations(const MZConfig& cfg) const {
        return populations(cfg.g, cfg.T, cfg.p0, cfg.sigma_p, cfg.nodes);
    }
    // Column of S_tot for input |p>.
    std::array<cplx, 5> output_amplitudes(double g, double T, double p) const;

    double min_separation() const { return min_separation_; }

private:
    PulseResponse bs1_, mirror_, bs2_;
    double min_separation_ = 0.0;
};

std::array<double, 5> port_populations_5ls(const MZConfig& cfg);

FringeSignal t_scan(const FiveLevelInterferometer& mz, const MZConfig& cfg, double t_min, double t_max,
                    std::size_t n_points);

// T window bracketing the first non-trivial maximum and minimum of the ideal
// fringe, i.e. 4 k_L g T^2 from pi/2 to 5 pi/2.
std::pair<double, double> contrast_window(double g);
ContrastResult extract_contrast(const FringeSignal& signal);
// T-scan over contrast_window with steps of at most dt, then extract_contrast.
ContrastResult measure_contrast(const FiveLevelInterferometer& mz, const MZConfig& cfg, double dt = 0.05);
FringeFit fit_leading_component(const FringeSignal& signal);

enum class ScanAxis { SigmaP, P0, EpsPol };
std::string to_string(ScanAxis a);
ScanAxis parse_axis(const std::string& name);

struct ContrastRow {
    Strategy strategy;
    double value;
    ContrastResult result;
};

// Contrast per (strategy, value); config.preset is replaced by each strategy's preset.
std::vector<ContrastRow> contrast_scan(const MZConfig& base, ScanAxis axis, std::span<const double> values,
                                       std::span<const StrategyPreset> strategies);

}  // namespace dbd
