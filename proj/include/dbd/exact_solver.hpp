#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include "dbd/interferometer.hpp"
#include "dbd/pulses.hpp"
#include "dbd/units.hpp"

namespace dbd {

enum class Frame { Com, Lab };

struct SolverConfig {
    SpatialGrid grid = SpatialGrid::standard();
    double dt = 0.002;
    // Com: effective acceleration g - a_L. Lab: the bare acceleration g.
    double g = 0.0;
    // Applied to every pulse of a preset-built sequence.
    double eps_pol = 0.0;
    Frame frame = Frame::Com;
    // Lab frame only: lattice acceleration; the lattice phase is a_L (t - t_start)^2.
    double a_L = 0.0;
};

// A pulse whose envelope centre sits at sequence time `center`, or an
// instantaneous S-matrix kick applied at that time.
struct SequenceStep {
    double center = 0.0;
    std::variant<PulseSpec, PulseResponse> action;

    double begin() const;
    double end() const;
};

class PulseSequence {
public:
    PulseSequence() = default;
    explicit PulseSequence(std::vector<SequenceStep> steps);  // rejects overlapping windows

    static PulseSequence mach_zehnder(const StrategyPreset& pulses, double T);

    std::span<const SequenceStep> steps() const { return steps_; }
    // Pulse active at sequence time t with its local time, or nullptr.
    const PulseSpec* active(double t, double& local_time) const;
    double begin() const;
    double end() const;

private:
    std::vector<SequenceStep> steps_;
};

// 2 hbar Omega(t) cos(2 k_L z) [cos Phi + eps] - m g z at sequence time t.
double potential_com(double z, double t, const PulseSequence& seq, double g);

// One Strang step exp(-iV dt/2) exp(-iK dt) exp(-iV dt/2), V at t + dt/2.
// In the lab frame the lattice phase origin is t = 0.
WavePacket step_strang(const WavePacket& w, double t, double dt, const SolverConfig& cfg, const PulseSequence& seq);

// Exact free fall: phase exp(-i (m g T^2 p + T p^2) / (2 m hbar)) and shift p -> p + m g T.
// Returns the same representation as the input.
WavePacket evolve_free(const WavePacket& w, double duration, double g);

struct DensityMovie {
    std::vector<double> times;
    std::vector<double> z;
    std::vector<std::vector<float>> db;  // one row per time, 10 log10(|psi|^2 / initial max), floor -60

    void write(std::ostream& out) const;
};

struct ExactRunOptions {
    bool record_density = false;
    std::size_t density_every_steps = 50;
    std::size_t free_frames = 40;
    std::size_t max_columns = 1024;
};

struct ExactRunResult {
    std::array<double, 5> ports{};
    double center_shift = 0.0;
    double norm_drift = 0.0;
    WavePacket final_state;  // momentum representation
    std::optional<DensityMovie> movie;
};

// Evolves `packet` through the sequence from t_start to t_end (pulse windows by
// Strang steps, gaps analytically) and bins the final momenta around the
// accumulated shift m g (t_end - t_start).
ExactRunResult run_sequence(const SolverConfig& cfg, const PulseSequence& seq, const WavePacket& packet,
                            double t_start, double t_end, const ExactRunOptions& options = {});

// BS(0) - M(T) - BS(2T) with the config's eps_pol applied to every pulse.
ExactRunResult run_mz_exact(const SolverConfig& cfg, const StrategyPreset& pulses, double T, const WavePacket& packet,
                            const ExactRunOptions& options = {});
// Same sequence in the laboratory frame (cfg.frame must be Lab).
ExactRunResult run_lab_frame(const SolverConfig& cfg, const StrategyPreset& pulses, double T, const WavePacket& packet,
                             const ExactRunOptions& options = {});

// Single pulse acting on `packet` over its own window; ports centred on 0.
ExactRunResult run_single_pulse(const SolverConfig& cfg, const PulseSpec& pulse, const WavePacket& packet);

}  // namespace dbd
