#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dbd/spline.hpp"

namespace dbd {

// Pulses are truncated to t0 +- kWindowHalfWidths * tau.
inline constexpr double kWindowHalfWidths = 5.0;

struct GaussianEnvelope {
    double omega_peak = 0.0;
    double tau = 1.0;
    double t0 = 0.0;

    double operator()(double t) const;
    double window_begin() const { return t0 - kWindowHalfWidths * tau; }
    double window_end() const { return t0 + kWindowHalfWidths * tau; }
    double window_length() const { return 2.0 * kWindowHalfWidths * tau; }
};

struct ZeroDetuning {
    bool operator==(const ZeroDetuning&) const = default;
};
struct ConstantDetuning {
    double delta = 0.0;
    bool operator==(const ConstantDetuning&) const = default;
};
// Delta(t) = (alpha / tau)(t - t0) + beta with the owning envelope's tau, t0.
struct LinearSweep {
    double alpha = 0.0;
    double beta = 0.0;
    bool operator==(const LinearSweep&) const = default;
};
// Natural cubic spline through samples, zero outside the sampled range.
class SampledDetuning {
public:
    SampledDetuning(std::vector<double> times, std::vector<double> values);
    double operator()(double t) const;
    std::span<const double> times() const { return spline_.knots(); }
    std::span<const double> values() const { return spline_.values(); }
    bool operator==(const SampledDetuning& o) const;

private:
    CubicSpline<double> spline_;
};

using DetuningProfile = std::variant<ZeroDetuning, ConstantDetuning, LinearSweep, SampledDetuning>;

struct PulseSpec {
    GaussianEnvelope envelope;
    DetuningProfile detuning = ZeroDetuning{};
    double eps_pol = 0.0;
    // Time at which the accumulated laser phase is zero. Presets put it at the
    // envelope centre; an optimized mirror may place its centre elsewhere.
    double phase_origin = 0.0;

    double rabi(double t) const { return envelope(t); }
    double detuning_at(double t) const;
    // (4 + Delta(t)) (t - phase_origin).
    double laser_phase(double t) const;
    // Coefficient of 2 hbar cos(2 k_L z) in the potential, Omega(t)[cos Phi + eps].
    double lattice_drive(double t) const;

    PulseSpec with_peak_scale(double factor) const;
    PulseSpec with_eps_pol(double eps) const;
    // Same pulse moved by dt: centre, phase origin and sampled detuning.
    PulseSpec shifted(double dt) const;
};

double envelope_value(const GaussianEnvelope& e, double t);
double laser_phase(const PulseSpec& p, double t);

enum class Strategy { CDbd, CdDbd, DsDbd, Oct };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::CDbd, Strategy::CdDbd, Strategy::DsDbd, Strategy::Oct};

struct StrategyPreset {
    Strategy name;
    PulseSpec bs;
    PulseSpec mirror;

    StrategyPreset with_eps_pol(double eps) const;
};

// Tabulated pulse parameters. The OCT preset needs its optimized mirror.
StrategyPreset preset(Strategy name, const std::optional<PulseSpec>& oct_mirror = std::nullopt);
StrategyPreset preset(Strategy name, const std::filesystem::path& oct_profile);

// Profile files: '#' comment lines, then two columns "t delta" separated by
// whitespace and/or a comma. Times are in the pulse's own time axis.
SampledDetuning load_sampled_detuning(const std::filesystem::path& path);
void save_sampled_detuning(const std::filesystem::path& path, const SampledDetuning& profile,
                           const std::vector<std::string>& comments = {});

// A mirror pulse stored as a profile file whose header carries the envelope as
// "# omega_peak = ...", "# tau = ...", "# t0 = ..." lines.
PulseSpec load_mirror_pulse(const std::filesystem::path& path);
void save_mirror_pulse(const std::filesystem::path& path, const PulseSpec& mirror,
                       const std::vector<std::string>& comments = {});

}  // namespace dbd
