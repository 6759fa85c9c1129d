#pragma once

#include <Eigen/Core>
#include <complex>
#include <span>
#include <vector>

#include "dbd/pulses.hpp"
#include "dbd/spline.hpp"
#include "dbd/units.hpp"

namespace dbd {

template <int Levels>
using LevelMatrix = Eigen::Matrix<cplx, Levels, Levels>;
using SMatrix5 = LevelMatrix<5>;
using SMatrix7 = LevelMatrix<7>;

// Index i of the ordered basis {0, +1, -1, +2, -2, +3, -3} holds |p + 2 n hbar k_L>.
constexpr int level_order(int index) { return index == 0 ? 0 : (index % 2 ? (index + 1) / 2 : -(index / 2)); }
constexpr int level_index(int order) { return order == 0 ? 0 : (order > 0 ? 2 * order - 1 : -2 * order); }

inline constexpr int kZero = level_index(0);
inline constexpr int kUp = level_index(1);
inline constexpr int kDown = level_index(-1);

template <int Levels>
Eigen::Matrix<double, Levels, Levels> level_hamiltonian(double p, double t, const PulseSpec& pulse);
inline Eigen::Matrix<double, 5, 5> five_level_hamiltonian(double p, double t, const PulseSpec& pulse) {
    return level_hamiltonian<5>(p, t, pulse);
}

struct IntegratorOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    long max_steps = 1'000'000;
};

// S-matrix of one pulse across its 10 tau window, in the kinetic interaction
// picture referenced to the pulse centre t0.
template <int Levels>
LevelMatrix<Levels> pulse_smatrix_levels(double p, const PulseSpec& pulse, const IntegratorOptions& opts = {});
SMatrix5 pulse_smatrix(double p, const PulseSpec& pulse, const IntegratorOptions& opts = {});
SMatrix7 pulse_smatrix7(double p, const PulseSpec& pulse, const IntegratorOptions& opts = {});
// Fixed-step classical RK4 at dt and dt/2 combined by Richardson extrapolation.
SMatrix5 pulse_smatrix_fixed_step(double p, const PulseSpec& pulse, double dt = 1e-3);

double bs_efficiency(double p, const PulseSpec& pulse);
double mirror_efficiency_right(double p, const PulseSpec& pulse);  // |p+2> -> |p-2>
double mirror_efficiency_left(double p, const PulseSpec& pulse);   // |p-2> -> |p+2>
// Both mirror transfer probabilities from one two-column propagation.
std::pair<double, double> mirror_efficiencies(double p, const PulseSpec& pulse);

enum class PulseKind { BeamSplitter, Mirror };

double pointwise_efficiency(const PulseSpec& pulse, PulseKind kind, double p);
// Momentum-averaged efficiency over N(p0, sigma_p^2); p0 is folded into the
// first Brillouin zone. Converged to 1e-5 under node doubling.
double integrated_efficiency(const PulseSpec& pulse, PulseKind kind, double p0, double sigma_p, int nodes = 33);

struct Landscape {
    std::vector<double> p;
    std::vector<double> eps;
    std::vector<double> values;  // values[i * eps.size() + j] at (p[i], eps[j])
    double at(std::size_t i, std::size_t j) const { return values[i * eps.size() + j]; }
};

Landscape efficiency_landscape(const PulseSpec& pulse, PulseKind kind, std::span<const double> p_values,
                               std::span<const double> eps_values);

// Pulse S-matrix tabulated on a uniform quasi-momentum grid and interpolated
// with a natural cubic spline per element. Read-only after construction.
class SMatrixTable {
public:
    SMatrixTable(const PulseSpec& pulse, double p_lo, double p_hi, double spacing = 0.005);
    SMatrix5 operator()(double p) const;
    double p_lo() const { return spline_.front(); }
    double p_hi() const { return spline_.back(); }

private:
    CubicSpline<SMatrix5> spline_;
};

}  // namespace dbd
