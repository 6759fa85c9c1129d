#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dbd {

using cplx = std::complex<double>;

// Recoil units: hbar = k_L = omega_rec = 1. Momenta in hbar k_L, times in
// 1/omega_rec, lengths in 1/k_L, energies in hbar omega_rec, accelerations
// in omega_rec^2 / k_L.
struct RecoilFrame {
    static constexpr double hbar = 1.0;
    static constexpr double k_L = 1.0;
    static constexpr double omega_rec = 1.0;
    static constexpr double mass = hbar * k_L * k_L / (2.0 * omega_rec);
};

inline constexpr double kMass = RecoilFrame::mass;
inline constexpr double kPi = 3.14159265358979323846;

// Uniform periodic grid. Positions z_j = (j - N/2) dz, momenta in FFT order
// p_k = k dp (k < N/2) or (k - N) dp. The momentum step must divide the
// lattice recoil 2 hbar k_L so that cos(2 k_L z) couples grid points exactly.
class SpatialGrid {
public:
    SpatialGrid(std::size_t n_points, double dp);

    // 2^13 points, dp = 1/256: z in [-256 pi, 256 pi), p in [-16, 16).
    static SpatialGrid standard();
    // Smallest commensurate grid resolving sigma_p with >= 8 points per std,
    // wide enough for classes up to |p| = p_reach to travel for `duration`.
    static SpatialGrid sized_for(double sigma_p, double duration, double p_extent = 16.0,
                                 double p_reach = 4.5);

    std::size_t size() const { return n_; }
    double dp() const { return dp_; }
    double dz() const { return dz_; }
    double length() const { return dz_ * static_cast<double>(n_); }
    double z_min() const { return -0.5 * length(); }
    double z_max() const { return 0.5 * length(); }
    double p_extent() const { return 0.5 * dp_ * static_cast<double>(n_); }
    // Grid points per lattice recoil 2 hbar k_L.
    std::size_t recoil_bins() const { return recoil_bins_; }

    double z(std::size_t j) const { return (static_cast<double>(j) - 0.5 * static_cast<double>(n_)) * dz_; }
    double p(std::size_t k) const {
        const auto kk = static_cast<double>(k);
        return k < n_ / 2 ? kk * dp_ : (kk - static_cast<double>(n_)) * dp_;
    }
    // FFT-order index of the grid momentum nearest to p (wrapped).
    std::size_t index_of_momentum(double p) const;

    bool operator==(const SpatialGrid&) const = default;

private:
    std::size_t n_;
    double dp_;
    double dz_;
    std::size_t recoil_bins_;
};

enum class Representation { Position, Momentum };

// Unit-normalized discrete amplitudes: sum |a_j|^2 = 1. Momentum amplitudes
// are in FFT order; |a_k|^2 / dp is the momentum density.
class WavePacket {
public:
    WavePacket(SpatialGrid grid, Representation rep, std::vector<cplx> amplitudes);

    const SpatialGrid& grid() const { return grid_; }
    Representation representation() const { return rep_; }
    std::span<const cplx> amplitudes() const { return amps_; }
    double norm_squared() const;

    double mean_momentum() const;   // momentum representation only
    double momentum_std() const;    // momentum representation only
    double mean_position() const;   // position representation only
    double position_std() const;    // position representation only

private:
    SpatialGrid grid_;
    Representation rep_;
    std::vector<cplx> amps_;
};

// Gaussian momentum distribution N(p0, sigma_p^2), centred at z = 0.
WavePacket make_gaussian_packet(double p0, double sigma_p, const SpatialGrid& grid);
// All amplitude in the single momentum bin nearest to p.
WavePacket make_plane_wave(double p, const SpatialGrid& grid);

WavePacket to_momentum(const WavePacket& w);
WavePacket to_position(const WavePacket& w);

// Populations of the five momentum classes centre_shift + {0, +2, -2, +4, -4},
// each summed over [c - 1, c + 1).
std::array<double, 5> port_populations(const WavePacket& w, double center_shift);

}  // namespace dbd
