#include "dbd/units.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dbd/errors.hpp"
#include "dbd/fourier.hpp"

namespace dbd {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void require_rep(const WavePacket& w, Representation rep, const char* what) {
    if (w.representation() != rep) throw std::invalid_argument(std::string(what) + ": wrong representation");
}

}  // namespace

SpatialGrid::SpatialGrid(std::size_t n_points, double dp) : n_(n_points), dp_(dp) {
    if (!is_power_of_two(n_points)) throw ConfigError("grid size must be a power of two");
    if (!(dp > 0.0)) throw ConfigError("grid momentum step must be positive");
    const double bins = 2.0 / dp;
    if (std::abs(bins - std::round(bins)) > 1e-9 * bins)
        throw ConfigError("grid momentum step must divide 2 hbar k_L");
    recoil_bins_ = static_cast<std::size_t>(std::llround(bins));
    if (recoil_bins_ * 4 > n_points) throw ConfigError("grid too small to hold the lattice momentum classes");
    dz_ = 2.0 * kPi / (dp * static_cast<double>(n_points));
}

SpatialGrid SpatialGrid::standard() { return SpatialGrid(8192, 1.0 / 256.0); }

SpatialGrid SpatialGrid::sized_for(double sigma_p, double duration, double p_extent, double p_reach) {
    if (!(sigma_p > 0.0) || duration < 0.0 || !(p_extent >= 6.0))
        throw ConfigError("invalid grid sizing request");
    // Initial position spread is 1/(2 sigma_p); keep ten of those as margin.
    const double half_length = 2.0 * p_reach / kMass * 0.5 * duration + 10.0 / (2.0 * sigma_p);
    double dp = 1.0;
    while (dp > sigma_p / 8.0 || 2.0 * kPi / dp < 2.0 * half_length) dp *= 0.5;
    std::size_t n = 2;
    while (static_cast<double>(n) * dp < 2.0 * p_extent) n *= 2;
    return SpatialGrid(n, dp);
}

std::size_t SpatialGrid::index_of_momentum(double p) const {
    const auto m = static_cast<long long>(std::llround(p / dp_));
    const auto nn = static_cast<long long>(n_);
    return static_cast<std::size_t>(((m % nn) + nn) % nn);
}

WavePacket::WavePacket(SpatialGrid grid, Representation rep, std::vector<cplx> amplitudes)
    : grid_(grid), rep_(rep), amps_(std::move(amplitudes)) {
    if (amps_.size() != grid_.size()) throw std::invalid_argument("amplitude count does not match grid");
}

double WavePacket::norm_squared() const {
    return std::accumulate(amps_.begin(), amps_.end(), 0.0, [](double s, cplx a) { return s + std::norm(a); });
}

double WavePacket::mean_momentum() const {
    require_rep(*this, Representation::Momentum, "mean_momentum");
    double s = 0.0;
    for (std::size_t k = 0; k < amps_.size(); ++k) s += grid_.p(k) * std::norm(amps_[k]);
    return s / norm_squared();
}

double WavePacket::momentum_std() const {
    const double mean = mean_momentum();
    double s = 0.0;
    for (std::size_t k = 0; k < amps_.size(); ++k) s += std::pow(grid_.p(k) - mean, 2) * std::norm(amps_[k]);
    return std::sqrt(s / norm_squared());
}

double WavePacket::mean_position() const {
    require_rep(*this, Representation::Position, "mean_position");
    double s = 0.0;
    for (std::size_t j = 0; j < amps_.size(); ++j) s += grid_.z(j) * std::norm(amps_[j]);
    return s / norm_squared();
}

double WavePacket::position_std() const {
    const double mean = mean_position();
    double s = 0.0;
    for (std::size_t j = 0; j < amps_.size(); ++j) s += std::pow(grid_.z(j) - mean, 2) * std::norm(amps_[j]);
    return std::sqrt(s / norm_squared());
}

WavePacket make_gaussian_packet(double p0, double sigma_p, const SpatialGrid& grid) {
    if (!(sigma_p > 0.0)) throw ConfigError("momentum width must be positive");
    if (std::abs(p0) + 5.0 * sigma_p >= 1.0) throw ConfigError("packet must lie inside the first Brillouin zone");
    if (sigma_p / grid.dp() < 8.0) throw ConfigError("grid too coarse: fewer than 8 momentum points per std");
    std::vector<cplx> amps(grid.size());
    double norm = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = (grid.p(k) - p0) / sigma_p;
        const double a = std::exp(-0.25 * x * x);
        amps[k] = a;
        norm += a * a;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& a : amps) a *= scale;
    return WavePacket(grid, Representation::Momentum, std::move(amps));
}

WavePacket make_plane_wave(double p, const SpatialGrid& grid) {
    std::vector<cplx> amps(grid.size());
    amps[grid.index_of_momentum(p)] = 1.0;
    return WavePacket(grid, Representation::Momentum, std::move(amps));
}

// With z_0 = -L/2 the offset phase e^{-i p_k z_0} reduces to (-1)^k.
WavePacket to_momentum(const WavePacket& w) {
    require_rep(w, Representation::Position, "to_momentum");
    std::vector<cplx> a(w.amplitudes().begin(), w.amplitudes().end());
    fft_for(a.size())->forward(a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= (k % 2 ? -scale : scale);
    return WavePacket(w.grid(), Representation::Momentum, std::move(a));
}

WavePacket to_position(const WavePacket& w) {
    require_rep(w, Representation::Momentum, "to_position");
    std::vector<cplx> a(w.amplitudes().begin(), w.amplitudes().end());
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= (k % 2 ? -scale : scale);
    fft_for(a.size())->backward(a);
    return WavePacket(w.grid(), Representation::Position, std::move(a));
}

std::array<double, 5> port_populations(const WavePacket& w, double center_shift) {
    require_rep(w, Representation::Momentum, "port_populations");
    const SpatialGrid& g = w.grid();
    if (std::abs(center_shift) + 5.0 > g.p_extent())
        throw ConfigError("grid momentum extent too small: port bins would overlap");
    static constexpr std::array<double, 5> offsets{0.0, 2.0, -2.0, 4.0, -4.0};
    std::array<double, 5> pops{};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double p = g.p(k);
        for (std::size_t i = 0; i < 5; ++i) {
            const double c = center_shift + offsets[i];
            if (p >= c - 1.0 && p < c + 1.0) {
                pops[i] += std::norm(w.amplitudes()[k]);
                break;
            }
        }
    }
    return pops;
}

}  // namespace dbd
