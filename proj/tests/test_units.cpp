#include <doctest.h>

#include <cmath>

#include "dbd/errors.hpp"
#include "dbd/units.hpp"

using namespace dbd;

namespace {

double max_difference(std::span<const cplx> a, std::span<const cplx> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

TEST_SUITE("units") {
    TEST_CASE("recoil frame fixes the mass") {
        CHECK(RecoilFrame::omega_rec == RecoilFrame::hbar * RecoilFrame::k_L * RecoilFrame::k_L / (2.0 * kMass));
        CHECK(kMass == 0.5);
    }

    TEST_CASE("standard grid is Fourier dual and covers the truncation") {
        const SpatialGrid g = SpatialGrid::standard();
        CHECK(g.size() == 8192);
        CHECK(g.dp() * g.dz() * static_cast<double>(g.size()) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
        CHECK(g.p_extent() >= 14.5);
        CHECK(g.recoil_bins() == 512);
        CHECK(g.p(g.index_of_momentum(-2.0)) == -2.0);
    }

    TEST_CASE("grid rejects a momentum step that does not divide the recoil") {
        CHECK_THROWS_AS(SpatialGrid(1024, 0.3), ConfigError);
    }

    TEST_CASE("gaussian packet moments") {
        const SpatialGrid g(1 << 14, 1.0 / 2048);
        const WavePacket w = make_gaussian_packet(0.1, 0.01, g);
        CHECK(w.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w.mean_momentum() == doctest::Approx(0.1).epsilon(1e-6));
        CHECK(std::abs(w.momentum_std() - 0.01) < 1e-6);
    }

    TEST_CASE("packet validation") {
        const SpatialGrid g = SpatialGrid::standard();
        CHECK_THROWS_AS(make_gaussian_packet(0.0, 0.0, g), ConfigError);
        CHECK_THROWS_AS(make_gaussian_packet(0.9, 0.05, g), ConfigError);
        CHECK_THROWS_AS(make_gaussian_packet(0.0, 0.001, g), ConfigError);
    }

    TEST_CASE("single-bin packet has exact mean") {
        const SpatialGrid g = SpatialGrid::standard();
        const WavePacket w = make_plane_wave(0.0, g);
        CHECK(w.norm_squared() == 1.0);
        CHECK(w.mean_momentum() == 0.0);
    }

    TEST_CASE("Fourier round trip and Parseval") {
        const SpatialGrid g = SpatialGrid::standard();
        const WavePacket w = make_gaussian_packet(0.03, 0.05, g);
        const WavePacket z = to_position(w);
        CHECK(z.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
        const WavePacket back = to_momentum(z);
        CHECK(max_difference(back.amplitudes(), w.amplitudes()) < 1e-12);
    }

    TEST_CASE("position width of a gaussian follows the uncertainty relation") {
        const SpatialGrid g = SpatialGrid::standard();
        const WavePacket z = to_position(make_gaussian_packet(0.0, 0.05, g));
        CHECK(z.position_std() == doctest::Approx(10.0).epsilon(1e-8));
        CHECK(std::abs(z.mean_position()) < 1e-10);
    }

    TEST_CASE("plane wave exp(2iz) lands in the +2 bin") {
        const SpatialGrid g = SpatialGrid::standard();
        std::vector<cplx> a(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) a[j] = std::polar(1.0 / std::sqrt(double(g.size())), 2.0 * g.z(j));
        const WavePacket p = to_momentum(WavePacket(g, Representation::Position, a));
        CHECK(std::norm(p.amplitudes()[g.index_of_momentum(2.0)]) == doctest::Approx(1.0).epsilon(1e-12));
        const auto ports = port_populations(p, 0.0);
        CHECK(ports[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ports[0] + ports[2] + ports[3] + ports[4] < 1e-20);
    }

    TEST_CASE("equal superposition splits between the first-order ports") {
        const SpatialGrid g = SpatialGrid::standard();
        std::vector<cplx> a(g.size());
        a[g.index_of_momentum(2.0)] = 1.0 / std::sqrt(2.0);
        a[g.index_of_momentum(-2.0)] = 1.0 / std::sqrt(2.0);
        const auto ports = port_populations(WavePacket(g, Representation::Momentum, a), 0.0);
        CHECK(ports[0] == 0.0);
        CHECK(ports[1] == doctest::Approx(0.5));
        CHECK(ports[2] == doctest::Approx(0.5));
    }

    TEST_CASE("port bins must fit on the grid") {
        const SpatialGrid g(64, 0.125);
        CHECK_THROWS_AS(port_populations(make_plane_wave(0.0, g), 0.0), ConfigError);
    }
}
