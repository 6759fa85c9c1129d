#include <doctest.h>

#include <cmath>

#include "dbd/errors.hpp"
#include "dbd/five_level.hpp"

using namespace dbd;

namespace {

// S(p) and S(-p) are related by swapping +n and -n.
SMatrix5 mirrored(const SMatrix5& s) {
    constexpr int swap[5] = {0, 2, 1, 4, 3};
    SMatrix5 m;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = s(swap[i], swap[j]);
    return m;
}

double max_abs(const SMatrix5& m) { return m.cwiseAbs().maxCoeff(); }

const PulseSpec kOddPulse{GaussianEnvelope{2.4, 0.9, 0.3}, SampledDetuning({-4.2, -1.0, 0.3, 2.0, 4.8}, {-3.0, -1.0, 0.2, 0.9, 1.6}),
                          0.03, 0.0};

}  // namespace

TEST_SUITE("five_level") {
    TEST_CASE("basis ordering") {
        CHECK(level_order(0) == 0);
        CHECK(level_order(1) == 1);
        CHECK(level_order(2) == -1);
        CHECK(level_order(3) == 2);
        CHECK(level_order(4) == -2);
        for (int i = 0; i < 7; ++i) CHECK(level_index(level_order(i)) == i);
    }

    TEST_CASE("hamiltonian diagonal and couplings") {
        const PulseSpec off{GaussianEnvelope{2.0, 0.47, 0.0}, ZeroDetuning{}};
        const auto h = five_level_hamiltonian(0.0, 10.0, off);
        CHECK(h(0, 0) == 0.0);
        CHECK(h(1, 1) == 4.0);
        CHECK(h(2, 2) == 4.0);
        CHECK(h(3, 3) == 16.0);
        CHECK(h(4, 4) == 16.0);
        CHECK(h(0, 1) == 0.0);
        const auto peak = five_level_hamiltonian(0.1, 0.0, off);
        CHECK(peak(0, 1) == doctest::Approx(2.0));
        CHECK(peak(0, 2) == doctest::Approx(2.0));
        CHECK(peak(1, 3) == doctest::Approx(2.0));
        CHECK(peak(2, 4) == doctest::Approx(2.0));
        CHECK(peak(1, 2) == 0.0);
        CHECK(peak(1, 1) == doctest::Approx(2.1 * 2.1));
    }

    TEST_CASE("zero coupling gives the identity") {
        PulseSpec p = preset(Strategy::CDbd).mirror;
        p.envelope.omega_peak = 0.0;
        CHECK(max_abs(pulse_smatrix(0.07, p) - SMatrix5::Identity()) == 0.0);
        CHECK(bs_efficiency(0.0, p) == 0.0);
    }

    TEST_CASE("S-matrices are unitary up to truncation leakage") {
        for (Strategy s : {Strategy::CDbd, Strategy::CdDbd, Strategy::DsDbd}) {
            for (const PulseSpec& pulse : {preset(s).bs, preset(s).mirror}) {
                for (double p : {-0.2, -0.05, 0.0, 0.13, 0.2}) {
                    const SMatrix5 m = pulse_smatrix(p, pulse);
                    CHECK(max_abs(m.adjoint() * m - SMatrix5::Identity()) < 5e-3);
                    for (int c = 0; c < 5; ++c) CHECK(m.col(c).squaredNorm() <= 1.0 + 1e-8);
                }
            }
        }
    }

    TEST_CASE("parity relates S(p) and S(-p)") {
        for (const PulseSpec& pulse : {preset(Strategy::DsDbd).mirror, preset(Strategy::CdDbd).bs.with_eps_pol(0.07)}) {
            for (double p : {0.04, 0.17}) {
                const SMatrix5 a = pulse_smatrix(p, pulse);
                const SMatrix5 b = pulse_smatrix(-p, pulse);
                CHECK(max_abs(mirrored(a) - b) < 1e-8);
            }
        }
    }

    TEST_CASE("mirror efficiencies obey the parity relation at any polarization error") {
        for (double eps : {0.0, 0.04}) {
            const PulseSpec pulse = kOddPulse.with_eps_pol(eps);
            for (double p : {0.03, 0.11, 0.2}) {
                CHECK(std::abs(mirror_efficiency_left(p, pulse) - mirror_efficiency_right(-p, pulse)) < 1e-8);
                const auto [right, left] = mirror_efficiencies(p, pulse);
                CHECK(right == doctest::Approx(mirror_efficiency_right(p, pulse)).epsilon(1e-9));
                CHECK(left == doctest::Approx(mirror_efficiency_left(p, pulse)).epsilon(1e-9));
            }
        }
    }

    TEST_CASE("adaptive and fixed-step propagators agree") {
        for (const PulseSpec& pulse : {preset(Strategy::CDbd).bs, preset(Strategy::DsDbd).mirror, kOddPulse}) {
            const SMatrix5 a = pulse_smatrix(0.06, pulse);
            const SMatrix5 b = pulse_smatrix_fixed_step(0.06, pulse, 1e-3);
            CHECK(max_abs(a - b) < 1e-8);
        }
    }

    TEST_CASE("seven-level basis embeds the five-level one") {
        PulseSpec weak = preset(Strategy::CDbd).bs;
        weak.envelope.omega_peak = 0.1;
        const SMatrix7 s7 = pulse_smatrix7(0.0, weak);
        const SMatrix5 s5 = pulse_smatrix(0.0, weak);
        CHECK((s7.col(kZero).head<5>() - s5.col(kZero)).cwiseAbs().maxCoeff() < 1e-6);
    }

    TEST_CASE("tabulated efficiencies") {
        const StrategyPreset c = preset(Strategy::CDbd);
        CHECK(integrated_efficiency(c.bs, PulseKind::BeamSplitter, 0.0, 0.05) == doctest::Approx(0.97348).epsilon(1e-3 / 0.97));
        CHECK(integrated_efficiency(c.mirror, PulseKind::Mirror, 0.0, 0.05) == doctest::Approx(0.96426).epsilon(1e-3 / 0.96));
        CHECK(std::abs(integrated_efficiency(preset(Strategy::CdDbd).bs, PulseKind::BeamSplitter, 0.0, 0.05) - 0.99757) < 5e-4);
        const StrategyPreset d = preset(Strategy::DsDbd);
        CHECK(std::abs(integrated_efficiency(d.bs, PulseKind::BeamSplitter, 0.0, 0.05) - 0.99937) < 5e-4);
        // p0 = 2 folds onto quasi-momentum 0.
        CHECK(std::abs(integrated_efficiency(d.mirror, PulseKind::Mirror, 2.0, 0.05) - 0.97465) < 5e-4);
    }

    TEST_CASE("narrow momentum distribution reduces to the pointwise efficiency") {
        const PulseSpec bs = preset(Strategy::CDbd).bs;
        CHECK(integrated_efficiency(bs, PulseKind::BeamSplitter, 0.02, 0.0) == pointwise_efficiency(bs, PulseKind::BeamSplitter, 0.02));
        CHECK(integrated_efficiency(bs, PulseKind::BeamSplitter, 0.02, 1e-4) ==
              doctest::Approx(pointwise_efficiency(bs, PulseKind::BeamSplitter, 0.02)).epsilon(1e-6));
        CHECK_THROWS_AS(integrated_efficiency(bs, PulseKind::BeamSplitter, 0.9, 0.05), ConfigError);
    }

    TEST_CASE("landscape is symmetric in p and best without polarization error") {
        const PulseSpec bs = preset(Strategy::CDbd).bs;
        const std::vector<double> ps{-0.3, -0.15, 0.0, 0.15, 0.3};
        const std::vector<double> es{0.0, 0.05, 0.1};
        const Landscape l = efficiency_landscape(bs, PulseKind::BeamSplitter, ps, es);
        for (std::size_t j = 0; j < es.size(); ++j)
            for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(l.at(i, j) - l.at(4 - i, j)) < 1e-8);
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = 0; j < es.size(); ++j)
                if (l.at(i, j) > best) best = l.at(i, j), bi = i, bj = j;
        CHECK(bj == 0);
        CHECK(best == pointwise_efficiency(bs, PulseKind::BeamSplitter, ps[bi]));
        const std::vector<double> one_p{0.1}, one_e{0.02};
        CHECK(efficiency_landscape(bs, PulseKind::BeamSplitter, one_p, one_e).values[0] ==
              pointwise_efficiency(bs.with_eps_pol(0.02), PulseKind::BeamSplitter, 0.1));
    }

    TEST_CASE("S-matrix table interpolates the direct integration") {
        const PulseSpec m = preset(Strategy::DsDbd).mirror;
        const SMatrixTable table(m, -0.3, 0.3, 0.005);
        for (double p : {-0.2913, -0.071, 0.0, 0.1234, 0.2999})
            CHECK(max_abs(table(p) - pulse_smatrix(p, m)) < 1e-5);
        CHECK_THROWS_AS(table(0.31), NumericalError);
    }
}
