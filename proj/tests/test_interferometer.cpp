#include <doctest.h>

#include <cmath>

#include "dbd/errors.hpp"
#include "dbd/interferometer.hpp"

using namespace dbd;

namespace {

SMatrix5 ideal_splitter() {
    const double r = 1.0 / std::sqrt(2.0);
    SMatrix5 b = SMatrix5::Zero();
    b(0, 1) = b(0, 2) = b(1, 0) = b(2, 0) = r;
    b(1, 1) = b(2, 2) = 0.5;
    b(1, 2) = b(2, 1) = -0.5;
    b(3, 3) = b(4, 4) = 1.0;
    return b;
}

SMatrix5 ideal_mirror() {
    SMatrix5 m = SMatrix5::Zero();
    m(0, 0) = m(3, 3) = m(4, 4) = 1.0;
    m(1, 2) = m(2, 1) = 1.0;
    return m;
}

FiveLevelInterferometer ideal_interferometer() {
    auto bs = [](double) { return ideal_splitter(); };
    return FiveLevelInterferometer(bs, [](double) { return ideal_mirror(); }, bs, 0.0);
}

double ideal_fringe(double g, double T) { return 0.5 * (1.0 - std::cos(4.0 * g * T * T)); }

}  // namespace

TEST_SUITE("interferometer") {
    TEST_CASE("free propagation phase") {
        const double g = 0.000357, T = 100.0, q = 0.37;
        CHECK(std::abs(free_phase(q, T, g)) == doctest::Approx(1.0).epsilon(1e-15));
        const cplx expected = std::polar(1.0, -(kMass * g * T * T * q + T * q * q) / (2.0 * kMass));
        CHECK(std::abs(free_phase(q, T, g) - expected) < 1e-12);
        const auto d = FreePropagatorDiag::make(0.1, T, g);
        CHECK(std::abs(d.phases[1] - free_phase(2.1, T, g)) < 1e-12);
        CHECK(std::abs(d.phases[4] - free_phase(-3.9, T, g)) < 1e-12);
    }

    TEST_CASE("ideal pulses reproduce the cosine fringe exactly") {
        const auto mz = ideal_interferometer();
        for (double g : {0.0, 0.000357, 0.002})
            for (double T : {5.0, 31.0, 47.5, 66.0}) {
                const auto pop = mz.populations(g, T, 0.0, 0.0);
                CHECK(std::abs(pop[1] + pop[2] - ideal_fringe(g, T)) < 1e-12);
                const auto wide = mz.populations(g, T, 0.05, 0.05);
                CHECK(std::abs(wide[1] + wide[2] - ideal_fringe(g, T)) < 1e-12);
            }
        CHECK(mz.populations(0.0, 40.0, 0.0, 0.0)[0] == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("ideal fringe has unit contrast at the expected extrema") {
        const auto mz = ideal_interferometer();
        MZConfig cfg;
        cfg.sigma_p = 0.0;
        const ContrastResult c = measure_contrast(mz, cfg, 0.05);
        CHECK(c.contrast == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(4.0 * cfg.g * c.t_max * c.t_max == doctest::Approx(kPi).epsilon(1e-4));
        CHECK(4.0 * cfg.g * c.t_min * c.t_min == doctest::Approx(2.0 * kPi).epsilon(1e-4));
        CHECK(c.offset == doctest::Approx(1.0).epsilon(1e-6));
    }

    TEST_CASE("ideal fringe fit recovers the phase scale") {
        const auto mz = ideal_interferometer();
        MZConfig cfg;
        cfg.sigma_p = 0.0;
        const auto [lo, hi] = contrast_window(cfg.g);
        const FringeFit fit = fit_leading_component(t_scan(mz, cfg, lo, 3.0 * hi, 800));
        CHECK(fit.phase_scale == doctest::Approx(1.0).epsilon(0.01));
        CHECK(fit.amplitude == doctest::Approx(0.5).epsilon(0.01));
        CHECK(fit.residual_rms < 1e-3);
    }

    TEST_CASE("constant signal has no extremum") {
        FringeSignal s;
        s.g = 0.000357;
        const auto [lo, hi] = contrast_window(s.g);
        for (int i = 0; i <= 100; ++i) {
            s.T.push_back(lo - 1.0 + (hi - lo + 2.0) * i / 100.0);
            s.conjugate.push_back(0.5);
        }
        CHECK_THROWS_WITH_AS(extract_contrast(s), doctest::Contains("no extremum"), NumericalError);
    }

    TEST_CASE("undersampled scans are rejected") {
        const auto mz = ideal_interferometer();
        MZConfig cfg;
        cfg.sigma_p = 0.0;
        CHECK_THROWS_WITH_AS(t_scan(mz, cfg, 10.0, 120.0, 20), doctest::Contains("need at least"), ConfigError);
    }

    TEST_CASE("zero-coupling pulses compose to the free propagators") {
        PulseSpec off = preset(Strategy::CDbd).bs;
        off.envelope.omega_peak = 0.0;
        const StrategyPreset p{Strategy::CDbd, off, off};
        const SMatrix5 s = total_smatrix(0.000357, 0.02, 40.0, p);
        SMatrix5 d = s;
        d.diagonal().setZero();
        CHECK(d.cwiseAbs().maxCoeff() == 0.0);
        const double p2 = 0.02 + kMass * 0.000357 * 40.0;
        CHECK(std::abs(s(1, 1) - free_phase(2.02, 40.0, 0.000357) * free_phase(p2 + 2.0, 40.0, 0.000357)) < 1e-12);
    }

    TEST_CASE("zero acceleration uses one quasi-momentum for all pulses") {
        const StrategyPreset p = preset(Strategy::DsDbd);
        const SMatrix5 s = total_smatrix(0.0, 0.05, 20.0, p);
        const SMatrix5 b = pulse_smatrix(0.05, p.bs), m = pulse_smatrix(0.05, p.mirror);
        CHECK((s - compose_mz(b, m, b, 0.05, 20.0, 0.0)).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("drift out of the Brillouin zone is reported") {
        CHECK_THROWS_WITH_AS(total_smatrix(0.01, 0.5, 150.0, preset(Strategy::CDbd)), doctest::Contains("T too large"),
                             ConfigError);
    }

    TEST_CASE("parity keeps the first-order ports balanced without acceleration") {
        MZConfig cfg;
        cfg.g = 0.0;
        cfg.T = 23.0;
        cfg.eps_pol = 0.05;
        cfg.preset = preset(Strategy::DsDbd);
        const auto pop = port_populations_5ls(cfg);
        CHECK(std::abs(pop[1] - pop[2]) < 1e-8);
        CHECK(std::abs(pop[0] + pop[1] + pop[2] + pop[3] + pop[4] - 1.0) < 5e-3);
    }

    TEST_CASE("populations are bounded and leakage is small") {
        MZConfig cfg;
        cfg.preset = preset(Strategy::CDbd);
        cfg.T = 50.0;
        const auto pop = port_populations_5ls(cfg);
        double total = 0.0;
        for (double p : pop) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            total += p;
        }
        CHECK(std::abs(total - 1.0) < 5e-3);
    }

    TEST_CASE("leading fringe component follows 4 g T^2 for a narrow cloud") {
        MZConfig cfg;
        cfg.preset = preset(Strategy::DsDbd);
        cfg.sigma_p = 0.01;
        const auto [lo, hi] = contrast_window(cfg.g);
        const auto mz = FiveLevelInterferometer::for_config(cfg, 2.0 * hi);
        const FringeFit fit = fit_leading_component(t_scan(mz, cfg, lo, 2.0 * hi, 600));
        CHECK(fit.phase_scale == doctest::Approx(1.0).epsilon(0.01));
    }

    TEST_CASE("scan axes parse by name") {
        for (ScanAxis a : {ScanAxis::SigmaP, ScanAxis::P0, ScanAxis::EpsPol}) CHECK(parse_axis(to_string(a)) == a);
        CHECK_THROWS_AS(parse_axis("tau"), ConfigError);
    }
}
