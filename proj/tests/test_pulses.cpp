#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dbd/errors.hpp"
#include "dbd/pulses.hpp"

using namespace dbd;

namespace {

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("dbd_test_" + name);
}

}  // namespace

TEST_SUITE("pulses") {
    TEST_CASE("gaussian envelope values and truncation") {
        const GaussianEnvelope e{2.0, 0.47, 0.0};
        CHECK(envelope_value(e, 0.0) == 2.0);
        CHECK(envelope_value(e, 0.47) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
        CHECK(envelope_value(e, 0.47) == doctest::Approx(1.2131).epsilon(1e-4));
        CHECK(envelope_value(e, 5.0 * 0.47 + 1e-9) == 0.0);
        for (double s : {0.1, 0.33, 1.7, 2.5})
            CHECK(envelope_value(GaussianEnvelope{1.3, 0.8, 2.1}, 2.1 + s) ==
                  doctest::Approx(envelope_value(GaussianEnvelope{1.3, 0.8, 2.1}, 2.1 - s)).epsilon(1e-14));
    }

    TEST_CASE("laser phase vanishes at the phase origin") {
        for (Strategy s : {Strategy::CDbd, Strategy::CdDbd, Strategy::DsDbd}) {
            CHECK(laser_phase(preset(s).bs, 0.0) == 0.0);
            CHECK(laser_phase(preset(s).mirror, 0.0) == 0.0);
        }
    }

    TEST_CASE("laser phase of constant and swept detunings") {
        const PulseSpec cd = preset(Strategy::CdDbd).bs;
        CHECK(laser_phase(cd, 1.0) == doctest::Approx(4.27).epsilon(1e-14));
        const PulseSpec ds = preset(Strategy::DsDbd).bs;
        const double tau = 0.47;
        // (4 + Delta(t)) t with Delta(tau) = alpha + beta.
        CHECK(laser_phase(ds, tau) == doctest::Approx((4.0 + 0.37 + 0.315) * tau).epsilon(1e-14));
        CHECK(laser_phase(ds, tau) == doctest::Approx(2.20195).epsilon(1e-6));
    }

    TEST_CASE("sweep phase minus carrier phase is quadratic with recoverable coefficients") {
        const PulseSpec ds = preset(Strategy::DsDbd).mirror;
        const PulseSpec flat{ds.envelope, ZeroDetuning{}};
        auto extra = [&](double s) { return laser_phase(ds, s) - laser_phase(flat, s); };
        const double h = 0.5;
        const double c2 = (extra(h) + extra(-h) - 2.0 * extra(0.0)) / (2.0 * h * h);
        const double c1 = (extra(h) - extra(-h)) / (2.0 * h);
        CHECK(c2 == doctest::Approx(0.75 / 0.64).epsilon(1e-12));
        CHECK(c1 == doctest::Approx(-4.0).epsilon(1e-12));
        CHECK(extra(0.9) == doctest::Approx(c2 * 0.81 + c1 * 0.9).epsilon(1e-12));
    }

    TEST_CASE("preset parameters") {
        const StrategyPreset c = preset(Strategy::CDbd);
        CHECK(c.bs.envelope.omega_peak == 2.0);
        CHECK(c.bs.envelope.tau == 0.47);
        CHECK(c.mirror.envelope.omega_peak == 2.89);
        CHECK(c.mirror.envelope.tau == 0.64);
        CHECK(std::get<ConstantDetuning>(preset(Strategy::CdDbd).bs.detuning).delta == 0.27);
        CHECK(preset(Strategy::CdDbd).mirror.detuning_at(0.3) == 0.0);
        CHECK(std::get<LinearSweep>(preset(Strategy::DsDbd).bs.detuning) == LinearSweep{0.37, 0.315});
        CHECK(std::get<LinearSweep>(preset(Strategy::DsDbd).mirror.detuning) == LinearSweep{0.75, -4.0});
        CHECK_THROWS_WITH_AS(preset(Strategy::Oct), doctest::Contains("profile required"), ConfigError);
    }

    TEST_CASE("strategy names round trip") {
        for (Strategy s : kAllStrategies) CHECK(parse_strategy(to_string(s)) == s);
        CHECK_THROWS_AS(parse_strategy("X-DBD"), ConfigError);
    }

    TEST_CASE("sampled detuning is zero outside its samples") {
        const SampledDetuning d({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0});
        for (double t : {-1.0, 0.0, 0.5, 1.7, 2.0, 3.0}) CHECK(d(t) == 0.0);
        const SampledDetuning r({0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0});
        CHECK(r(1.5) == doctest::Approx(2.5).epsilon(1e-14));
        CHECK(r(3.01) == 0.0);
    }

    TEST_CASE("profile file round trip") {
        const auto path = scratch("profile.txt");
        std::vector<double> t, v;
        for (int i = 0; i < 16; ++i) {
            t.push_back(-3.0 + 0.4 * i);
            v.push_back(std::sin(0.37 * i) * 3.1 + 1.0 / 3.0);
        }
        save_sampled_detuning(path, SampledDetuning(t, v), {"test profile"});
        const SampledDetuning back = load_sampled_detuning(path);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(std::abs(back.times()[i] - t[i]) < 1e-12);
            CHECK(std::abs(back.values()[i] - v[i]) < 1e-12);
        }
        std::filesystem::remove(path);
    }

    TEST_CASE("profile parsing accepts commas and reports bad lines") {
        const auto path = scratch("bad.txt");
        {
            std::ofstream out(path);
            out << "# comment\n0, 1.0\n1.0 2\n0.5 3\n";
        }
        CHECK_THROWS_WITH_AS(load_sampled_detuning(path), doctest::Contains(":4:"), ConfigError);
        {
            std::ofstream out(path);
            out << "0, 1.0\n1.0, x\n";
        }
        CHECK_THROWS_WITH_AS(load_sampled_detuning(path), doctest::Contains(":2:"), ConfigError);
        {
            std::ofstream out(path);
            out << "0, 1.0\n1.0, 2.0\n";
        }
        CHECK(load_sampled_detuning(path)(0.5) == doctest::Approx(1.5));
        std::filesystem::remove(path);
    }

    TEST_CASE("mirror pulse file keeps the envelope") {
        const auto path = scratch("mirror.txt");
        const PulseSpec m{GaussianEnvelope{3.1, 1.7, 0.4}, SampledDetuning({-8.1, 0.4, 8.9}, {-4.0, -1.0, 1.5}), 0.0,
                          0.0};
        save_mirror_pulse(path, m, {"seed = 3"});
        const PulseSpec back = load_mirror_pulse(path);
        CHECK(back.envelope.omega_peak == 3.1);
        CHECK(back.envelope.tau == 1.7);
        CHECK(back.envelope.t0 == 0.4);
        CHECK(back.phase_origin == 0.0);
        CHECK(std::get<SampledDetuning>(back.detuning) == std::get<SampledDetuning>(m.detuning));
        const StrategyPreset oct = preset(Strategy::Oct, path);
        CHECK(oct.bs.detuning == preset(Strategy::DsDbd).bs.detuning);
        std::filesystem::remove(path);
    }

    TEST_CASE("shifted pulse is the same pulse later") {
        const PulseSpec m{GaussianEnvelope{3.1, 1.7, 0.4}, SampledDetuning({-8.1, 0.4, 8.9}, {-4.0, -1.0, 1.5}), 0.02,
                          0.0};
        const PulseSpec s = m.shifted(2.5);
        for (double t : {-7.0, -1.2, 0.4, 3.3, 8.0}) {
            CHECK(s.rabi(t + 2.5) == doctest::Approx(m.rabi(t)).epsilon(1e-14));
            CHECK(s.detuning_at(t + 2.5) == doctest::Approx(m.detuning_at(t)).epsilon(1e-12));
            CHECK(s.laser_phase(t + 2.5) == doctest::Approx(m.laser_phase(t)).epsilon(1e-12));
        }
    }

    TEST_CASE("lattice drive includes the static polarization term") {
        const PulseSpec p = preset(Strategy::CDbd).bs.with_eps_pol(0.05);
        CHECK(p.lattice_drive(0.0) == doctest::Approx(2.0 * 1.05).epsilon(1e-14));
        CHECK(preset(Strategy::CDbd).bs.with_peak_scale(1.1).envelope.omega_peak == doctest::Approx(2.2));
    }
}
