#include "dbd/pulses.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dbd/errors.hpp"

namespace dbd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr GaussianEnvelope kBsEnvelope{2.0, 0.47, 0.0};
constexpr GaussianEnvelope kMirrorEnvelope{2.89, 0.64, 0.0};
constexpr GaussianEnvelope kOctMirrorEnvelope{2.502, 1.829, 3.879};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct ParsedProfile {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::pair<std::string, std::string>> header;  // "# key = value" lines
};

ParsedProfile parse_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open detuning profile " + path.string());
    ParsedProfile out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto eq = t.find('=');
            if (eq != std::string::npos)
                out.header.emplace_back(trim(t.substr(1, eq - 1)), trim(t.substr(eq + 1)));
            continue;
        }
        std::string row = t;
        for (char& c : row)
            if (c == ',') c = ' ';
        std::istringstream ss(row);
        double a = 0.0, b = 0.0;
        std::string rest;
        if (!(ss >> a >> b) || (ss >> rest))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected two numeric columns");
        if (!out.times.empty() && !(a > out.times.back()))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": times must be strictly increasing");
        out.times.push_back(a);
        out.values.push_back(b);
    }
    if (out.times.size() < 2) throw ConfigError(path.string() + ": profile needs at least two rows");
    return out;
}

void write_profile(std::ostream& out, const SampledDetuning& profile, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "# t delta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < profile.times().size(); ++i)
        out << profile.times()[i] << ' ' << profile.values()[i] << '\n';
}

}  // namespace

double GaussianEnvelope::operator()(double t) const {
    const double s = t - t0;
    if (std::abs(s) > kWindowHalfWidths * tau) return 0.0;
    return omega_peak * std::exp(-s * s / (2.0 * tau * tau));
}

double envelope_value(const GaussianEnvelope& e, double t) { return e(t); }

SampledDetuning::SampledDetuning(std::vector<double> times, std::vector<double> values) {
    try {
        spline_ = CubicSpline<double>(std::move(times), std::move(values));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sampled detuning: ") + e.what());
    }
}

double SampledDetuning::operator()(double t) const {
    if (t < spline_.front() || t > spline_.back()) return 0.0;
    return spline_(t);
}

bool SampledDetuning::operator==(const SampledDetuning& o) const {
    return std::equal(times().begin(), times().end(), o.times().begin(), o.times().end()) &&
           std::equal(values().begin(), values().end(), o.values().begin(), o.values().end());
}

double PulseSpec::detuning_at(double t) const {
    return std::visit(overloaded{
                          [](const ZeroDetuning&) { return 0.0; },
                          [](const ConstantDetuning& c) { return c.delta; },
                          [&](const LinearSweep& l) { return l.alpha / envelope.tau * (t - envelope.t0) + l.beta; },
                          [&](const SampledDetuning& s) { return s(t); },
                      },
                      detuning);
}

double PulseSpec::laser_phase(double t) const { return (4.0 + detuning_at(t)) * (t - phase_origin); }

double PulseSpec::lattice_drive(double t) const {
    const double omega = envelope(t);
    if (omega == 0.0) return 0.0;
    return omega * (std::cos(laser_phase(t)) + eps_pol);
}

PulseSpec PulseSpec::with_peak_scale(double factor) const {
    PulseSpec p = *this;
    p.envelope.omega_peak *= factor;
    return p;
}

PulseSpec PulseSpec::with_eps_pol(double eps) const {
    PulseSpec p = *this;
    p.eps_pol = eps;
    return p;
}

PulseSpec PulseSpec::shifted(double dt) const {
    PulseSpec p = *this;
    p.envelope.t0 += dt;
    p.phase_origin += dt;
    if (auto* s = std::get_if<SampledDetuning>(&p.detuning)) {
        std::vector<double> times(s->times().begin(), s->times().end());
        for (double& t : times) t += dt;
        p.detuning = SampledDetuning(std::move(times), std::vector<double>(s->values().begin(), s->values().end()));
    }
    return p;
}

double laser_phase(const PulseSpec& p, double t) { return p.laser_phase(t); }

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::CDbd: return "C-DBD";
        case Strategy::CdDbd: return "CD-DBD";
        case Strategy::DsDbd: return "DS-DBD";
        case Strategy::Oct: return "OCT";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : kAllStrategies)
        if (name == to_string(s)) return s;
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected C-DBD, CD-DBD, DS-DBD or OCT)");
}

StrategyPreset StrategyPreset::with_eps_pol(double eps) const {
    return StrategyPreset{name, bs.with_eps_pol(eps), mirror.with_eps_pol(eps)};
}

StrategyPreset preset(Strategy name, const std::optional<PulseSpec>& oct_mirror) {
    switch (name) {
        case Strategy::CDbd:
            return {name, PulseSpec{kBsEnvelope, ZeroDetuning{}}, PulseSpec{kMirrorEnvelope, ZeroDetuning{}}};
        case Strategy::CdDbd:
            return {name, PulseSpec{kBsEnvelope, ConstantDetuning{0.27}}, PulseSpec{kMirrorEnvelope, ConstantDetuning{0.0}}};
        case Strategy::DsDbd:
            return {name, PulseSpec{kBsEnvelope, LinearSweep{0.37, 0.315}},
                    PulseSpec{kMirrorEnvelope, LinearSweep{0.75, -4.0}}};
        case Strategy::Oct:
            if (!oct_mirror) throw ConfigError("OCT preset: mirror detuning profile required");
            return {name, PulseSpec{kBsEnvelope, LinearSweep{0.37, 0.315}}, *oct_mirror};
    }
    throw ConfigError("unknown strategy");
}

StrategyPreset preset(Strategy name, const std::filesystem::path& oct_profile) {
    if (name != Strategy::Oct) return preset(name);
    if (oct_profile.empty()) throw ConfigError("OCT preset: mirror detuning profile required");
    return preset(name, load_mirror_pulse(oct_profile));
}

SampledDetuning load_sampled_detuning(const std::filesystem::path& path) {
    ParsedProfile parsed = parse_profile(path);
    return SampledDetuning(std::move(parsed.times), std::move(parsed.values));
}

void save_sampled_detuning(const std::filesystem::path& path, const SampledDetuning& profile,
                           const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_profile(out, profile, comments);
}

PulseSpec load_mirror_pulse(const std::filesystem::path& path) {
    ParsedProfile parsed = parse_profile(path);
    GaussianEnvelope env = kOctMirrorEnvelope;
    double eps = 0.0;
    double origin = 0.0;
    for (const auto& [key, value] : parsed.header) {
        double v = 0.0;
        try {
            v = std::stod(value);
        } catch (const std::exception&) {
            continue;
        }
        if (key == "omega_peak") env.omega_peak = v;
        else if (key == "tau") env.tau = v;
        else if (key == "t0") env.t0 = v;
        else if (key == "eps_pol") eps = v;
        else if (key == "phase_origin") origin = v;
    }
    return PulseSpec{env, SampledDetuning(std::move(parsed.times), std::move(parsed.values)), eps, origin};
}

void save_mirror_pulse(const std::filesystem::path& path, const PulseSpec& mirror,
                       const std::vector<std::string>& comments) {
    const auto* profile = std::get_if<SampledDetuning>(&mirror.detuning);
    if (!profile) throw ConfigError("mirror pulse has no sampled detuning to save");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    std::vector<std::string> header = comments;
    std::ostringstream os;
    os << std::setprecision(17);
    os << "omega_peak = " << mirror.envelope.omega_peak;
    header.push_back(os.str());
    os.str("");
    os << "tau = " << mirror.envelope.tau;
    header.push_back(os.str());
    os.str("");
    os << "t0 = " << mirror.envelope.t0;
    header.push_back(os.str());
    os.str("");
    os << "phase_origin = " << mirror.phase_origin;
    header.push_back(os.str());
    write_profile(out, *profile, header);
}

}  // namespace dbd
