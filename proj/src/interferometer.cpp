#include "dbd/interferometer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbd/errors.hpp"
#include "dbd/parallel.hpp"
#include "dbd/quadrature.hpp"

namespace dbd {

namespace {

using Column = Eigen::Matrix<cplx, 5, 1>;

double phase_to_time(double phase, double g) { return std::sqrt(phase / (4.0 * g)); }

void apply_free(Column& v, double p, double T, double g) {
    for (int i = 0; i < 5; ++i) v[i] *= free_phase(p + 2.0 * level_order(i), T, g);
}

void check_drift(double p, double T, double g) {
    const double p3 = p + 2.0 * kMass * g * T;
    if (std::abs(p) >= 1.0 || std::abs(p3) >= 1.0) {
        std::ostringstream msg;
        msg << "T too large for S-matrix model: quasi-momentum " << p3 << " leaves the Brillouin zone";
        throw ConfigError(msg.str());
    }
}

// Refined extremum of samples y around interior index i (quadratic through 3 points).
std::pair<double, double> quadratic_vertex(std::span<const double> x, std::span<const double> y, std::size_t i) {
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d1 = (y1 - y0) / (x1 - x0);
    const double d2 = (y2 - y1) / (x2 - x1);
    const double a = (d2 - d1) / (x2 - x0);
    if (a == 0.0) return {x1, y1};
    const double b = d1 - a * (x0 + x1);
    double xv = std::clamp(-b / (2.0 * a), x0, x2);
    const double yv = y0 + (xv - x0) * (d1 + a * (xv - x1));
    return {xv, yv};
}

}  // namespace

cplx free_phase(double q, double T, double g) {
    return std::polar(1.0, -(kMass * g * T * T * q + T * q * q) / (2.0 * kMass * RecoilFrame::hbar));
}

FreePropagatorDiag FreePropagatorDiag::make(double p, double T, double g) {
    FreePropagatorDiag u{p, T, g, {}};
    for (int i = 0; i < 5; ++i) u.phases[static_cast<std::size_t>(i)] = free_phase(p + 2.0 * level_order(i), T, g);
    return u;
}

SMatrix5 compose_mz(const SMatrix5& bs1, const SMatrix5& mirror, const SMatrix5& bs2, double p, double T, double g) {
    const double p2 = p + kMass * g * T;
    const auto u1 = FreePropagatorDiag::make(p, T, g);
    const auto u2 = FreePropagatorDiag::make(p2, T, g);
    const Eigen::Map<const Column> d1(u1.phases.data());
    const Eigen::Map<const Column> d2(u2.phases.data());
    return bs2 * d2.asDiagonal() * mirror * d1.asDiagonal() * bs1;
}

SMatrix5 total_smatrix(double g, double p, double T, const StrategyPreset& pulses) {
    check_drift(p, T, g);
    const double p2 = p + kMass * g * T;
    const double p3 = p + 2.0 * kMass * g * T;
    return compose_mz(pulse_smatrix(p, pulses.bs), pulse_smatrix(p2, pulses.mirror), pulse_smatrix(p3, pulses.bs), p, T,
                      g);
}

int quadrature_nodes(double sigma_p, double T, int min_nodes) {
    int n = std::max(min_nodes, 33 + static_cast<int>(std::ceil(60.0 * sigma_p * std::abs(T))));
    return n % 2 ? n : n + 1;
}

FiveLevelInterferometer::FiveLevelInterferometer(const StrategyPreset& pulses, double p_lo, double p_hi,
                                                 double spacing) {
    auto bs = std::make_shared<const SMatrixTable>(pulses.bs, p_lo, p_hi, spacing);
    auto mirror = std::make_shared<const SMatrixTable>(pulses.mirror, p_lo, p_hi, spacing);
    bs1_ = [bs](double p) { return (*bs)(p); };
    bs2_ = bs1_;
    mirror_ = [mirror](double p) { return (*mirror)(p); };
    min_separation_ = kWindowHalfWidths * (pulses.bs.envelope.tau + pulses.mirror.envelope.tau);
}

FiveLevelInterferometer::FiveLevelInterferometer(PulseResponse bs1, PulseResponse mirror, PulseResponse bs2,
                                                 double min_separation)
    : bs1_(std::move(bs1)), mirror_(std::move(mirror)), bs2_(std::move(bs2)), min_separation_(min_separation) {}

FiveLevelInterferometer FiveLevelInterferometer::for_config(const MZConfig& cfg, double t_max) {
    const double margin = 0.01;
    const double p_lo = cfg.p0 - 5.0 * cfg.sigma_p - margin;
    const double p_hi = cfg.p0 + 5.0 * cfg.sigma_p + 2.0 * kMass * std::abs(cfg.g) * t_max + margin;
    if (p_lo <= -1.0 || p_hi >= 1.0) {
        std::ostringstream msg;
        msg << "T too large for S-matrix model: quasi-momentum range [" << p_lo << ", " << p_hi
            << "] leaves the Brillouin zone";
        throw ConfigError(msg.str());
    }
    return FiveLevelInterferometer(cfg.preset.with_eps_pol(cfg.eps_pol), p_lo, p_hi);
}

std::array<cplx, 5> FiveLevelInterferometer::output_amplitudes(double g, double T, double p) const {
    const double p2 = p + kMass * g * T;
    const double p3 = p + 2.0 * kMass * g * T;
    Column v = bs1_(p).col(kZero);
    apply_free(v, p, T, g);
    v = mirror_(p2) * v;
    apply_free(v, p2, T, g);
    v = bs2_(p3) * v;
    return {v[0], v[1], v[2], v[3], v[4]};
}

std::array<double, 5> FiveLevelInterferometer::populations(double g, double T, double p0, double sigma_p,
                                                           int min_nodes) const {
    if (!(T > min_separation_)) {
        std::ostringstream msg;
        msg << "T = " << T << " does not separate the pulse windows (need T > " << min_separation_ << ")";
        throw ConfigError(msg.str());
    }
    if (sigma_p < 0.0) throw ConfigError("momentum width must be non-negative");
    std::array<double, 5> pops{};
    if (sigma_p == 0.0) {
        check_drift(p0, T, g);
        const auto a = output_amplitudes(g, T, p0);
        for (int i = 0; i < 5; ++i) pops[static_cast<std::size_t>(i)] = std::norm(a[static_cast<std::size_t>(i)]);
        return pops;
    }
    const QuadratureRule rule = gaussian_weighted_rule(p0, sigma_p, quadrature_nodes(sigma_p, T, min_nodes));
    check_drift(rule.nodes.front(), T, g);
    check_drift(rule.nodes.back(), T, g);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const auto a = output_amplitudes(g, T, rule.nodes[k]);
        for (std::size_t i = 0; i < 5; ++i) pops[i] += rule.weights[k] * std::norm(a[i]);
    }
    return pops;
}

std::array<double, 5> port_populations_5ls(const MZConfig& cfg) {
    return FiveLevelInterferometer::for_config(cfg, cfg.T).populations(cfg);
}

FringeSignal t_scan(const FiveLevelInterferometer& mz, const MZConfig& cfg, double t_min, double t_max,
                    std::size_t n_points) {
    if (n_points < 3 || !(t_max > t_min)) throw ConfigError("T-scan needs an increasing range and >= 3 points");
    const double g = cfg.g;
    const double dt = (t_max - t_min) / static_cast<double>(n_points - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < n_points; ++i) {
        const double a = t_min + dt * static_cast<double>(i);
        worst = std::max(worst, 4.0 * std::abs(g) * ((a + dt) * (a + dt) - a * a));
    }
    if (worst >= kPi / 8.0) {
        const double span = 4.0 * std::abs(g) * (t_max * t_max - t_min * t_min);
        // Phase step grows with T; the last step bounds the count.
        const double needed = 8.0 * 4.0 * std::abs(g) * 2.0 * t_max * (t_max - t_min) / kPi;
        std::ostringstream msg;
        msg << "T-scan undersampled (phase span " << span << " rad): need at least "
            << static_cast<std::size_t>(std::ceil(needed)) + 2 << " points";
        throw ConfigError(msg.str());
    }
    FringeSignal s;
    s.g = g;
    s.T.resize(n_points);
    s.ports.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) s.T[i] = t_min + dt * static_cast<double>(i);
    parallel_for(n_points, [&](std::size_t i) { s.ports[i] = mz.populations(g, s.T[i], cfg.p0, cfg.sigma_p, cfg.nodes); });
    for (const auto& p : s.ports) {
        s.conjugate.push_back(p[1] + p[2]);
        s.port1.push_back(p[0]);
    }
    return s;
}

std::pair<double, double> contrast_window(double g) {
    if (!(g > 0.0)) throw ConfigError("contrast needs a non-zero acceleration to produce a fringe");
    return {phase_to_time(kPi / 2.0, g), phase_to_time(5.0 * kPi / 2.0, g)};
}

ContrastResult extract_contrast(const FringeSignal& signal) {
    const std::size_t n = signal.T.size();
    if (n < 5 || signal.conjugate.size() != n) throw NumericalError("fringe signal too short for contrast extraction");
    const double g = std::abs(signal.g);
    if (!(g > 0.0)) throw NumericalError("no extremum bracketed: fringe signal has zero acceleration");
    const double t_a = phase_to_time(kPi / 2.0, g);
    const double t_b = phase_to_time(3.0 * kPi / 2.0, g);
    const double t_c = phase_to_time(5.0 * kPi / 2.0, g);
    if (signal.T.front() > t_a || signal.T.back() < t_c)
        throw NumericalError("no extremum bracketed: T-scan does not cover the first fringe period");

    auto find = [&](double lo, double hi, bool maximum) -> std::pair<double, double> {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (signal.T[i] < lo || signal.T[i] > hi) continue;
            if (best == n || (maximum ? signal.conjugate[i] > signal.conjugate[best]
                                      : signal.conjugate[i] < signal.conjugate[best]))
                best = i;
        }
        const bool interior = best != n && best > 0 && best + 1 < n && signal.T[best - 1] >= lo - 1e-12 &&
                              signal.T[best + 1] <= hi + 1e-12;
        const bool strict = interior && (maximum ? signal.conjugate[best] > signal.conjugate[best - 1] &&
                                                       signal.conjugate[best] > signal.conjugate[best + 1]
                                                 : signal.conjugate[best] < signal.conjugate[best - 1] &&
                                                       signal.conjugate[best] < signal.conjugate[best + 1]);
        if (!strict) {
            std::ostringstream msg;
            msg << "no extremum bracketed: no interior " << (maximum ? "maximum" : "minimum") << " in T in [" << lo
                << ", " << hi << "]";
            throw NumericalError(msg.str());
        }
        return quadratic_vertex(signal.T, signal.conjugate, best);
    };
    const auto [t_max, p_max] = find(t_a, t_b, true);
    const auto [t_min, p_min] = find(t_b, t_c, false);
    return ContrastResult{p_max - p_min, t_max, t_min, p_max, p_min, p_max + p_min};
}

ContrastResult measure_contrast(const FiveLevelInterferometer& mz, const MZConfig& cfg, double dt) {
    auto [lo, hi] = contrast_window(cfg.g);
    lo = 0.99 * lo;
    hi = 1.01 * hi;
    if (lo <= mz.min_separation()) {
        std::ostringstream msg;
        msg << "acceleration too large: first fringe begins at T = " << lo << ", inside the pulse windows";
        throw ConfigError(msg.str());
    }
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dt)) + 1;
    return extract_contrast(t_scan(mz, cfg, lo, hi, n));
}

FringeFit fit_leading_component(const FringeSignal& s) {
    const std::size_t n = s.T.size();
    if (n < 4) throw NumericalError("fringe signal too short to fit");
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 4.0 * s.g * s.T[i] * s.T[i];
    auto solve = [&](double k) {
        Eigen::Matrix<double, Eigen::Dynamic, 3> a(static_cast<Eigen::Index>(n), 3);
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            a(r, 0) = 1.0;
            a(r, 1) = std::cos(k * u[i]);
            a(r, 2) = std::sin(k * u[i]);
            y[r] = s.conjugate[i];
        }
        const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
        const double rms = std::sqrt((a * c - y).squaredNorm() / static_cast<double>(n));
        return std::pair{c, rms};
    };
    double best_k = 1.0, best_rms = solve(1.0).second;
    for (double k = 0.5; k <= 1.5; k += 0.005) {
        const double r = solve(k).second;
        if (r < best_rms) best_rms = r, best_k = k;
    }
    double lo = best_k - 0.005, hi = best_k + 0.005;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        const double a = hi - golden * (hi - lo), b = lo + golden * (hi - lo);
        if (solve(a).second < solve(b).second) hi = b;
        else lo = a;
    }
    best_k = 0.5 * (lo + hi);
    const auto [c, rms] = solve(best_k);
    return FringeFit{best_k, c[0], std::hypot(c[1], c[2]), rms};
}

std::string to_string(ScanAxis a) {
    switch (a) {
        case ScanAxis::SigmaP: return "sigma_p";
        case ScanAxis::P0: return "p0";
        case ScanAxis::EpsPol: return "eps_pol";
    }
    return "?";
}

ScanAxis parse_axis(const std::string& name) {
    for (ScanAxis a : {ScanAxis::SigmaP, ScanAxis::P0, ScanAxis::EpsPol})
        if (name == to_string(a)) return a;
    throw ConfigError("unknown scan axis '" + name + "' (expected sigma_p, p0 or eps_pol)");
}

std::vector<ContrastRow> contrast_scan(const MZConfig& base, ScanAxis axis, std::span<const double> values,
                                       std::span<const StrategyPreset> strategies) {
    if (values.empty()) return {};
    const double t_far = 1.01 * contrast_window(base.g).second;
    auto config_for = [&](const StrategyPreset& pr, double v) {
        MZConfig c = base;
        c.preset = pr;
        if (axis == ScanAxis::SigmaP) c.sigma_p = v;
        if (axis == ScanAxis::P0) c.p0 = v;
        if (axis == ScanAxis::EpsPol) c.eps_pol = v;
        return c;
    };
    std::vector<ContrastRow> rows;
    for (const StrategyPreset& pr : strategies) {
        std::vector<ContrastResult> results(values.size());
        if (axis == ScanAxis::EpsPol) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                const MZConfig c = config_for(pr, values[i]);
                results[i] = measure_contrast(FiveLevelInterferometer::for_config(c, t_far), c);
            }
        } else {
            double p_lo = 1.0, p_hi = -1.0;
            for (double v : values) {
                const MZConfig c = config_for(pr, v);
                p_lo = std::min(p_lo, c.p0 - 5.0 * c.sigma_p);
                p_hi = std::max(p_hi, c.p0 + 5.0 * c.sigma_p);
            }
            MZConfig span = base;
            span.preset = pr;
            span.p0 = 0.5 * (p_lo + p_hi);
            span.sigma_p = 0.1 * (p_hi - p_lo);
            const auto mz = FiveLevelInterferometer::for_config(span, t_far);
            for (std::size_t i = 0; i < values.size(); ++i) results[i] = measure_contrast(mz, config_for(pr, values[i]));
        }
        for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({pr.name, values[i], results[i]});
    }
    return rows;
}

}  // namespace dbd
