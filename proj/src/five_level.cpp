#include "dbd/five_level.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "dbd/errors.hpp"
#include "dbd/parallel.hpp"
#include "dbd/quadrature.hpp"

namespace dbd {

namespace {

namespace ode = boost::numeric::odeint;

constexpr cplx kI{0.0, 1.0};

double kinetic(double p, int order) {
    const double q = p + 2.0 * order;
    return q * q;
}

// Interaction-picture amplitudes a_n = e^{i E_n (t - t0)} c_n for a block of
// Columns initial states; only nearest momentum classes are coupled.
template <int Levels, int Columns>
struct LevelSystem {
    using State = std::array<cplx, Levels * Columns>;
    static constexpr int kPairs = Levels - 1;

    const PulseSpec& pulse;
    std::array<int, kPairs> lower{};
    std::array<int, kPairs> upper{};
    std::array<double, kPairs> gap{};  // E_upper - E_lower

    LevelSystem(double p, const PulseSpec& pl) : pulse(pl) {
        constexpr int nmax = (Levels - 1) / 2;
        int k = 0;
        for (int n = -nmax; n < nmax; ++n, ++k) {
            lower[k] = level_index(n);
            upper[k] = level_index(n + 1);
            gap[k] = kinetic(p, n + 1) - kinetic(p, n);
        }
    }

    void operator()(const State& x, State& dxdt, double t) const {
        dxdt.fill(cplx{});
        const double drive = pulse.lattice_drive(t);
        if (drive == 0.0) return;
        const double s = t - pulse.envelope.t0;
        for (int k = 0; k < kPairs; ++k) {
            // <lower|V_I|upper> = drive e^{-i gap s}; the -i of the Schrodinger equation folded in.
            const cplx w = -kI * drive * std::polar(1.0, -gap[k] * s);
            const cplx wc = -kI * drive * std::polar(1.0, gap[k] * s);
            for (int c = 0; c < Columns; ++c) {
                const int base = c * Levels;
                dxdt[base + lower[k]] += w * x[base + upper[k]];
                dxdt[base + upper[k]] += wc * x[base + lower[k]];
            }
        }
    }
};

template <int Levels, int Columns>
typename LevelSystem<Levels, Columns>::State initial_state(const std::array<int, Columns>& columns) {
    typename LevelSystem<Levels, Columns>::State x{};
    for (int c = 0; c < Columns; ++c) x[c * Levels + columns[c]] = 1.0;
    return x;
}

template <int Levels, int Columns>
typename LevelSystem<Levels, Columns>::State propagate(double p, const PulseSpec& pulse,
                                                       const std::array<int, Columns>& columns,
                                                       const IntegratorOptions& opts) {
    using System = LevelSystem<Levels, Columns>;
    using State = typename System::State;
    System sys(p, pulse);
    State x = initial_state<Levels, Columns>(columns);
    if (pulse.envelope.omega_peak == 0.0) return x;

    using Stepper = ode::runge_kutta_dopri5<State, double, State, double, ode::array_algebra>;
    auto stepper = ode::make_controlled<Stepper>(opts.abs_tol, opts.rel_tol);

    double t = pulse.envelope.window_begin();
    const double t_end = pulse.envelope.window_end();
    double dt = 0.01;
    long steps = 0;
    while (t < t_end) {
        if (++steps > opts.max_steps || dt < 1e-12) {
            std::ostringstream msg;
            msg << "pulse integrator failed to reach tolerance near t = " << t << " (p = " << p << ")";
            throw NumericalError(msg.str());
        }
        const bool last = dt >= t_end - t;
        double h = last ? t_end - t : dt;
        const bool accepted = stepper.try_step(sys, x, t, h) == ode::success;
        if (accepted && last) break;
        dt = h;
    }
    return x;
}

template <int Levels>
LevelMatrix<Levels> to_matrix(const std::array<cplx, Levels * Levels>& x) {
    LevelMatrix<Levels> m;
    for (int c = 0; c < Levels; ++c)
        for (int r = 0; r < Levels; ++r) m(r, c) = x[c * Levels + r];
    return m;
}

template <int Levels>
std::array<int, Levels> all_columns() {
    std::array<int, Levels> cols{};
    for (int i = 0; i < Levels; ++i) cols[i] = i;
    return cols;
}

}  // namespace

template <int Levels>
Eigen::Matrix<double, Levels, Levels> level_hamiltonian(double p, double t, const PulseSpec& pulse) {
    Eigen::Matrix<double, Levels, Levels> h = Eigen::Matrix<double, Levels, Levels>::Zero();
    constexpr int nmax = (Levels - 1) / 2;
    const double drive = pulse.lattice_drive(t);
    for (int n = -nmax; n <= nmax; ++n) {
        h(level_index(n), level_index(n)) = kinetic(p, n);
        if (n < nmax) {
            h(level_index(n), level_index(n + 1)) = drive;
            h(level_index(n + 1), level_index(n)) = drive;
        }
    }
    return h;
}

template Eigen::Matrix<double, 5, 5> level_hamiltonian<5>(double, double, const PulseSpec&);
template Eigen::Matrix<double, 7, 7> level_hamiltonian<7>(double, double, const PulseSpec&);

template <int Levels>
LevelMatrix<Levels> pulse_smatrix_levels(double p, const PulseSpec& pulse, const IntegratorOptions& opts) {
    return to_matrix<Levels>(propagate<Levels, Levels>(p, pulse, all_columns<Levels>(), opts));
}

template LevelMatrix<5> pulse_smatrix_levels<5>(double, const PulseSpec&, const IntegratorOptions&);
template LevelMatrix<7> pulse_smatrix_levels<7>(double, const PulseSpec&, const IntegratorOptions&);

SMatrix5 pulse_smatrix(double p, const PulseSpec& pulse, const IntegratorOptions& opts) {
    return pulse_smatrix_levels<5>(p, pulse, opts);
}

SMatrix7 pulse_smatrix7(double p, const PulseSpec& pulse, const IntegratorOptions& opts) {
    return pulse_smatrix_levels<7>(p, pulse, opts);
}

namespace {

SMatrix5 rk4_smatrix(double p, const PulseSpec& pulse, long n) {
    using System = LevelSystem<5, 5>;
    using State = System::State;
    System sys(p, pulse);
    State x = initial_state<5, 5>(all_columns<5>());
    if (pulse.envelope.omega_peak == 0.0) return to_matrix<5>(x);
    const double t_begin = pulse.envelope.window_begin();
    const double h = pulse.envelope.window_length() / static_cast<double>(n);
    State k1, k2, k3, k4, tmp;
    auto axpy = [](State& out, const State& a, double s, const State& b) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + s * b[i];
    };
    for (long i = 0; i < n; ++i) {
        const double t = t_begin + static_cast<double>(i) * h;
        sys(x, k1, t);
        axpy(tmp, x, 0.5 * h, k1);
        sys(tmp, k2, t + 0.5 * h);
        axpy(tmp, x, 0.5 * h, k2);
        sys(tmp, k3, t + 0.5 * h);
        axpy(tmp, x, h, k3);
        sys(tmp, k4, t + h);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return to_matrix<5>(x);
}

}  // namespace

SMatrix5 pulse_smatrix_fixed_step(double p, const PulseSpec& pulse, double dt) {
    const auto n = static_cast<long>(std::ceil(pulse.envelope.window_length() / dt));
    return (16.0 * rk4_smatrix(p, pulse, 2 * n) - rk4_smatrix(p, pulse, n)) / 15.0;
}

double bs_efficiency(double p, const PulseSpec& pulse) {
    const auto x = propagate<5, 1>(p, pulse, {kZero}, {});
    return std::norm(x[kUp]) + std::norm(x[kDown]);
}

std::pair<double, double> mirror_efficiencies(double p, const PulseSpec& pulse) {
    const auto x = propagate<5, 2>(p, pulse, {kUp, kDown}, {});
    return {std::norm(x[kDown]), std::norm(x[5 + kUp])};
}

double mirror_efficiency_right(double p, const PulseSpec& pulse) {
    const auto x = propagate<5, 1>(p, pulse, {kUp}, {});
    return std::norm(x[kDown]);
}

double mirror_efficiency_left(double p, const PulseSpec& pulse) {
    const auto x = propagate<5, 1>(p, pulse, {kDown}, {});
    return std::norm(x[kUp]);
}

double pointwise_efficiency(const PulseSpec& pulse, PulseKind kind, double p) {
    return kind == PulseKind::BeamSplitter ? bs_efficiency(p, pulse) : mirror_efficiency_right(p, pulse);
}

double integrated_efficiency(const PulseSpec& pulse, PulseKind kind, double p0, double sigma_p, int nodes) {
    if (sigma_p < 0.0) throw ConfigError("momentum width must be non-negative");
    if (nodes < 33) throw ConfigError("at least 33 quadrature nodes are required");
    const double quasi = p0 - 2.0 * std::round(p0 / 2.0);
    if (std::abs(quasi) + 5.0 * sigma_p >= 1.0) throw ConfigError("momentum distribution leaves the Brillouin zone");
    if (sigma_p == 0.0) return pointwise_efficiency(pulse, kind, quasi);

    auto average = [&](int n) {
        const QuadratureRule rule = gaussian_weighted_rule(quasi, sigma_p, n);
        std::vector<double> f(rule.nodes.size());
        parallel_for(f.size(), [&](std::size_t i) { f[i] = pointwise_efficiency(pulse, kind, rule.nodes[i]); });
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += rule.weights[i] * f[i];
        return s;
    };
    const double coarse = average(nodes);
    const double fine = average(2 * nodes - 1);
    if (std::abs(fine - coarse) > 1e-5) {
        std::ostringstream msg;
        msg << "efficiency quadrature not converged: " << coarse << " vs " << fine;
        throw NumericalError(msg.str());
    }
    return fine;
}

Landscape efficiency_landscape(const PulseSpec& pulse, PulseKind kind, std::span<const double> p_values,
                               std::span<const double> eps_values) {
    for (double p : p_values)
        if (std::abs(p) > 1.0) throw ConfigError("landscape momenta must lie in [-1, 1]");
    for (double e : eps_values)
        if (e < 0.0 || e > 0.2) throw ConfigError("landscape polarization errors must lie in [0, 0.2]");
    Landscape out{{p_values.begin(), p_values.end()}, {eps_values.begin(), eps_values.end()}, {}};
    out.values.resize(out.p.size() * out.eps.size());
    parallel_for(out.values.size(), [&](std::size_t k) {
        const std::size_t i = k / out.eps.size();
        const std::size_t j = k % out.eps.size();
        out.values[k] = pointwise_efficiency(pulse.with_eps_pol(out.eps[j]), kind, out.p[i]);
    });
    return out;
}

SMatrixTable::SMatrixTable(const PulseSpec& pulse, double p_lo, double p_hi, double spacing) {
    if (!(p_hi > p_lo) || !(spacing > 0.0)) throw ConfigError("invalid S-matrix table range");
    if (p_lo <= -1.0 || p_hi >= 1.0) throw ConfigError("S-matrix table must stay inside the Brillouin zone");
    const auto intervals = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil((p_hi - p_lo) / spacing)));
    std::vector<double> p(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        p[i] = p_lo + (p_hi - p_lo) * static_cast<double>(i) / static_cast<double>(intervals);
    std::vector<SMatrix5> s(p.size());
    parallel_for(p.size(), [&](std::size_t i) { s[i] = pulse_smatrix(p[i], pulse); });
    spline_ = CubicSpline<SMatrix5>(std::move(p), std::move(s));
}

SMatrix5 SMatrixTable::operator()(double p) const {
    if (p < spline_.front() - 1e-12 || p > spline_.back() + 1e-12) {
        std::ostringstream msg;
        msg << "quasi-momentum " << p << " outside tabulated range [" << spline_.front() << ", " << spline_.back()
            << "]";
        throw NumericalError(msg.str());
    }
    return spline_(p);
}

}  // namespace dbd
