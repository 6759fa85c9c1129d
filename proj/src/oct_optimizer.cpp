#include "dbd/oct_optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "dbd/errors.hpp"
#include "dbd/parallel.hpp"
#include "dbd/random.hpp"

namespace dbd {

namespace {

double to_unit(double v, double lo, double hi) { return (v - lo) / (hi - lo); }
double from_unit(double u, double lo, double hi) { return lo + u * (hi - lo); }

double reflect(double u) {
    for (int i = 0; i < 8 && (u < 0.0 || u > 1.0); ++i) u = u < 0.0 ? -u : 2.0 - u;
    return std::clamp(u, 0.0, 1.0);
}

constexpr Eigen::Index kEnvelopeDims = 3;

void encode_envelope(const ControlParams& p, Eigen::VectorXd& x) {
    x[0] = to_unit(p.omega_peak, ControlParams::kOmegaMin, ControlParams::kOmegaMax);
    x[1] = to_unit(p.tau, ControlParams::kTauMin, ControlParams::kTauMax);
    x[2] = to_unit(p.t0, ControlParams::kT0Min, ControlParams::kT0Max);
}

ControlParams decode_envelope(const Eigen::VectorXd& x) {
    ControlParams p;
    p.omega_peak = from_unit(x[0], ControlParams::kOmegaMin, ControlParams::kOmegaMax);
    p.tau = from_unit(x[1], ControlParams::kTauMin, ControlParams::kTauMax);
    p.t0 = from_unit(x[2], ControlParams::kT0Min, ControlParams::kT0Max);
    return p;
}

Eigen::VectorXd encode(const ControlParams& p) {
    Eigen::VectorXd x(kEnvelopeDims + static_cast<Eigen::Index>(p.knots.size()));
    encode_envelope(p, x);
    for (std::size_t i = 0; i < p.knots.size(); ++i)
        x[kEnvelopeDims + static_cast<Eigen::Index>(i)] =
            to_unit(p.knots[i], ControlParams::kKnotMin, ControlParams::kKnotMax);
    return x;
}

ControlParams decode(const Eigen::VectorXd& x) {
    ControlParams p = decode_envelope(x);
    p.knots.resize(static_cast<std::size_t>(x.size() - kEnvelopeDims));
    for (std::size_t i = 0; i < p.knots.size(); ++i)
        p.knots[i] = from_unit(x[kEnvelopeDims + static_cast<Eigen::Index>(i)], ControlParams::kKnotMin,
                               ControlParams::kKnotMax);
    return p;
}

std::string log_line(int generation, int evaluations, double best, double sigma, const ControlParams& p) {
    std::ostringstream os;
    os << std::setprecision(10) << generation << ' ' << evaluations << ' ' << best << ' ' << sigma << ' '
       << p.omega_peak << ' ' << p.tau << ' ' << p.t0;
    for (double k : p.knots) os << ' ' << k;
    return os.str();
}

}  // namespace

std::vector<double> ControlParams::knot_times() const {
    std::vector<double> t(knots.size());
    const double begin = t0 - kWindowHalfWidths * tau;
    const double span = 2.0 * kWindowHalfWidths * tau;
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = begin + span * static_cast<double>(i) / static_cast<double>(t.size() - 1);
    return t;
}

PulseSpec ControlParams::to_pulse() const {
    if (knots.size() < 2) throw ConfigError("mirror control needs at least two detuning knots");
    return PulseSpec{GaussianEnvelope{omega_peak, tau, t0}, SampledDetuning(knot_times(), knots), 0.0, 0.0};
}

bool ControlParams::within_bounds() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    return in(omega_peak, kOmegaMin, kOmegaMax) && in(tau, kTauMin, kTauMax) && in(t0, kT0Min, kT0Max) &&
           std::all_of(knots.begin(), knots.end(), [&](double k) { return in(k, kKnotMin, kKnotMax); });
}

ControlParams ControlParams::from_ds_mirror(std::size_t n_knots) {
    const PulseSpec ds = preset(Strategy::DsDbd).mirror;
    ControlParams p;
    p.omega_peak = ds.envelope.omega_peak;
    p.tau = ds.envelope.tau;
    p.t0 = ds.envelope.t0;
    p.knots.resize(n_knots);
    const auto times = p.knot_times();
    const auto sweep = std::get<LinearSweep>(ds.detuning);
    for (std::size_t i = 0; i < n_knots; ++i) p.knots[i] = sweep.alpha / p.tau * (times[i] - p.t0) + sweep.beta;
    return p;
}

std::vector<double> CostConfig::samples() const {
    if (n_samples < 1) throw ConfigError("cost needs at least one momentum sample");
    if (n_samples == 1) return {0.5 * (p_min + p_max)};
    std::vector<double> s(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) s[static_cast<std::size_t>(i)] = p_min + (p_max - p_min) * i / (n_samples - 1);
    return s;
}

double mirror_cost(const std::function<SMatrix5(double)>& mirror, const CostConfig& cfg) {
    const auto ps = cfg.samples();
    double total = 0.0;
    for (double p : ps) {
        const SMatrix5 m = mirror(p);
        total += std::abs(1.0 - std::norm(m(kDown, kUp))) + std::abs(1.0 - std::norm(m(kUp, kDown)));
    }
    return total / static_cast<double>(ps.size());
}

double mirror_cost(const ControlParams& params, const CostConfig& cfg) {
    if (!params.within_bounds()) throw ConfigError("mirror controls outside their box constraints");
    const PulseSpec pulse = params.to_pulse().with_eps_pol(cfg.eps_pol);
    return mirror_cost([&](double p) { return pulse_smatrix(p, pulse, cfg.integrator); }, cfg);
}

namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Search {
    int budget = 0;
    int evaluations = 0;
    int generation = 0;
    std::vector<double> trace;
    double best_cost = 0.0;
    Eigen::VectorXd best;
};

// One CMA-ES run on the unit box; stops on budget, collapsed step size or stagnation.
void run_cma(const Eigen::VectorXd& start, double sigma0, int lambda, const Objective& objective, Philox4x32& rng,
             Search& search, const std::function<void(double sigma)>& on_generation) {
    const Eigen::Index n = start.size();
    const int mu = lambda / 2;
    Eigen::VectorXd weights(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    weights /= weights.sum();
    const double mueff = 1.0 / weights.squaredNorm();
    const double dn = static_cast<double>(n);
    const double cs = (mueff + 2.0) / (dn + mueff + 5.0);
    const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (dn + 1.0)) - 1.0) + cs;
    const double cc = (4.0 + mueff / dn) / (dn + 4.0 + 2.0 * mueff / dn);
    const double c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mueff);
    const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((dn + 2.0) * (dn + 2.0) + mueff));
    const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));
    const int patience = 10 + static_cast<int>(std::ceil(30.0 * dn / lambda));

    Eigen::VectorXd mean = start;
    double sigma = sigma0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd scales = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd ps = Eigen::VectorXd::Zero(n), pc = Eigen::VectorXd::Zero(n);
    std::vector<double> history;

    for (int g = 1; search.evaluations + lambda <= search.budget && sigma > 1e-3 * sigma0; ++g) {
        ++search.generation;
        std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(lambda));
        for (auto& xk : x) {
            Eigen::VectorXd zk(n);
            for (Eigen::Index i = 0; i < n; ++i) zk[i] = rng.normal();
            xk = mean + sigma * (basis * scales.cwiseProduct(zk));
            for (Eigen::Index i = 0; i < n; ++i) xk[i] = reflect(xk[i]);
        }
        std::vector<double> cost(x.size());
        parallel_for(cost.size(), [&](std::size_t k) { cost[k] = objective(x[k]); });
        for (double c : cost) {
            ++search.evaluations;
            search.trace.push_back(std::min(search.trace.back(), c));
        }
        std::vector<std::size_t> order(cost.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cost[a] < cost[b]; });
        if (cost[order[0]] < search.best_cost) {
            search.best_cost = cost[order[0]];
            search.best = x[order[0]];
        }
        history.push_back(cost[order[0]]);

        // Steps are taken from the repaired points so the update sees where the search actually went.
        const Eigen::VectorXd old_mean = mean;
        mean.setZero();
        for (int i = 0; i < mu; ++i) mean += weights[i] * x[order[static_cast<std::size_t>(i)]];
        const Eigen::VectorXd step = (mean - old_mean) / sigma;
        const Eigen::MatrixXd inv_sqrt = basis * scales.cwiseInverse().asDiagonal() * basis.transpose();
        ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * (inv_sqrt * step);
        const double ps_norm = ps.norm();
        const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * g)) / chi_n < 1.4 + 2.0 / (dn + 1.0);
        pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * step;
        Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < mu; ++i) {
            const Eigen::VectorXd yi = (x[order[static_cast<std::size_t>(i)]] - old_mean) / sigma;
            rank_mu += weights[i] * yi * yi.transpose();
        }
        cov = (1.0 - c1 - cmu) * cov + c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * cov) + cmu * rank_mu;
        sigma = std::min(sigma * std::exp((cs / ds) * (ps_norm / chi_n - 1.0)), 0.5);

        cov = 0.5 * (cov + cov.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        basis = eig.eigenvectors();
        scales = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
        on_generation(sigma);

        if (history.size() > static_cast<std::size_t>(patience)) {
            const auto split = history.end() - patience / 2;
            const double recent = *std::min_element(split, history.end());
            const double earlier = *std::min_element(history.begin(), split);
            if (recent > earlier * (1.0 - 1e-4)) break;
        }
    }
}

// Per-sample residuals sqrt(1 - F) / sqrt(N); their squared norm is the mirror cost.
Eigen::VectorXd residuals(const ControlParams& params, const CostConfig& cfg) {
    const auto ps = cfg.samples();
    const PulseSpec pulse = params.to_pulse().with_eps_pol(cfg.eps_pol);
    const double norm = 1.0 / std::sqrt(static_cast<double>(ps.size()));
    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const SMatrix5 m = pulse_smatrix(ps[i], pulse, cfg.integrator);
        const auto k = 2 * static_cast<Eigen::Index>(i);
        r[k] = norm * std::sqrt(std::abs(1.0 - std::norm(m(kDown, kUp))));
        r[k + 1] = norm * std::sqrt(std::abs(1.0 - std::norm(m(kUp, kDown))));
    }
    return r;
}

// Levenberg-Marquardt on the unit box with a forward-difference Jacobian.
// Returns once the damping blows up, i.e. no descent step is left.
void run_lm(const Eigen::VectorXd& start, const std::function<ControlParams(const Eigen::VectorXd&)>& to_params,
            const CostConfig& cfg, Search& search, const std::function<void(double lambda)>& on_iteration) {
    const Eigen::Index n = start.size();
    constexpr double kStep = 1e-6;
    Eigen::VectorXd x = start;
    Eigen::VectorXd r = residuals(to_params(x), cfg);
    double cost = r.squaredNorm();
    auto count = [&](double c) {
        ++search.evaluations;
        search.trace.push_back(std::min(search.trace.back(), c));
    };
    count(cost);
    double lambda = 1e-3;
    while (search.evaluations + n + 1 <= search.budget && lambda < 1e8) {
        ++search.generation;
        Eigen::MatrixXd jac(r.size(), n);
        std::vector<Eigen::VectorXd> cols(static_cast<std::size_t>(n));
        parallel_for(cols.size(), [&](std::size_t j) {
            Eigen::VectorXd y = x;
            const auto jj = static_cast<Eigen::Index>(j);
            const double h = y[jj] + kStep > 1.0 ? -kStep : kStep;
            y[jj] += h;
            cols[j] = (residuals(to_params(y), cfg) - r) / h;
        });
        for (Eigen::Index j = 0; j < n; ++j) {
            jac.col(j) = cols[static_cast<std::size_t>(j)];
            count(search.trace.back());
        }
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        bool moved = false;
        while (!moved && search.evaluations < search.budget && lambda < 1e8) {
            Eigen::MatrixXd m = a;
            m.diagonal() += lambda * (a.diagonal().array() + 1e-9).matrix();
            const Eigen::VectorXd y = (x - m.ldlt().solve(grad)).cwiseMax(0.0).cwiseMin(1.0);
            const Eigen::VectorXd ry = residuals(to_params(y), cfg);
            const double cy = ry.squaredNorm();
            count(cy);
            if (cy < cost) {
                x = y;
                r = ry;
                cost = cy;
                lambda = std::max(lambda / 3.0, 1e-7);
                moved = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (cost < search.best_cost) {
            search.best_cost = cost;
            search.best = x;
        }
        on_iteration(lambda);
    }
}

// Restarted CMA-ES with a doubling population (IPOP style), each restart from the incumbent.
void minimize(const Eigen::VectorXd& start, double sigma0, int population, const Objective& objective,
              Philox4x32& rng, Search& search, const std::function<void(double)>& on_generation) {
    int lambda = std::max(population, 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(start.size())))));
    Eigen::VectorXd from = start;
    while (search.evaluations + lambda <= search.budget) {
        run_cma(from, sigma0, lambda, objective, rng, search, on_generation);
        from = search.best;
        lambda *= 2;
    }
}

// Chebyshev polynomials T_0..T_{n-1} at u.
std::vector<double> chebyshev(double u, Eigen::Index n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < t.size(); ++k)
        t[k] = k == 0 ? 1.0 : k == 1 ? u : 2.0 * u * t[k - 1] - t[k - 2];
    return t;
}

// Smooth stage: detuning as a clamped Chebyshev series in (t - t0) / (5 tau).
ControlParams decode_smooth(const Eigen::VectorXd& y, std::size_t n_knots) {
    ControlParams p = decode_envelope(y);
    const Eigen::Index terms = y.size() - kEnvelopeDims;
    p.knots.resize(n_knots);
    const auto times = p.knot_times();
    for (std::size_t i = 0; i < n_knots; ++i) {
        const auto basis = chebyshev((times[i] - p.t0) / (kWindowHalfWidths * p.tau), terms);
        double v = 0.0;
        for (Eigen::Index k = 0; k < terms; ++k)
            v += basis[static_cast<std::size_t>(k)] *
                 from_unit(y[kEnvelopeDims + k], ControlParams::kKnotMin, ControlParams::kKnotMax);
        p.knots[i] = std::clamp(v, ControlParams::kKnotMin, ControlParams::kKnotMax);
    }
    return p;
}

// Least-squares Chebyshev fit of the knots.
Eigen::VectorXd encode_smooth(const ControlParams& p, Eigen::Index terms) {
    const auto times = p.knot_times();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(times.size()), terms);
    Eigen::VectorXd b(static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto basis = chebyshev((times[i] - p.t0) / (kWindowHalfWidths * p.tau), terms);
        for (Eigen::Index k = 0; k < terms; ++k) a(static_cast<Eigen::Index>(i), k) = basis[static_cast<std::size_t>(k)];
        b[static_cast<Eigen::Index>(i)] = p.knots[i];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
    Eigen::VectorXd y(kEnvelopeDims + terms);
    encode_envelope(p, y);
    for (Eigen::Index k = 0; k < terms; ++k)
        y[kEnvelopeDims + k] = std::clamp(to_unit(c[k], ControlParams::kKnotMin, ControlParams::kKnotMax), 0.0, 1.0);
    return y;
}

}  // namespace

OptimizationResult optimize_mirror(const ControlParams& init, const CostConfig& cfg, const OptimizerSettings& settings) {
    if (settings.budget < 200) throw ConfigError("optimizer budget must be at least 200 evaluations");
    if (!init.within_bounds()) throw ConfigError("initial mirror controls outside their box constraints");
    if (init.knots.size() < 2) throw ConfigError("mirror control needs at least two detuning knots");

    CostConfig search_cfg = cfg;
    search_cfg.integrator.abs_tol = search_cfg.integrator.rel_tol = settings.search_tolerance;
    const std::size_t n_knots = init.knots.size();
    Philox4x32 rng(settings.seed, 0x4f4354u);

    OptimizationResult result;
    result.best = init;
    result.initial_cost = mirror_cost(init, search_cfg);

    Search search;
    search.budget = settings.budget;
    search.evaluations = 1;
    search.trace.push_back(result.initial_cost);
    search.best_cost = result.initial_cost;

    result.best_cost = result.initial_cost;
    auto logger = [&](auto to_params) {
        return [&, to_params](double sigma) {
            if (search.best_cost < result.best_cost) {
                result.best = to_params(search.best);
                result.best_cost = search.best_cost;
            }
            result.log.push_back(log_line(search.generation, search.evaluations, search.best_cost, sigma, result.best));
        };
    };

    auto smooth_params = [&](const Eigen::VectorXd& y) { return decode_smooth(y, n_knots); };
    const Objective smooth_cost = [&](const Eigen::VectorXd& y) { return mirror_cost(smooth_params(y), search_cfg); };
    const auto on_smooth = logger(smooth_params);

    // Exploration: the initial guess plus seeded uniform samples of the smooth family.
    const int n_explore = std::min(settings.explore_samples, settings.budget / 4);
    const Eigen::Index terms = std::clamp<Eigen::Index>(settings.smooth_terms, 2, static_cast<Eigen::Index>(n_knots));
    std::vector<Eigen::VectorXd> pool{encode_smooth(init, terms)};
    // Latin hypercube over the envelope and a linear sweep; higher-order terms start at zero.
    const int n_strata = n_explore - 1;
    std::vector<std::vector<int>> strata(kEnvelopeDims + 2);
    for (auto& column : strata) {
        column.resize(static_cast<std::size_t>(n_strata));
        std::iota(column.begin(), column.end(), 0);
        for (std::size_t i = column.size(); i > 1; --i)
            std::swap(column[i - 1], column[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);
    }
    for (int j = 0; j < n_strata; ++j) {
        Eigen::VectorXd y = Eigen::VectorXd::Constant(kEnvelopeDims + terms, 0.5);
        for (std::size_t d = 0; d < strata.size(); ++d)
            y[static_cast<Eigen::Index>(d)] = (strata[d][static_cast<std::size_t>(j)] + rng.uniform()) / n_strata;
        pool.push_back(std::move(y));
    }
    std::vector<double> pool_cost(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) { pool_cost[i] = smooth_cost(pool[i]); });
    for (std::size_t i = 0; i < pool.size(); ++i) {
        ++search.evaluations;
        search.trace.push_back(std::min(search.trace.back(), pool_cost[i]));
        if (pool_cost[i] < search.best_cost) {
            search.best_cost = pool_cost[i];
            search.best = pool[i];
        }
    }
    ++search.generation;
    on_smooth(settings.coarse_step);

    // Local smooth-family searches from the most promising samples.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return pool_cost[x] < pool_cost[y]; });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(settings.explore_keep, 0)), pool.size());
    for (std::size_t k = 0; k < keep; ++k) {
        search.budget = std::min(settings.budget, search.evaluations + settings.local_budget);
        run_lm(pool[order[k]], smooth_params, search_cfg, search, on_smooth);
    }

    // Refinement of the individual knots from the best point so far: least squares first,
    // then CMA-ES restarts with whatever budget is left.
    search.budget = settings.budget;
    search.best = encode(result.best);
    const auto on_knots = logger([](const Eigen::VectorXd& x) { return decode(x); });
    run_lm(search.best, decode, search_cfg, search, on_knots);
    minimize(search.best, settings.initial_step, 0, [&](const Eigen::VectorXd& x) { return mirror_cost(decode(x), search_cfg); },
             rng, search, on_knots);

    result.trace = std::move(search.trace);
    result.evaluations = search.evaluations;
    result.best_cost = mirror_cost(result.best, cfg);
    result.initial_cost = mirror_cost(init, cfg);
    result.improved = result.best_cost < result.initial_cost;
    return result;
}

}  // namespace dbd
