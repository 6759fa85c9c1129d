#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>

#include "dbd/errors.hpp"
#include "dbd/exact_solver.hpp"
#include "dbd/five_level.hpp"
#include "dbd/interferometer.hpp"
#include "dbd/oct_optimizer.hpp"
#include "dbd/parallel.hpp"
#include "dbd/robustness.hpp"
#include "dbd/run_config.hpp"
#include "dbd/table_io.hpp"

using namespace dbd;

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;

// Command-line flags overriding config fields. Each flag writes to its own
// slot; apply() copies only the flags that were given.
class Overrides {
public:
    template <class T>
    void add(CLI::App& app, const std::string& name, std::function<T&(RunConfig&)> field, const std::string& help) {
        auto slot = std::make_shared<T>();
        CLI::Option* opt = app.add_option(name, *slot, help);
        apply_.push_back([opt, slot, field](RunConfig& cfg) {
            if (opt->count()) field(cfg) = *slot;
        });
    }
    void flag(CLI::App& app, const std::string& name, std::function<bool&(RunConfig&)> field, const std::string& help) {
        CLI::Option* opt = app.add_flag(name, help);
        apply_.push_back([opt, field](RunConfig& cfg) {
            if (opt->count()) field(cfg) = true;
        });
    }
    void apply(RunConfig& cfg) const {
        for (const auto& f : apply_) f(cfg);
    }

private:
    std::vector<std::function<void(RunConfig&)>> apply_;
};

void register_flags(CLI::App& app, Overrides& o) {
    o.add<std::string>(app, "--strategy", [](RunConfig& c) -> auto& { return c.strategy; },
                       "C-DBD, CD-DBD, DS-DBD, OCT or all");
    o.add<std::string>(app, "--oct-profile", [](RunConfig& c) -> auto& { return c.oct_profile; },
                       "optimized mirror profile file");
    o.add<double>(app, "--g", [](RunConfig& c) -> auto& { return c.g; }, "effective acceleration");
    o.add<double>(app, "--T", [](RunConfig& c) -> auto& { return c.T; }, "interrogation time");
    o.add<double>(app, "--p0", [](RunConfig& c) -> auto& { return c.p0; }, "mean initial momentum");
    o.add<double>(app, "--sigma-p", [](RunConfig& c) -> auto& { return c.sigma_p; }, "momentum width");
    o.add<double>(app, "--eps-pol", [](RunConfig& c) -> auto& { return c.eps_pol; }, "polarization error");
    o.add<std::uint64_t>(app, "--seed", [](RunConfig& c) -> auto& { return c.seed; }, "random seed");
    o.add<std::string>(app, "-o,--output", [](RunConfig& c) -> auto& { return c.output; }, "output file");
    o.add<double>(app, "--contrast-dt", [](RunConfig& c) -> auto& { return c.contrast_dt; },
                  "T step of contrast scans");
    o.add<std::size_t>(app, "--grid-n", [](RunConfig& c) -> auto& { return c.grid.n; }, "exact grid points");
    o.add<double>(app, "--grid-dp", [](RunConfig& c) -> auto& { return c.grid.dp; }, "exact grid momentum step");
    o.add<double>(app, "--dt", [](RunConfig& c) -> auto& { return c.grid.dt; }, "exact time step");
    o.add<double>(app, "--t-min", [](RunConfig& c) -> auto& { return c.tscan.t_min; }, "T scan start");
    o.add<double>(app, "--t-max", [](RunConfig& c) -> auto& { return c.tscan.t_max; }, "T scan end");
    o.add<std::size_t>(app, "--t-points", [](RunConfig& c) -> auto& { return c.tscan.points; }, "T scan points");
    o.add<double>(app, "--p-min", [](RunConfig& c) -> auto& { return c.landscape.p_min; }, "landscape p start");
    o.add<double>(app, "--p-max", [](RunConfig& c) -> auto& { return c.landscape.p_max; }, "landscape p end");
    o.add<std::size_t>(app, "--p-points", [](RunConfig& c) -> auto& { return c.landscape.p_points; },
                       "landscape p points");
    o.add<double>(app, "--eps-min", [](RunConfig& c) -> auto& { return c.landscape.eps_min; },
                  "landscape eps start");
    o.add<double>(app, "--eps-max", [](RunConfig& c) -> auto& { return c.landscape.eps_max; }, "landscape eps end");
    o.add<std::size_t>(app, "--eps-points", [](RunConfig& c) -> auto& { return c.landscape.eps_points; },
                       "landscape eps points");
    o.add<std::string>(app, "--axis", [](RunConfig& c) -> auto& { return c.scan.axis; }, "sigma_p, p0 or eps_pol");
    o.add<std::vector<double>>(app, "--values", [](RunConfig& c) -> auto& { return c.scan.values; },
                               "contrast scan values");
    o.add<std::vector<double>>(app, "--sigma-r", [](RunConfig& c) -> auto& { return c.robustness.sigma_r; },
                               "relative lattice depth fluctuations");
    o.add<int>(app, "--realizations", [](RunConfig& c) -> auto& { return c.robustness.realizations; },
               "Monte Carlo realizations");
    o.flag(app, "--shared-factor", [](RunConfig& c) -> auto& { return c.robustness.shared_factor; },
           "one depth factor for all pulses");
    o.add<int>(app, "--budget", [](RunConfig& c) -> auto& { return c.optimizer.budget; }, "cost evaluations");
    o.add<std::size_t>(app, "--knots", [](RunConfig& c) -> auto& { return c.optimizer.knots; }, "detuning knots");
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n, a);
    for (std::size_t i = 1; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

bool uses_5ls(const RunConfig& c) {
    return c.engine != Engine::Exact;
}
bool uses_exact(const RunConfig& c) {
    return c.engine != Engine::FiveLevel;
}

const char* const kPortNames[] = {"P_0", "P_+2", "P_-2", "P_+4", "P_-4"};

struct Output {
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw ConfigError("cannot write " + path);
    }
    std::ostream& stream() { return file.is_open() ? file : std::cout; }
    std::ofstream file;
};

OutputHeader header_for(const std::string& command, const RunConfig& cfg) {
    return {command, to_json(cfg), cfg.seed, {}};
}

void emit(const std::string& command, const RunConfig& cfg, const Table& table) {
    Output out(cfg.output);
    write_table(out.stream(), header_for(command, cfg), table);
}

double exact_efficiency(const RunConfig& cfg, const PulseSpec& pulse, PulseKind kind) {
    if (!(cfg.sigma_p > 0.0)) throw ConfigError("the exact engine needs sigma_p > 0");
    const SolverConfig solver = cfg.solver(pulse.envelope.window_length());
    const PulseSpec& p = pulse;
    if (kind == PulseKind::BeamSplitter) {
        const auto r = run_single_pulse(solver, p, make_gaussian_packet(cfg.p0, cfg.sigma_p, solver.grid));
        return r.ports[kUp] + r.ports[kDown];
    }
    // Input class +2: the packet rolled up by one lattice recoil.
    const WavePacket w = make_gaussian_packet(cfg.p0, cfg.sigma_p, solver.grid);
    std::vector<cplx> up(w.amplitudes().begin(), w.amplitudes().end());
    std::rotate(up.rbegin(), up.rbegin() + static_cast<std::ptrdiff_t>(solver.grid.recoil_bins()), up.rend());
    const auto r = run_single_pulse(solver, p, WavePacket(solver.grid, Representation::Momentum, std::move(up)));
    return r.ports[kDown];
}

void cmd_efficiency(const RunConfig& cfg) {
    Table t;
    t.columns = {"strategy"};
    if (uses_5ls(cfg)) t.columns.insert(t.columns.end(), {"eta_bs_5ls", "eta_m_5ls"});
    if (uses_exact(cfg)) t.columns.insert(t.columns.end(), {"eta_bs_exact", "eta_m_exact"});
    for (Strategy s : cfg.strategies()) {
        const StrategyPreset p = cfg.preset_for(s).with_eps_pol(cfg.eps_pol);
        std::vector<Cell> row{to_string(s)};
        if (uses_5ls(cfg)) {
            row.emplace_back(integrated_efficiency(p.bs, PulseKind::BeamSplitter, cfg.p0, cfg.sigma_p));
            row.emplace_back(integrated_efficiency(p.mirror, PulseKind::Mirror, cfg.p0, cfg.sigma_p));
        }
        if (uses_exact(cfg)) {
            row.emplace_back(exact_efficiency(cfg, p.bs, PulseKind::BeamSplitter));
            row.emplace_back(exact_efficiency(cfg, p.mirror, PulseKind::Mirror));
        }
        t.add(std::move(row));
    }
    emit("efficiency", cfg, t);
}

void cmd_landscape(const RunConfig& cfg) {
    const auto ps = linspace(cfg.landscape.p_min, cfg.landscape.p_max, cfg.landscape.p_points);
    const auto es = linspace(cfg.landscape.eps_min, cfg.landscape.eps_max, cfg.landscape.eps_points);
    Table t;
    t.columns = {"strategy", "pulse", "p", "eps_pol", "efficiency"};
    for (Strategy s : cfg.strategies()) {
        const StrategyPreset p = cfg.preset_for(s);
        for (auto [kind, pulse, name] : {std::tuple{PulseKind::BeamSplitter, p.bs, "bs"},
                                         std::tuple{PulseKind::Mirror, p.mirror, "m"}}) {
            const Landscape l = efficiency_landscape(pulse, kind, ps, es);
            for (std::size_t i = 0; i < ps.size(); ++i)
                for (std::size_t j = 0; j < es.size(); ++j)
                    t.add({to_string(s), std::string(name), ps[i], es[j], l.at(i, j)});
        }
    }
    emit("landscape", cfg, t);
}

std::pair<double, double> scan_range(const RunConfig& cfg) {
    if (cfg.tscan.t_max > 0.0) return {cfg.tscan.t_min, cfg.tscan.t_max};
    return contrast_window(cfg.g);
}

void cmd_tscan(const RunConfig& cfg) {
    const auto [t_lo, t_hi] = scan_range(cfg);
    const auto Ts = linspace(t_lo, t_hi, cfg.tscan.points);
    Table t;
    t.columns = {"strategy", "engine", "T"};
    t.columns.insert(t.columns.end(), std::begin(kPortNames), std::end(kPortNames));
    t.columns.push_back("conjugate");
    auto add_row = [&](Strategy s, const char* engine, double T, const std::array<double, 5>& ports) {
        std::vector<Cell> row{to_string(s), std::string(engine), T};
        for (double p : ports) row.emplace_back(p);
        row.emplace_back(ports[kUp] + ports[kDown]);
        t.add(std::move(row));
    };
    for (Strategy s : cfg.strategies()) {
        const MZConfig mz = cfg.mz(s);
        if (uses_5ls(cfg)) {
            const FiveLevelInterferometer model = FiveLevelInterferometer::for_config(mz, t_hi);
            const FringeSignal f = t_scan(model, mz, t_lo, t_hi, Ts.size());
            for (std::size_t i = 0; i < f.T.size(); ++i) add_row(s, "5ls", f.T[i], f.ports[i]);
        }
        if (uses_exact(cfg)) {
            if (!(cfg.sigma_p > 0.0)) throw ConfigError("the exact engine needs sigma_p > 0");
            const double span = 2.0 * t_hi + 2.0 * kWindowHalfWidths * mz.preset.bs.envelope.tau;
            const SolverConfig solver = cfg.solver(span);
            const WavePacket packet = make_gaussian_packet(cfg.p0, cfg.sigma_p, solver.grid);
            for (double T : Ts) add_row(s, "exact", T, run_mz_exact(solver, mz.preset, T, packet).ports);
        }
    }
    emit("tscan", cfg, t);
}

void cmd_contrast_scan(const RunConfig& cfg) {
    if (cfg.engine != Engine::FiveLevel) throw ConfigError("contrast-scan runs on the 5ls engine");
    if (cfg.scan.values.empty()) throw ConfigError("contrast-scan needs scan values");
    std::vector<StrategyPreset> presets;
    for (Strategy s : cfg.strategies()) presets.push_back(cfg.preset_for(s));
    MZConfig base = cfg.mz(presets.front().name);
    const auto rows = contrast_scan(base, parse_axis(cfg.scan.axis), cfg.scan.values, presets);
    Table t;
    t.columns = {"strategy", cfg.scan.axis, "contrast", "T_max", "T_min", "P_max", "P_min"};
    for (const auto& r : rows)
        t.add({to_string(r.strategy), r.value, r.result.contrast, r.result.t_max, r.result.t_min, r.result.p_max,
               r.result.p_min});
    emit("contrast-scan", cfg, t);
}

void cmd_robustness(const RunConfig& cfg) {
    if (cfg.engine != Engine::FiveLevel) throw ConfigError("robustness runs on the 5ls engine");
    const RobustnessSpec spec = cfg.robustness_spec();
    Table t;
    t.columns = {"strategy", "sigma_r", "mean", "std", "nominal", "band_lo", "band_hi"};
    for (int r = 0; r < spec.realizations; ++r) t.columns.push_back("c" + std::to_string(r + 1));
    for (Strategy s : cfg.strategies()) {
        for (const auto& row : robustness_scan(cfg.mz(s), spec)) {
            std::vector<Cell> cells{to_string(s), row.sigma_r, row.mean, row.std, row.nominal, row.band_lo,
                                    row.band_hi};
            for (double c : row.contrasts) cells.emplace_back(c);
            t.add(std::move(cells));
        }
    }
    emit("robustness", cfg, t);
}

void cmd_density(const RunConfig& cfg) {
    if (cfg.engine != Engine::Exact) throw ConfigError("density needs engine exact");
    const auto strategies = cfg.strategies();
    if (strategies.size() != 1) throw ConfigError("density needs a single strategy");
    if (!(cfg.sigma_p > 0.0)) throw ConfigError("the exact engine needs sigma_p > 0");
    const MZConfig mz = cfg.mz(strategies.front());
    const SolverConfig solver = cfg.solver(2.0 * cfg.T + 2.0 * kWindowHalfWidths * mz.preset.bs.envelope.tau);
    ExactRunOptions opts;
    opts.record_density = true;
    const auto r = run_mz_exact(solver, mz.preset, cfg.T, make_gaussian_packet(cfg.p0, cfg.sigma_p, solver.grid), opts);
    OutputHeader h = header_for("density", cfg);
    std::string ports = "ports:";
    for (std::size_t i = 0; i < 5; ++i) ports += std::string(" ") + kPortNames[i] + "=" + format_number(r.ports[i]);
    h.notes.push_back(ports);
    Output out(cfg.output);
    write_header(out.stream(), h);
    r.movie->write(out.stream());
}

void cmd_optimize_mirror(const RunConfig& cfg) {
    if (cfg.output.empty()) throw ConfigError("optimize-mirror needs an output profile path");
    const ControlParams init = ControlParams::from_ds_mirror(cfg.optimizer.knots);
    const OptimizationResult r = optimize_mirror(init, cfg.cost(), cfg.optimizer_settings());
    const PulseSpec mirror = r.best.to_pulse();

    const double eta = integrated_efficiency(mirror, PulseKind::Mirror, cfg.p0, cfg.sigma_p);
    const std::vector<std::string> notes{
        version_string(), "seed = " + std::to_string(cfg.seed), "config = " + to_json(cfg).dump(),
        "cost = " + format_number(r.best_cost), "evaluations = " + std::to_string(r.evaluations),
        "eta_m = " + format_number(eta)};
    save_mirror_pulse(cfg.output, mirror, notes);

    std::ofstream log(cfg.output + ".log");
    if (!log) throw ConfigError("cannot write " + cfg.output + ".log");
    write_header(log, header_for("optimize-mirror", cfg));
    for (const auto& line : r.log) log << line << '\n';

    Table t;
    t.columns = {"initial_cost", "best_cost", "evaluations", "eta_m", "omega_peak", "tau", "t0"};
    t.add({r.initial_cost, r.best_cost, static_cast<double>(r.evaluations), eta, r.best.omega_peak, r.best.tau,
           r.best.t0});
    write_table(std::cout, header_for("optimize-mirror", cfg), t);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double Bragg interferometer simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::string engine;
    bool dump_config = false;
    app.add_option("-c,--config", config_path, "JSON config file; flags override its values");
    app.add_option("--engine", engine, "5ls, exact or both");
    app.add_flag("--dump-config", dump_config, "print the resolved config and exit");
    Overrides overrides;
    register_flags(app, overrides);

    const std::vector<std::pair<std::string, std::function<void(const RunConfig&)>>> commands{
        {"efficiency", cmd_efficiency},         {"landscape", cmd_landscape},   {"tscan", cmd_tscan},
        {"contrast-scan", cmd_contrast_scan}, {"robustness", cmd_robustness}, {"density", cmd_density},
        {"optimize-mirror", cmd_optimize_mirror}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigFailure;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        overrides.apply(cfg);
        if (!engine.empty()) cfg.engine = parse_engine(engine);
        cfg.validate();
        if (dump_config) {
            std::cout << to_json(cfg).dump(2) << '\n';
            return 0;
        }
        for (const auto& [name, fn] : commands)
            if (app.got_subcommand(name)) fn(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "dbdsim: %s\n", e.what());
        return kConfigFailure;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "dbdsim: numerical failure: %s\n", e.what());
        return kNumericalFailure;
    }
    return 0;
}
