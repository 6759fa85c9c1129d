#include "dbd/run_config.hpp"

#include <cmath>
#include <fstream>

#include "dbd/errors.hpp"

#ifndef DBD_DEFAULT_OCT_PROFILE
#define DBD_DEFAULT_OCT_PROFILE "data/oct_mirror.txt"
#endif

namespace dbd {

NLOHMANN_JSON_SERIALIZE_ENUM(Engine, {{Engine::FiveLevel, "5ls"}, {Engine::Exact, "exact"}, {Engine::Both, "both"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GridSettings, n, dp, dt)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TRange, t_min, t_max, points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LandscapeSettings, p_min, p_max, p_points, eps_min, eps_max,
                                                eps_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScanSettings, axis, values)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RobustnessSettings, sigma_r, realizations, shared_factor, band_scale)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OptimizerConfig, budget, knots, samples, p_max, smooth_terms,
                                                explore_samples, explore_keep, local_budget, coarse_step,
                                                initial_step)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, strategy, engine, g, T, p0, sigma_p, eps_pol, seed, output,
                                                oct_profile, contrast_dt, grid, tscan, landscape, scan, robustness,
                                                optimizer)

std::string to_string(Engine e) {
    return nlohmann::json(e).get<std::string>();
}

Engine parse_engine(const std::string& name) {
    if (name == "5ls") return Engine::FiveLevel;
    if (name == "exact") return Engine::Exact;
    if (name == "both") return Engine::Both;
    throw ConfigError("unknown engine '" + name + "' (expected 5ls, exact or both)");
}

namespace {

void reject_unknown(const nlohmann::json& given, const nlohmann::json& known, const std::string& where) {
    for (const auto& [key, value] : given.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!known.contains(key)) throw ConfigError("unknown config key '" + path + "'");
        if (value.is_object() && known[key].is_object()) reject_unknown(value, known[key], path);
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

void RunConfig::validate() const {
    if (strategy != "all") parse_strategy(strategy);
    require(std::isfinite(g), "g must be finite");
    require(T >= 0.0, "T must be non-negative");
    require(sigma_p >= 0.0 && sigma_p < 0.2, "sigma_p must lie in [0, 0.2)");
    require(std::abs(p0) < 1.0, "p0 must lie inside the Brillouin zone");
    require(eps_pol >= 0.0 && eps_pol <= 1.0, "eps_pol must lie in [0, 1]");
    require(contrast_dt > 0.0, "contrast_dt must be positive");
    require(grid.dt > 0.0, "grid.dt must be positive");
    require(grid.n == 0 || grid.dp > 0.0, "grid.dp must be positive when grid.n is set");
    require(tscan.points >= 3 && tscan.t_min >= 0.0, "tscan needs at least three points from t_min >= 0");
    require(tscan.t_max == 0.0 || tscan.t_max > tscan.t_min, "tscan.t_max must exceed t_min");
    require(landscape.p_points >= 1 && landscape.eps_points >= 1, "landscape needs at least one point per axis");
    parse_axis(scan.axis);
    robustness_spec().validate();
    require(optimizer.knots >= 2, "optimizer.knots must be at least 2");
    require(optimizer.samples >= 1 && optimizer.p_max >= 0.0, "optimizer sampling is invalid");
}

std::vector<Strategy> RunConfig::strategies() const {
    if (strategy == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
    return {parse_strategy(strategy)};
}

StrategyPreset RunConfig::preset_for(Strategy s) const {
    if (s != Strategy::Oct) return preset(s);
    return preset(s, std::filesystem::path(oct_profile.empty() ? DBD_DEFAULT_OCT_PROFILE : oct_profile));
}

MZConfig RunConfig::mz(Strategy s) const {
    MZConfig m;
    m.g = g;
    m.T = T;
    m.p0 = p0;
    m.sigma_p = sigma_p;
    m.eps_pol = eps_pol;
    m.preset = preset_for(s).with_eps_pol(eps_pol);
    return m;
}

SolverConfig RunConfig::solver(double duration) const {
    SolverConfig s;
    s.grid = grid.n ? SpatialGrid(grid.n, grid.dp) : SpatialGrid::sized_for(std::max(sigma_p, 0.01), duration);
    s.dt = grid.dt;
    s.g = g;
    s.eps_pol = eps_pol;
    return s;
}

RobustnessSpec RunConfig::robustness_spec() const {
    RobustnessSpec r;
    r.sigma_r = robustness.sigma_r;
    r.realizations = robustness.realizations;
    r.seed = seed;
    r.shared_factor = robustness.shared_factor;
    r.band_scale = robustness.band_scale;
    r.dt = contrast_dt;
    return r;
}

CostConfig RunConfig::cost() const {
    CostConfig c;
    c.p_min = -optimizer.p_max;
    c.p_max = optimizer.p_max;
    c.n_samples = optimizer.samples;
    c.eps_pol = eps_pol;
    return c;
}

OptimizerSettings RunConfig::optimizer_settings() const {
    OptimizerSettings o;
    o.budget = optimizer.budget;
    o.seed = seed;
    o.smooth_terms = optimizer.smooth_terms;
    o.explore_samples = optimizer.explore_samples;
    o.explore_keep = optimizer.explore_keep;
    o.local_budget = optimizer.local_budget;
    o.coarse_step = optimizer.coarse_step;
    o.initial_step = optimizer.initial_step;
    return o;
}

nlohmann::json to_json(const RunConfig& cfg) {
    return nlohmann::json(cfg);
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, to_json(RunConfig{}), "");
    if (j.contains("engine") && j["engine"].is_string()) parse_engine(j["engine"].get<std::string>());
    RunConfig cfg;
    try {
        cfg = j.get<RunConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace dbd
