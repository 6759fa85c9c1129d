#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbd/exact_solver.hpp"
#include "dbd/interferometer.hpp"
#include "dbd/oct_optimizer.hpp"
#include "dbd/robustness.hpp"

namespace dbd {

enum class Engine { FiveLevel, Exact, Both };
std::string to_string(Engine e);
Engine parse_engine(const std::string& name);

// Exact-engine grid; n = 0 sizes the grid from sigma_p and the sequence length.
struct GridSettings {
    std::size_t n = 0;
    double dp = 0.0;
    double dt = 0.002;
};

struct TRange {
    double t_min = 0.0;
    double t_max = 0.0;  // 0: the contrast window of g
    std::size_t points = 201;
};

struct LandscapeSettings {
    double p_min = -0.5, p_max = 0.5;
    std::size_t p_points = 101;
    double eps_min = 0.0, eps_max = 0.1;
    std::size_t eps_points = 11;
};

struct ScanSettings {
    std::string axis = "sigma_p";
    std::vector<double> values;
};

struct RobustnessSettings {
    std::vector<double> sigma_r{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    int realizations = 10;
    bool shared_factor = false;
    double band_scale = 1.05;
};

struct OptimizerConfig {
    int budget = 5000;
    std::size_t knots = 16;
    int samples = 9;
    double p_max = 0.2;
    int smooth_terms = 6;
    int explore_samples = 600;
    int explore_keep = 6;
    int local_budget = 200;
    double coarse_step = 0.1;
    double initial_step = 0.01;
};

// Everything a subcommand needs. Stored in JSON; every field is optional and
// unknown keys are rejected. See the README for the layout.
struct RunConfig {
    std::string strategy = "all";  // a strategy name or "all"
    Engine engine = Engine::FiveLevel;
    double g = kDefaultAcceleration;
    double T = 0.0;
    double p0 = 0.0;
    double sigma_p = 0.05;
    double eps_pol = 0.0;
    std::uint64_t seed = 1;
    std::string output;  // empty: standard output
    std::string oct_profile;  // empty: the mirror shipped in data/
    double contrast_dt = 0.05;
    GridSettings grid;
    TRange tscan;
    LandscapeSettings landscape;
    ScanSettings scan;
    RobustnessSettings robustness;
    OptimizerConfig optimizer;

    void validate() const;

    std::vector<Strategy> strategies() const;
    StrategyPreset preset_for(Strategy s) const;
    MZConfig mz(Strategy s) const;
    SolverConfig solver(double duration) const;
    RobustnessSpec robustness_spec() const;
    CostConfig cost() const;
    OptimizerSettings optimizer_settings() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults. Throws ConfigError on unknown keys or bad types.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace dbd
