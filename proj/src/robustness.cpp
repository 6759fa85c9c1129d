#include "dbd/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "dbd/errors.hpp"
#include "dbd/parallel.hpp"
#include "dbd/random.hpp"

namespace dbd {

void RobustnessSpec::validate() const {
    if (realizations < 2) throw ConfigError("robustness needs at least 2 realizations");
    for (double s : sigma_r)
        if (!(s >= 0.0 && s <= 0.1)) throw ConfigError("sigma_R values must lie in [0, 0.1]");
    if (!(band_scale >= 0.0)) throw ConfigError("band scale must be non-negative");
    if (!(dt > 0.0) || !(table_spacing > 0.0)) throw ConfigError("robustness steps must be positive");
}

std::array<double, 3> depth_factors(std::uint64_t seed, std::size_t sigma_index, int realization, double sigma_r,
                                    bool shared) {
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::array<double, 3> f{};
    for (std::uint32_t pulse = 0; pulse < 3; ++pulse) {
        const Philox4x32::Block ctr{shared ? 0u : pulse, static_cast<std::uint32_t>(realization),
                                    static_cast<std::uint32_t>(sigma_index), 0x524f42u};
        f[pulse] = 1.0 + sigma_r * normal_from(Philox4x32::generate(ctr, key));
    }
    return f;
}

double scaled_contrast(const MZConfig& cfg, const std::array<double, 3>& factors, double dt, double table_spacing) {
    const auto [t_lo, t_hi] = contrast_window(cfg.g);
    const double margin = 0.01;
    const double p_lo = cfg.p0 - 5.0 * cfg.sigma_p - margin;
    const double p_hi = cfg.p0 + 5.0 * cfg.sigma_p + 2.0 * kMass * std::abs(cfg.g) * t_hi + margin;
    if (p_lo <= -1.0 || p_hi >= 1.0) throw ConfigError("momentum range leaves the Brillouin zone");

    const StrategyPreset pulses = cfg.preset.with_eps_pol(cfg.eps_pol);
    auto table = [&](const PulseSpec& p, double f) {
        auto t = std::make_shared<const SMatrixTable>(p.with_peak_scale(f), p_lo, p_hi, table_spacing);
        return PulseResponse([t](double q) { return (*t)(q); });
    };
    const double sep = kWindowHalfWidths * (pulses.bs.envelope.tau + pulses.mirror.envelope.tau);
    const FiveLevelInterferometer mz(table(pulses.bs, factors[0]), table(pulses.mirror, factors[1]),
                                     table(pulses.bs, factors[2]), sep);
    return measure_contrast(mz, cfg, dt).contrast;
}

std::vector<RobustnessRow> robustness_scan(const MZConfig& cfg, const RobustnessSpec& spec) {
    spec.validate();
    const double nominal = scaled_contrast(cfg, {1.0, 1.0, 1.0}, spec.dt, spec.table_spacing);
    std::vector<RobustnessRow> rows;
    for (std::size_t i = 0; i < spec.sigma_r.size(); ++i) {
        const double s = spec.sigma_r[i];
        RobustnessRow row;
        row.sigma_r = s;
        row.nominal = nominal;
        row.contrasts.resize(static_cast<std::size_t>(spec.realizations));
        for (int r = 0; r < spec.realizations; ++r) {
            row.contrasts[static_cast<std::size_t>(r)] =
                s == 0.0 ? nominal
                         : scaled_contrast(cfg, depth_factors(spec.seed, i, r, s, spec.shared_factor), spec.dt,
                                           spec.table_spacing);
        }
        const double n = static_cast<double>(row.contrasts.size());
        row.mean = std::accumulate(row.contrasts.begin(), row.contrasts.end(), 0.0) / n;
        double ss = 0.0;
        for (double c : row.contrasts) ss += (c - row.mean) * (c - row.mean);
        row.std = std::sqrt(ss / (n - 1.0));

        const double d = spec.band_scale * s;
        const double up = d == 0.0 ? nominal : scaled_contrast(cfg, {1 + d, 1 + d, 1 + d}, spec.dt, spec.table_spacing);
        const double down = d == 0.0 ? nominal : scaled_contrast(cfg, {1 - d, 1 - d, 1 - d}, spec.dt, spec.table_spacing);
        row.band_lo = std::min({nominal, up, down});
        row.band_hi = std::max({nominal, up, down});
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace dbd
