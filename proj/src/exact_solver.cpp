#include "dbd/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "dbd/errors.hpp"
#include "dbd/fourier.hpp"

namespace dbd {

namespace {

constexpr double kEdgeLimit = 1e-8;
constexpr std::size_t kEdgePoints = 4;
constexpr double kDbFloor = -60.0;

// (-1)^k folds the z_0 = -L/2 origin into the unitary DFT.
void position_to_momentum(std::vector<cplx>& a, const FftPair& fft) {
    fft.forward(a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= (k % 2 ? -scale : scale);
}

void momentum_to_position(std::vector<cplx>& a, const FftPair& fft) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= (k % 2 ? -scale : scale);
    fft.backward(a);
}

double norm_of(const std::vector<cplx>& a) {
    return std::accumulate(a.begin(), a.end(), 0.0, [](double s, cplx x) { return s + std::norm(x); });
}

std::string at_time(const char* what, double t) {
    std::ostringstream msg;
    msg << what << " at t = " << t;
    return msg.str();
}

class Evolver {
public:
    Evolver(const SolverConfig& cfg, double t_ref)
        : cfg_(cfg), grid_(cfg.grid), fft_(fft_for(cfg.grid.size())), t_ref_(t_ref) {
        const std::size_t n = grid_.size();
        period_ = n / grid_.recoil_bins();
        lattice_arg_.resize(period_);
        for (std::size_t q = 0; q < period_; ++q) lattice_arg_[q] = 2.0 * grid_.z(q);
        pattern_.resize(period_);
    }

    const SpatialGrid& grid() const { return grid_; }

    template <class Observer>
    void strang_window(std::vector<cplx>& psi, const PulseSpec& pulse, double center, double t_begin, double t_end,
                       Observer&& observe) {
        const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_begin) / cfg_.dt - 1e-9));
        const double h = (t_end - t_begin) / static_cast<double>(std::max<std::size_t>(steps, 1));
        prepare(h);
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = t_begin + static_cast<double>(i) * h;
            step(psi, &pulse, center, t);
            observe(i + 1, t + h, psi);
        }
    }

    // One step of length h from t with an optional active pulse.
    void step(std::vector<cplx>& psi, const PulseSpec* pulse, double center, double t) {
        const double tm = t + 0.5 * h_;
        double drive = 0.0;
        if (pulse) drive = pulse->lattice_drive(tm - center + pulse->envelope.t0);
        const double shift = cfg_.frame == Frame::Lab ? cfg_.a_L * (tm - t_ref_) * (tm - t_ref_) : 0.0;
        for (std::size_t q = 0; q < period_; ++q)
            pattern_[q] = std::polar(1.0, -h_ * drive * std::cos(lattice_arg_[q] - shift));
        const std::size_t n = psi.size();
        for (std::size_t j = 0; j < n; ++j) psi[j] *= pattern_[j % period_] * gravity_[j];
        fft_->forward(psi);
        for (std::size_t k = 0; k < n; ++k) psi[k] *= kinetic_[k];
        fft_->backward(psi);
        for (std::size_t j = 0; j < n; ++j) psi[j] *= pattern_[j % period_] * gravity_[j];
    }

    void prepare(double h) {
        if (h == h_) return;
        h_ = h;
        const std::size_t n = grid_.size();
        gravity_.resize(n);
        kinetic_.resize(n);
        for (std::size_t j = 0; j < n; ++j) gravity_[j] = std::polar(1.0, 0.5 * h * kMass * cfg_.g * grid_.z(j));
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double p = grid_.p(k);
            kinetic_[k] = scale * std::polar(1.0, -h * p * p / (2.0 * kMass));
        }
    }

    // Position representation in and out.
    void free(std::vector<cplx>& psi, double duration, double t_now) const {
        if (duration <= 0.0) return;
        check_reach(psi, duration, t_now);
        position_to_momentum(psi, *fft_);
        apply_free_phase(psi, duration);
        momentum_to_position(psi, *fft_);
        apply_kick(psi, kMass * cfg_.g * duration);
    }

    void apply_free_phase(std::vector<cplx>& phi, double duration) const {
        const double g = cfg_.g;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            const double p = grid_.p(k);
            phi[k] *= std::polar(1.0, -(kMass * g * duration * duration * p + duration * p * p) / (2.0 * kMass));
        }
    }

    void apply_kick(std::vector<cplx>& psi, double dp) const {
        if (dp == 0.0) return;
        for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= std::polar(1.0, dp * grid_.z(j));
    }

    void impulse(std::vector<cplx>& psi, const PulseResponse& response) const {
        position_to_momentum(psi, *fft_);
        const std::vector<cplx> in = psi;
        const std::size_t bins = grid_.recoil_bins();
        const std::size_t start = grid_.index_of_momentum(-1.0);
        for (std::size_t b = 0; b < bins; ++b) {
            const std::size_t k0 = (start + b) % grid_.size();
            const double p = grid_.p(k0);
            std::array<std::size_t, 5> idx{};
            Eigen::Matrix<cplx, 5, 1> v;
            for (int i = 0; i < 5; ++i) {
                idx[static_cast<std::size_t>(i)] = grid_.index_of_momentum(p + 2.0 * level_order(i));
                v[i] = in[idx[static_cast<std::size_t>(i)]];
            }
            const Eigen::Matrix<cplx, 5, 1> out = response(p) * v;
            for (int i = 0; i < 5; ++i) psi[idx[static_cast<std::size_t>(i)]] = out[i];
        }
        momentum_to_position(psi, *fft_);
    }

    void check_edges(const std::vector<cplx>& psi, double t) const {
        const std::size_t n = psi.size();
        for (std::size_t j = 0; j < kEdgePoints; ++j)
            if (std::norm(psi[j]) >= kEdgeLimit || std::norm(psi[n - 1 - j]) >= kEdgeLimit)
                throw NumericalError(at_time("wave packet reached the grid boundary", t));
    }

    // Conservative bound on how far significant amplitude travels during a
    // free interval; wrap-around would otherwise go unnoticed.
    void check_reach(const std::vector<cplx>& psi, double duration, double t_now) const {
        double z_ext = 0.0;
        for (std::size_t j = 0; j < psi.size(); ++j)
            if (std::norm(psi[j]) >= kEdgeLimit) z_ext = std::max(z_ext, std::abs(grid_.z(j)));
        std::vector<cplx> phi = psi;
        position_to_momentum(phi, *fft_);
        double p_ext = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k)
            if (std::norm(phi[k]) >= kEdgeLimit) p_ext = std::max(p_ext, std::abs(grid_.p(k)));
        const double kick = kMass * std::abs(cfg_.g) * duration;
        if (p_ext + kick >= grid_.p_extent() - 1.0)
            throw NumericalError(at_time("momentum support leaves the grid during free evolution", t_now));
        const double speed = (p_ext + kick) / kMass;
        const double room = grid_.z_max() - static_cast<double>(kEdgePoints + 1) * grid_.dz();
        if (z_ext + speed * duration >= room) {
            const double contact = speed > 0.0 ? t_now + std::max(0.0, room - z_ext) / speed : t_now;
            throw NumericalError(at_time("wave packet reaches the grid boundary", contact));
        }
    }

private:
    SolverConfig cfg_;
    SpatialGrid grid_;
    std::shared_ptr<const FftPair> fft_;
    double t_ref_;
    std::size_t period_ = 1;
    std::vector<double> lattice_arg_;
    std::vector<cplx> pattern_;
    double h_ = -1.0;
    std::vector<cplx> gravity_;
    std::vector<cplx> kinetic_;
};

std::vector<cplx> position_amplitudes(const WavePacket& w) {
    const WavePacket pos = w.representation() == Representation::Position ? w : to_position(w);
    return {pos.amplitudes().begin(), pos.amplitudes().end()};
}

class MovieRecorder {
public:
    MovieRecorder(const SpatialGrid& grid, const std::vector<cplx>& psi0, const ExactRunOptions& opts)
        : stride_(std::max<std::size_t>(1, grid.size() / std::max<std::size_t>(1, opts.max_columns))) {
        double peak = 0.0;
        for (const auto& a : psi0) peak = std::max(peak, std::norm(a));
        reference_ = peak;
        for (std::size_t j = 0; j < grid.size(); j += stride_) movie_.z.push_back(grid.z(j));
    }

    void record(double t, const std::vector<cplx>& psi) {
        std::vector<float> row;
        row.reserve(movie_.z.size());
        for (std::size_t j = 0; j < psi.size(); j += stride_) {
            const double rel = std::norm(psi[j]) / reference_;
            row.push_back(static_cast<float>(rel > 0.0 ? std::max(kDbFloor, 10.0 * std::log10(rel)) : kDbFloor));
        }
        movie_.times.push_back(t);
        movie_.db.push_back(std::move(row));
    }

    DensityMovie take() { return std::move(movie_); }

private:
    std::size_t stride_;
    double reference_ = 1.0;
    DensityMovie movie_;
};

}  // namespace

double SequenceStep::begin() const {
    if (const auto* p = std::get_if<PulseSpec>(&action)) return center - kWindowHalfWidths * p->envelope.tau;
    return center;
}

double SequenceStep::end() const {
    if (const auto* p = std::get_if<PulseSpec>(&action)) return center + kWindowHalfWidths * p->envelope.tau;
    return center;
}

PulseSequence::PulseSequence(std::vector<SequenceStep> steps) : steps_(std::move(steps)) {
    std::sort(steps_.begin(), steps_.end(), [](const auto& a, const auto& b) { return a.center < b.center; });
    for (std::size_t i = 1; i < steps_.size(); ++i)
        if (steps_[i].begin() < steps_[i - 1].end()) throw ConfigError("overlapping pulse windows in sequence");
}

PulseSequence PulseSequence::mach_zehnder(const StrategyPreset& pulses, double T) {
    const double gap = kWindowHalfWidths * (pulses.bs.envelope.tau + pulses.mirror.envelope.tau);
    if (!(T > gap)) {
        std::ostringstream msg;
        msg << "T = " << T << " does not separate the pulse windows (need T > " << gap << ")";
        throw ConfigError(msg.str());
    }
    return PulseSequence({{0.0, pulses.bs}, {T, pulses.mirror}, {2.0 * T, pulses.bs}});
}

const PulseSpec* PulseSequence::active(double t, double& local_time) const {
    for (const auto& s : steps_) {
        const auto* p = std::get_if<PulseSpec>(&s.action);
        if (p && t >= s.begin() && t <= s.end()) {
            local_time = t - s.center + p->envelope.t0;
            return p;
        }
    }
    return nullptr;
}

double PulseSequence::begin() const { return steps_.empty() ? 0.0 : steps_.front().begin(); }
double PulseSequence::end() const { return steps_.empty() ? 0.0 : steps_.back().end(); }

double potential_com(double z, double t, const PulseSequence& seq, double g) {
    double local = 0.0;
    const PulseSpec* p = seq.active(t, local);
    const double lattice = p ? 2.0 * RecoilFrame::hbar * p->lattice_drive(local) * std::cos(2.0 * z) : 0.0;
    return lattice - kMass * g * z;
}

WavePacket step_strang(const WavePacket& w, double t, double dt, const SolverConfig& cfg, const PulseSequence& seq) {
    SolverConfig c = cfg;
    c.dt = dt;
    Evolver ev(c, 0.0);
    ev.prepare(dt);
    std::vector<cplx> psi = position_amplitudes(w);
    double local = 0.0;
    const double tm = t + 0.5 * dt;
    const PulseSpec* pulse = seq.active(tm, local);
    // Express the active pulse through its placement so the step sees local time.
    ev.step(psi, pulse, pulse ? tm - local + pulse->envelope.t0 : 0.0, t);
    WavePacket out(w.grid(), Representation::Position, std::move(psi));
    return w.representation() == Representation::Position ? out : to_momentum(out);
}

WavePacket evolve_free(const WavePacket& w, double duration, double g) {
    SolverConfig cfg;
    cfg.grid = w.grid();
    cfg.g = g;
    Evolver ev(cfg, 0.0);
    std::vector<cplx> psi = position_amplitudes(w);
    ev.free(psi, duration, 0.0);
    WavePacket out(w.grid(), Representation::Position, std::move(psi));
    return w.representation() == Representation::Position ? out : to_momentum(out);
}

void DensityMovie::write(std::ostream& out) const {
    out << "# density |psi(z,t)|^2 in dB relative to the initial maximum, floor " << kDbFloor << '\n';
    out << "# columns: t z db\n";
    out << std::setprecision(8);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < z.size(); ++j) out << times[i] << ' ' << z[j] << ' ' << db[i][j] << '\n';
}

ExactRunResult run_sequence(const SolverConfig& cfg, const PulseSequence& seq, const WavePacket& packet,
                            double t_start, double t_end, const ExactRunOptions& options) {
    if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
    if (packet.grid() != cfg.grid) throw ConfigError("packet grid differs from solver grid");
    if (cfg.frame == Frame::Com && cfg.a_L != 0.0) throw ConfigError("lattice acceleration is a lab-frame setting");
    if (!seq.steps().empty() && (seq.begin() < t_start - 1e-12 || seq.end() > t_end + 1e-12))
        throw ConfigError("sequence extends beyond the simulated interval");

    Evolver ev(cfg, t_start);
    std::vector<cplx> psi = position_amplitudes(packet);
    const double norm0 = norm_of(psi);
    std::optional<MovieRecorder> recorder;
    if (options.record_density) {
        recorder.emplace(cfg.grid, psi, options);
        recorder->record(t_start, psi);
    }
    auto free_to = [&](double t_from, double t_to) {
        if (t_to <= t_from) return;
        if (recorder && options.free_frames > 0) {
            std::vector<cplx> base = psi;
            for (std::size_t f = 1; f < options.free_frames; ++f) {
                const double t = t_from + (t_to - t_from) * static_cast<double>(f) / static_cast<double>(options.free_frames);
                std::vector<cplx> frame = base;
                ev.free(frame, t - t_from, t_from);
                recorder->record(t, frame);
            }
        }
        ev.free(psi, t_to - t_from, t_from);
        ev.check_edges(psi, t_to);
        if (recorder) recorder->record(t_to, psi);
    };

    double t = t_start;
    for (const SequenceStep& s : seq.steps()) {
        free_to(t, s.begin());
        if (const auto* pulse = std::get_if<PulseSpec>(&s.action)) {
            ev.strang_window(psi, *pulse, s.center, s.begin(), s.end(), [&](std::size_t i, double tt, const auto& state) {
                if (recorder && i % options.density_every_steps == 0) recorder->record(tt, state);
            });
        } else {
            ev.impulse(psi, std::get<PulseResponse>(s.action));
        }
        ev.check_edges(psi, s.end());
        t = s.end();
    }
    free_to(t, t_end);

    const double norm1 = norm_of(psi);
    WavePacket final_state = to_momentum(WavePacket(cfg.grid, Representation::Position, std::move(psi)));
    const double shift = kMass * cfg.g * (t_end - t_start);
    ExactRunResult result{port_populations(final_state, shift), shift, std::abs(norm1 - norm0), std::move(final_state),
                          std::nullopt};
    if (recorder) result.movie = recorder->take();
    return result;
}

ExactRunResult run_mz_exact(const SolverConfig& cfg, const StrategyPreset& pulses, double T, const WavePacket& packet,
                            const ExactRunOptions& options) {
    const StrategyPreset p = pulses.with_eps_pol(cfg.eps_pol);
    const PulseSequence seq = PulseSequence::mach_zehnder(p, T);
    return run_sequence(cfg, seq, packet, seq.begin(), seq.end(), options);
}

ExactRunResult run_lab_frame(const SolverConfig& cfg, const StrategyPreset& pulses, double T, const WavePacket& packet,
                             const ExactRunOptions& options) {
    if (cfg.frame != Frame::Lab) throw ConfigError("run_lab_frame needs a lab-frame solver config");
    return run_mz_exact(cfg, pulses, T, packet, options);
}

ExactRunResult run_single_pulse(const SolverConfig& cfg, const PulseSpec& pulse, const WavePacket& packet) {
    const PulseSequence seq({{0.0, pulse}});
    SolverConfig c = cfg;
    c.g = 0.0;
    c.frame = Frame::Com;
    c.a_L = 0.0;
    return run_sequence(c, seq, packet, seq.begin(), seq.end());
}

}  // namespace dbd
