#include "dbd/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace dbd {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftPair::FftPair(std::size_t n) : n_(n) {
    std::vector<std::complex<double>> scratch(n);
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_plan_ = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
    backward_plan_ = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
    if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FFTW planning failed");
}

FftPair::~FftPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void FftPair::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw std::invalid_argument("FFT size mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

void FftPair::backward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw std::invalid_argument("FFT size mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

std::shared_ptr<const FftPair> fft_for(std::size_t n) {
    static std::mutex cache_mutex;
    static std::map<std::size_t, std::shared_ptr<const FftPair>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const FftPair>(n);
    return slot;
}

}  // namespace dbd
