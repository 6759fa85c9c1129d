#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace dbd {

// Unnormalized in-place FFTW transform pair for one size. Plans are made with
// FFTW_ESTIMATE so the chosen algorithm, and therefore every output bit, is
// reproducible. Execution is thread-safe; instances come from a shared cache.
class FftPair {
public:
    explicit FftPair(std::size_t n);
    ~FftPair();
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;

    std::size_t size() const { return n_; }
    void forward(std::span<std::complex<double>> data) const;   // e^{-2 pi i jk/N}
    void backward(std::span<std::complex<double>> data) const;  // e^{+2 pi i jk/N}

private:
    std::size_t n_;
    void* forward_plan_;
    void* backward_plan_;
};

std::shared_ptr<const FftPair> fft_for(std::size_t n);

}  // namespace dbd
