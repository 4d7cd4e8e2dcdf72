#pragma once

/// Thin wrapper over FFTW3 for complex transforms of arbitrary length.
/// Plans are cached per (size, direction) and shared; execution on
/// caller-owned buffers is thread safe.

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "borscat/constants.hpp"

namespace borscat {

namespace detail {

class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache c;
        return c;
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        const auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> buf(n);
        fftw_plan p = fftw_plan_dft_1d(
            static_cast<int>(n),
            reinterpret_cast<fftw_complex*>(buf.data()),
            reinterpret_cast<fftw_complex*>(buf.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

} // namespace detail

/// In-place DFT, unnormalized: X_k = sum_n x_n exp(sign * j 2 pi k n / N).
inline void fft_inplace(std::vector<cplx>& x, int sign) {
    if (x.empty()) return;
    fftw_plan p = detail::FftPlanCache::instance().get(
        x.size(), sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(x.data()),
                     reinterpret_cast<fftw_complex*>(x.data()));
}

inline std::vector<cplx> fft(const std::vector<cplx>& x, int sign) {
    std::vector<cplx> y = x;
    fft_inplace(y, sign);
    return y;
}

} // namespace borscat
