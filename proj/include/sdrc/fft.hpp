#pragma once

// Thin wrapper over FFTW's complex DFT. Plans are created once per
// (length, direction) and cached; plan creation is serialized because FFTW's
// planner is not reentrant, while execution on caller-owned buffers is.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace sdrc::fft {

using complex = std::complex<double>;

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        // In-place plan: execute() always transforms a buffer onto itself.
        auto* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::vector<complex>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = PlanCache::instance().get(data.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// In-place forward DFT, X_k = sum_t x_t exp(-i 2 pi k t / n).
inline void forward(std::vector<complex>& data) { detail::execute(data, FFTW_FORWARD); }

/// In-place inverse DFT including the 1/n normalization.
inline void inverse(std::vector<complex>& data) {
    detail::execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

/// Forward DFT of a real sequence zero-padded to length n.
[[nodiscard]] inline std::vector<complex> forward_real(std::span<const double> x, std::size_t n) {
    std::vector<complex> data(n);
    for (std::size_t i = 0; i < x.size() && i < n; ++i) data[i] = x[i];
    forward(data);
    return data;
}

/// Inverse DFT keeping only the real part.
[[nodiscard]] inline std::vector<double> inverse_real(std::vector<complex> spectrum) {
    inverse(spectrum);
    std::vector<double> out(spectrum.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real();
    return out;
}

}  // namespace sdrc::fft
