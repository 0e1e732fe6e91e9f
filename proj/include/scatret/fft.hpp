#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace scatret::fft {

namespace detail {

// Plans are created once per (height, width, sign) and reused. FFTW_ESTIMATE
// keeps planning deterministic; FFTW_UNALIGNED lets plans execute on plain
// std::vector storage.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int height, int width, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_tuple(height, width, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(height) * width);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan =
            fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// In-place unnormalized 2D DFT of a row-major height x width complex grid.
inline void forward(int height, int width, std::complex<double>* data) {
    fftw_plan plan = detail::PlanCache::instance().get(height, width, FFTW_FORWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

/// In-place unnormalized inverse 2D DFT (no 1/N scaling).
inline void inverse(int height, int width, std::complex<double>* data) {
    fftw_plan plan = detail::PlanCache::instance().get(height, width, FFTW_BACKWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace scatret::fft
