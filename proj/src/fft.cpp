#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "vortexgas/common.hpp"

namespace vortexgas::fft {

namespace {

/// One cached FFTW plan with its own aligned buffer (planned in-place).
struct PlanSlot {
    fftw_plan plan = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t count = 0;
};

std::mutex g_mutex;
std::map<std::pair<int, int>, PlanSlot>& plan_cache() {
    static std::map<std::pair<int, int>, PlanSlot> cache;
    return cache;
}

}  // namespace

void transform_2d(std::vector<std::complex<double>>& data, int n, int sign) {
    if (n < 1 || data.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw Error("invalid-spec", "transform_2d: grid size mismatch");
    std::lock_guard<std::mutex> lock(g_mutex);
    auto& slot = plan_cache()[{n, sign}];
    if (slot.plan == nullptr) {
        slot.count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        slot.buf = fftw_alloc_complex(slot.count);
        if (slot.buf == nullptr) throw Error("invalid-spec", "transform_2d: allocation failed");
        // FFTW_ESTIMATE keeps planning deterministic (no timing-dependent choices).
        slot.plan = fftw_plan_dft_2d(n, n, slot.buf, slot.buf,
                                     sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
        if (slot.plan == nullptr) throw Error("invalid-spec", "transform_2d: planning failed");
    }
    std::memcpy(slot.buf, data.data(), slot.count * sizeof(fftw_complex));
    fftw_execute(slot.plan);
    std::memcpy(data.data(), slot.buf, slot.count * sizeof(fftw_complex));
}

}  // namespace vortexgas::fft
