#include "vortexgas/common.hpp"
#include "vortexgas/parallel.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace vortexgas {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 2) throw Error("invalid-spec", "fit_line needs >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) sx += x[i], sy += y[i];
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw Error("invalid-spec", "fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ssr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - f.intercept - f.slope * x[i];
            ssr += r * r;
        }
        double s2 = ssr / double(n - 2);
        f.slope_stderr = std::sqrt(s2 / sxx);
        f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

LinearFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma) {
    std::size_t n = x.size();
    if (n != y.size() || n != sigma.size() || n < 2)
        throw Error("invalid-spec", "fit_line_weighted needs matched arrays, >= 2 points");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0)) throw Error("invalid-spec", "fit_line_weighted: sigma <= 0");
        double w = 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    double delta = sw * swxx - swx * swx;
    if (delta <= 0) throw Error("invalid-spec", "fit_line_weighted: degenerate abscissae");
    LinearFit f;
    f.slope = (sw * swxy - swx * swy) / delta;
    f.intercept = (swxx * swy - swx * swxy) / delta;
    f.slope_stderr = std::sqrt(sw / delta);
    f.intercept_stderr = std::sqrt(swxx / delta);
    return f;
}

int thread_budget() {
    // Re-read on every call so a cap set mid-process takes effect; the cost
    // is one getenv per parallel_for launch.
    if (const char* env = std::getenv("VORTEXGAS_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return int(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void parallel_for(long long n, const std::function<void(long long)>& fn) {
    if (n <= 0) return;
    int workers = std::min<long long>(thread_budget(), n);
    if (workers <= 1) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    auto run_block = [&](int t) {
        long long lo = n * t / workers;
        long long hi = n * (t + 1) / workers;
        for (long long i = lo; i < hi; ++i) fn(i);
    };
    for (int t = 1; t < workers; ++t) pool.emplace_back(run_block, t);
    run_block(0);
    for (auto& th : pool) th.join();
}

}  // namespace vortexgas
