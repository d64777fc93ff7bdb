#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexgas {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Error with a stable machine-readable code ("singular-diagonal", "invalid-spec", ...).
/// The code is what tests and callers dispatch on; the message carries context.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

/// Point or displacement on the unit torus [0,1)^2.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double wrap_unit(double t) {
    double w = t - std::floor(t);
    // floor can round w to 1.0 for tiny negative t
    return (w >= 1.0) ? w - 1.0 : w;
}

inline Vec2 wrap_point(Vec2 p) { return {wrap_unit(p.x), wrap_unit(p.y)}; }

/// Wrap a displacement to the symmetric fundamental cell [-1/2, 1/2)^2.
inline Vec2 wrap_disp(Vec2 d) {
    double x = d.x - std::round(d.x);
    double y = d.y - std::round(d.y);
    return {x, y};
}

inline double torus_dist(Vec2 a, Vec2 b) {
    Vec2 d = wrap_disp({a.x - b.x, a.y - b.y});
    return std::sqrt(d.x * d.x + d.y * d.y);
}

/// Monte Carlo (or quadrature) result carrier: value, standard error, sample count.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long long n_samples = 0;
    std::string method;
};

/// Compensated (Kahan) accumulator; fixed summation order gives reproducible sums.
class KahanSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// Mean and standard error of a sample set accumulated in a fixed order.
struct MeanAccumulator {
    KahanSum sum, sum_sq;
    long long n = 0;
    void add(double x) {
        sum.add(x);
        sum_sq.add(x * x);
        ++n;
    }
    double mean() const { return n > 0 ? sum.value() / double(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        double m = mean();
        double v = sum_sq.value() / double(n) - m * m;
        return v > 0.0 ? v * double(n) / double(n - 1) : 0.0;
    }
    double stderr_of_mean() const { return n > 0 ? std::sqrt(variance() / double(n)) : 0.0; }
    Estimate estimate(const std::string& method) const {
        return {mean(), stderr_of_mean(), n, method};
    }
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
};

/// Ordinary least squares y = a + b x; slope stderr from residual variance.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Weighted least squares with per-point standard deviations sigma_i.
/// Slope stderr comes from the weight matrix (assumes sigmas are trusted).
LinearFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma);

/// Shortest round-trip decimal form of a double ("1e-10" style), locale-free.
std::string format_double(double v);

}  // namespace vortexgas
