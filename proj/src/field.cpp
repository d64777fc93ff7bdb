#include "vortexgas/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "fft.hpp"
#include "vortexgas/io.hpp"
#include "vortexgas/parallel.hpp"

namespace vortexgas::field {

namespace {

// Stream salts: every named consumer of a run seed draws from its own family.
constexpr std::uint64_t kSaltModes = 0x6d6f6465ULL;    // per-mode coefficient draws
constexpr std::uint64_t kSaltNormMc = 0x6e726d32ULL;   // coefficient-space norm samples

/// Draw the canonical coefficient of half mode `idx`: sqrt(sigma^2/2) (a + ib)
/// with a, b standard normal, so E|c|^2 = sigma^2 and the full-plane pair
/// (c, conj c) carries total variance 2 sigma^2 = the mode pair's share.
std::complex<double> draw_coeff(std::uint64_t mode_base, std::size_t idx, double variance) {
    rng::Stream s(mode_base, static_cast<std::uint64_t>(idx));
    double a = 0.0, b = 0.0;
    s.next_normal_pair(a, b);
    const double amp = std::sqrt(0.5 * variance);
    return {amp * a, amp * b};
}

/// Sum of 2 sigma_k^2 E_k over half modes for one norm sample (law of ||F||_2^2).
double draw_norm_sq(const kernels::KernelSpec& spec, std::uint64_t sample_key) {
    rng::Stream s(sample_key, 0);
    KahanSum acc;
    for_half_modes(spec.cutoff, [&](std::size_t, int k1, int k2) {
        const double var = kernels::multiplier(kernels::Kind::smooth, spec.mass, k1, k2);
        acc.add(2.0 * var * s.next_exp());
    });
    return acc.value();
}

}  // namespace

std::size_t half_mode_count(int cutoff) {
    const auto k = static_cast<std::size_t>(cutoff);
    return k + k * (2 * k + 1);
}

double mode_variance(const kernels::KernelSpec& spec, int k1, int k2) {
    return kernels::multiplier(kernels::Kind::smooth, spec.mass, k1, k2);
}

std::vector<std::complex<double>> sample_coeffs(const kernels::KernelSpec& spec,
                                                std::uint64_t seed) {
    spec.validate();
    const std::uint64_t base = rng::mix_key(sub_seed(seed, kSaltModes), 0);
    std::vector<std::complex<double>> coeffs(half_mode_count(spec.cutoff));
    for_half_modes(spec.cutoff, [&](std::size_t idx, int k1, int k2) {
        coeffs[idx] = draw_coeff(base, idx, mode_variance(spec, k1, k2));
    });
    return coeffs;
}

FieldSample sample_field(const kernels::KernelSpec& spec, std::uint64_t seed) {
    spec.validate();
    FieldSample out;
    out.spec = spec;
    out.seed = seed;
    out.coeffs = sample_coeffs(spec, seed);

    const int n = spec.grid_n;
    if (n < 2 * spec.cutoff + 2)
        throw Error("invalid-spec", "sample_field: grid_n must exceed twice the cutoff");
    std::vector<std::complex<double>> modes(static_cast<std::size_t>(n) * n);
    for_half_modes(spec.cutoff, [&](std::size_t idx, int k1, int k2) {
        const int q1 = ((k1 % n) + n) % n;
        const int q2 = ((k2 % n) + n) % n;
        const int p1 = (n - q1) % n;
        const int p2 = (n - q2) % n;
        modes[static_cast<std::size_t>(q1) * n + q2] = out.coeffs[idx];
        modes[static_cast<std::size_t>(p1) * n + p2] = std::conj(out.coeffs[idx]);
    });
    fft::transform_2d(modes, n, +1);
    out.grid.resize(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) out.grid[i] = modes[i].real();
    return out;
}

CoarseSample sample_field_coarse(const kernels::KernelSpec& spec, int eval_n,
                                 std::uint64_t seed) {
    spec.validate();
    if (eval_n < 2) throw Error("invalid-spec", "sample_field_coarse: eval_n must be >= 2");
    const std::uint64_t base = rng::mix_key(sub_seed(seed, kSaltModes), 0);

    CoarseSample out;
    out.eval_n = eval_n;
    std::vector<std::complex<double>> folded(static_cast<std::size_t>(eval_n) * eval_n);
    for_half_modes(spec.cutoff, [&](std::size_t idx, int k1, int k2) {
        const std::complex<double> c = draw_coeff(base, idx, mode_variance(spec, k1, k2));
        const int q1 = ((k1 % eval_n) + eval_n) % eval_n;
        const int q2 = ((k2 % eval_n) + eval_n) % eval_n;
        const int p1 = (eval_n - q1) % eval_n;
        const int p2 = (eval_n - q2) % eval_n;
        folded[static_cast<std::size_t>(q1) * eval_n + q2] += c;
        folded[static_cast<std::size_t>(p1) * eval_n + p2] += std::conj(c);
    });
    fft::transform_2d(folded, eval_n, +1);
    out.grid.resize(folded.size());
    // The grid L2 (not the Parseval sum over all modes): exponential averages
    // and the Gaussian weight must share one measure, or their leading-order
    // cancellation breaks once modes fold.
    KahanSum l2;
    for (std::size_t i = 0; i < folded.size(); ++i) {
        out.grid[i] = folded[i].real();
        l2.add(out.grid[i] * out.grid[i]);
    }
    out.l2_sq = l2.value() / static_cast<double>(out.grid.size());
    return out;
}

double FieldSample::l2_sq_parseval() const {
    KahanSum acc;
    for (const auto& c : coeffs) acc.add(2.0 * std::norm(c));
    return acc.value();
}

double FieldSample::grid_mean() const {
    KahanSum acc;
    for (double v : grid) acc.add(v);
    return grid.empty() ? 0.0 : acc.value() / static_cast<double>(grid.size());
}

double lp_norm(const FieldSample& sample, double p) {
    if (!(p >= 1.0)) throw Error("bad-range", "lp_norm: p must be >= 1");
    if (sample.grid.empty()) throw Error("invalid-spec", "lp_norm: sample has no grid values");
    KahanSum acc;
    if (p == 2.0) {
        for (double v : sample.grid) acc.add(v * v);
    } else {
        for (double v : sample.grid) acc.add(std::pow(std::abs(v), p));
    }
    const double mean = acc.value() / static_cast<double>(sample.grid.size());
    return std::pow(mean, 1.0 / p);
}

std::complex<double> e_factor(const FieldSample& sample, int sign, double beta,
                              int n_vortices) {
    if (sign != 1 && sign != -1) throw Error("bad-range", "e_factor: sign must be +-1");
    if (!(beta >= 0.0) || n_vortices < 2 || n_vortices % 2 != 0)
        throw Error("bad-range", "e_factor: need beta >= 0 and even n_vortices >= 2");
    if (sample.grid.empty()) throw Error("invalid-spec", "e_factor: sample has no grid values");
    const double s = sign * std::sqrt(beta / n_vortices);
    KahanSum re, im;
    for (double v : sample.grid) {
        re.add(std::cos(s * v));
        im.add(std::sin(s * v));
    }
    const double inv = 1.0 / static_cast<double>(sample.grid.size());
    return {re.value() * inv, im.value() * inv};
}

double gauss_weight_from_l2(double l2_sq, double beta, int n_vortices) {
    if (!(beta >= 0.0) || n_vortices < 1)
        throw Error("bad-range", "gauss_weight: need beta >= 0 and n_vortices >= 1");
    return std::exp(-0.5 * beta / n_vortices * l2_sq);
}

double gauss_weight(const FieldSample& sample, double beta, int n_vortices) {
    const double l2 = lp_norm(sample, 2.0);
    return gauss_weight_from_l2(l2 * l2, beta, n_vortices);
}

double analytic_exp_moment(double alpha, const kernels::KernelSpec& spec) {
    spec.validate();
    KahanSum acc;
    bool ok = true;
    for_half_modes(spec.cutoff, [&](std::size_t, int k1, int k2) {
        const double t = 2.0 * alpha * mode_variance(spec, k1, k2);
        if (t <= -1.0) ok = false;
        if (ok) acc.add(std::log1p(t));
    });
    if (!ok)
        throw Error("bad-range", "analytic_exp_moment: 1 + 2 alpha sigma^2 must stay positive");
    return std::exp(-acc.value());
}

namespace {

/// Fill per-sample values in parallel (each sample keyed by its index, so the
/// result is independent of the worker count), then reduce in index order.
template <class Fn>
Estimate mc_reduce(long long n_samples, const char* what, Fn&& per_sample) {
    if (n_samples < 2) throw Error("insufficient-samples", std::string(what) + ": need at least 2 samples");
    std::vector<double> values(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples),
                 [&](std::size_t i) { values[i] = per_sample(i); });
    MeanAccumulator acc;
    for (double v : values) acc.add(v);
    return acc.estimate("mc");
}

}  // namespace

Estimate norm_sq_mc(const kernels::KernelSpec& spec, long long n_samples, std::uint64_t seed) {
    spec.validate();
    const std::uint64_t base = sub_seed(seed, kSaltNormMc);
    return mc_reduce(n_samples, "norm_sq_mc", [&](std::size_t i) {
        return draw_norm_sq(spec, rng::mix_key(base, static_cast<std::uint64_t>(i)));
    });
}

Estimate exp_moment_mc(double alpha, const kernels::KernelSpec& spec, long long n_samples,
                       std::uint64_t seed) {
    spec.validate();
    const std::uint64_t base = sub_seed(seed, kSaltNormMc);
    return mc_reduce(n_samples, "exp_moment_mc", [&](std::size_t i) {
        return std::exp(-alpha * draw_norm_sq(spec, rng::mix_key(base, static_cast<std::uint64_t>(i))));
    });
}

DiffCheckRow exp_moment_diff_check(double alpha, double alpha2,
                                   const kernels::KernelSpec& spec, long long n_samples,
                                   std::uint64_t seed) {
    spec.validate();
    if (!(alpha2 > alpha) || !(alpha > 0.0))
        throw Error("bad-range", "exp_moment_diff_check: need 0 < alpha < alpha2");
    DiffCheckRow row;
    row.mass = spec.mass;
    row.difference = analytic_exp_moment(alpha, spec) - analytic_exp_moment(alpha2, spec);
    row.scale = (alpha2 - alpha) * std::pow(spec.mass, -alpha / (2.0 * kPi)) * std::log(spec.mass);
    row.ratio = row.difference / row.scale;
    if (n_samples > 0) {
        // Paired draws: the same norm sample feeds both alphas, so the MC
        // difference shares the analytic difference's smallness.
        const std::uint64_t base = sub_seed(seed, kSaltNormMc);
        row.mc_difference = mc_reduce(n_samples, "exp_moment_diff_check", [&](std::size_t i) {
            const double s = draw_norm_sq(spec, rng::mix_key(base, static_cast<std::uint64_t>(i)));
            return std::exp(-alpha * s) - std::exp(-alpha2 * s);
        });
    }
    return row;
}

void write_coeffs_csv(std::ostream& os, const FieldSample& sample) {
    io::CsvWriter csv(os, {"k1", "k2", "re", "im"});
    for_half_modes(sample.spec.cutoff, [&](std::size_t idx, int k1, int k2) {
        csv.row({static_cast<double>(k1), static_cast<double>(k2), sample.coeffs[idx].real(),
                 sample.coeffs[idx].imag()});
    });
}

}  // namespace vortexgas::field
