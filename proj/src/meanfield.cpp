#include "vortexgas/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fft.hpp"
#include "vortexgas/field.hpp"
#include "vortexgas/parallel.hpp"

namespace vortexgas::meanfield {

namespace {

constexpr std::uint64_t kSaltRate = 0x72617465ULL;       // rate-experiment chains
constexpr std::uint64_t kSaltRateZero = 0x72617430ULL;   // beta = 0 calibration twins

void check_density_grid(int grid_n, std::size_t have, const char* who) {
    if (grid_n < 2 || have != static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n))
        throw Error("invalid-density", std::string(who) + ": grid size mismatch");
}

/// Signed wrapped frequency of DFT index q on an n-grid: q - n for q > n/2.
int wrapped_freq(int q, int n) { return (q > n / 2) ? q - n : q; }

}  // namespace

void validate_density(const DensityPair& d) {
    check_density_grid(d.grid_n, d.plus.size(), "DensityPair");
    check_density_grid(d.grid_n, d.minus.size(), "DensityPair");
    for (const auto* side : {&d.plus, &d.minus}) {
        KahanSum acc;
        for (double v : *side) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error("invalid-density", "DensityPair: densities must be finite and nonnegative");
            acc.add(v);
        }
        const double mean = acc.value() / static_cast<double>(side->size());
        if (std::abs(mean - 1.0) > 1e-8)
            throw Error("invalid-density", "DensityPair: densities must average to 1");
    }
}

double free_energy(const DensityPair& d, double beta, const kernels::KernelSpec& spec) {
    if (!(beta > 0.0)) throw Error("bad-range", "free_energy: beta must be positive");
    validate_density(d);
    spec.validate();
    const int n = d.grid_n;

    KahanSum entropy;
    for (std::size_t i = 0; i < d.plus.size(); ++i) {
        const double p = d.plus[i], m = d.minus[i];
        entropy.add((p > 0.0 ? p * std::log(p) : 0.0) + (m > 0.0 ? m * std::log(m) : 0.0));
    }
    const double entropy_term = entropy.value() / (static_cast<double>(n) * n) / beta;

    std::vector<std::complex<double>> f(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = d.plus[i] - d.minus[i];
    fft::transform_2d(f, n, -1);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);

    KahanSum interaction;
    for (int q1 = 0; q1 < n; ++q1) {
        const int k1 = wrapped_freq(q1, n);
        for (int q2 = 0; q2 < n; ++q2) {
            const int k2 = wrapped_freq(q2, n);
            if (k1 == 0 && k2 == 0) continue;
            if (std::abs(k1) > spec.cutoff || std::abs(k2) > spec.cutoff) continue;
            const double coeff_sq = std::norm(f[static_cast<std::size_t>(q1) * n + q2] * inv_n2);
            interaction.add(coeff_sq * kernels::multiplier(kernels::Kind::green, spec.mass, k1, k2));
        }
    }
    return entropy_term + interaction.value();
}

SinhPoissonCheck sinh_poisson_residual(const std::vector<double>& psi, int grid_n, double beta,
                                       double alpha) {
    if (!(alpha > 0.0)) throw Error("bad-range", "sinh_poisson_residual: alpha must be positive");
    check_density_grid(grid_n, psi.size(), "sinh_poisson_residual");
    const int n = grid_n;

    std::vector<std::complex<double>> hat(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) hat[i] = psi[i];
    fft::transform_2d(hat, n, -1);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    for (int q1 = 0; q1 < n; ++q1) {
        const int k1 = wrapped_freq(q1, n);
        for (int q2 = 0; q2 < n; ++q2) {
            const int k2 = wrapped_freq(q2, n);
            const double lap = -4.0 * kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            hat[static_cast<std::size_t>(q1) * n + q2] *= lap * inv_n2;
        }
    }
    fft::transform_2d(hat, n, +1);

    SinhPoissonCheck out;
    KahanSum resid, eneg, epos;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double r = hat[i].real() - std::sinh(beta * psi[i]) / alpha;
        resid.add(r * r);
        eneg.add(std::exp(-beta * psi[i]));
        epos.add(std::exp(beta * psi[i]));
    }
    out.pde_residual = std::sqrt(resid.value() * inv_n2);
    out.consistency_defect =
        std::abs(4.0 * alpha * alpha - (eneg.value() * inv_n2) * (epos.value() * inv_n2));
    return out;
}

// ---------------------------------------------------------------------------
// Rate experiment
// ---------------------------------------------------------------------------

namespace {

struct ChainResult {
    std::vector<long long> counts;        ///< bins^2
    std::vector<long long> block_counts;  ///< blocks_per_chain x bins^2
    long long total = 0;
    long long configs = 0;
    double acceptance = 0.0;
};

/// One chain's worth of recorded configurations, histogrammed into its own
/// block slots (fixed per chain, so the merged result is schedule-free).
ChainResult run_chain(const RateConfig& cfg, double beta, const kernels::KernelTable& kernel,
                      int n_vortices, int chain_idx, long long records, int blocks_per_chain,
                      std::uint64_t salt) {
    gibbs::EnsembleParams p;
    p.beta = beta;
    p.n_vortices = n_vortices;
    p.h = cfg.h;
    p.l = cfg.l;
    const std::uint64_t chain_seed = rng::mix_key(
        rng::mix_key(field::sub_seed(cfg.seed, salt), static_cast<std::uint64_t>(n_vortices)),
        static_cast<std::uint64_t>(chain_idx));
    gibbs::McmcChain chain(p, kernel, cfg.proposal_sigma, chain_seed);
    const long long burn =
        cfg.burn_in >= 0 ? cfg.burn_in : 10LL * n_vortices * cfg.bins;
    for (long long i = 0; i < burn; ++i) chain.step();

    gibbs::CorrelationAccumulator acc(p, cfg.bins, blocks_per_chain, records);
    for (long long r = 0; r < records; ++r) {
        for (int s = 0; s < cfg.thin_sweeps; ++s) chain.sweep();
        acc.add(chain.config());
    }
    const gibbs::CorrelationEstimate est = acc.finalize();
    ChainResult out;
    out.counts = est.counts;
    out.block_counts = est.block_counts;
    out.total = est.total_counts;
    out.configs = est.n_configs;
    out.acceptance = chain.acceptance_rate();
    return out;
}

/// Distance of the merged histogram at one (N, beta): chains run in parallel,
/// partial histograms merge in chain order.
struct MergedDistance {
    double value = 0.0;
    double stderr_ = 0.0;
    double acceptance = 0.0;
};

MergedDistance merged_distance(const RateConfig& cfg, double beta,
                               const kernels::KernelTable& kernel, int n_vortices,
                               std::uint64_t salt) {
    const int chains = std::max(1, cfg.chains);
    const int blocks_per_chain = std::max(2, cfg.n_blocks / chains);
    const long long records = cfg.samples_base / chains;
    if (records < blocks_per_chain)
        throw Error("insufficient-samples", "rate_experiment: too few records per chain");

    std::vector<ChainResult> results(static_cast<std::size_t>(chains));
    parallel_for(static_cast<std::size_t>(chains), [&](std::size_t c) {
        results[c] = run_chain(cfg, beta, kernel, n_vortices, static_cast<int>(c), records,
                               blocks_per_chain, salt);
    });

    gibbs::EnsembleParams p;
    p.beta = beta;
    p.n_vortices = n_vortices;
    p.h = cfg.h;
    p.l = cfg.l;
    gibbs::CorrelationEstimate merged;
    merged.params = p;
    merged.bins = cfg.bins;
    merged.n_blocks = chains * blocks_per_chain;
    const std::size_t cells = static_cast<std::size_t>(cfg.bins) * cfg.bins;
    merged.counts.assign(cells, 0);
    merged.block_counts.assign(static_cast<std::size_t>(merged.n_blocks) * cells, 0);
    double acc_rate = 0.0;
    for (int c = 0; c < chains; ++c) {
        const ChainResult& r = results[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < cells; ++i) merged.counts[i] += r.counts[i];
        std::copy(r.block_counts.begin(), r.block_counts.end(),
                  merged.block_counts.begin() +
                      static_cast<std::size_t>(c) * blocks_per_chain * cells);
        merged.total_counts += r.total;
        merged.n_configs += r.configs;
        acc_rate += r.acceptance / chains;
    }
    merged.density.resize(cells);
    const double norm = static_cast<double>(cells) / static_cast<double>(merged.total_counts);
    for (std::size_t i = 0; i < cells; ++i)
        merged.density[i] = static_cast<double>(merged.counts[i]) * norm;

    const gibbs::DistanceResult d = gibbs::lp_distance(merged, cfg.p);
    return {d.distance.value, d.distance.stderr_, acc_rate};
}

}  // namespace

RateSeries rate_experiment(const RateConfig& cfg, const kernels::KernelTable& kernel) {
    if (cfg.n_grid.size() < 4)
        throw Error("bad-range", "rate_experiment: need at least 4 ensemble sizes");
    for (int n : cfg.n_grid)
        if (n < 2 || n % 2 != 0) throw Error("bad-range", "rate_experiment: sizes must be even");
    if (!(cfg.beta >= 0.0)) throw Error("bad-range", "rate_experiment: beta must be >= 0");

    RateSeries series;
    for (int n : cfg.n_grid) {
        const MergedDistance main = merged_distance(cfg, cfg.beta, kernel, n, kSaltRate);
        const MergedDistance zero = merged_distance(cfg, 0.0, kernel, n, kSaltRateZero);
        RatePoint pt;
        pt.n = n;
        pt.raw = main.value;
        pt.raw_stderr = main.stderr_;
        pt.floor = zero.value;
        pt.floor_stderr = zero.stderr_;
        pt.acceptance = main.acceptance;
        const double sig_sq = pt.raw * pt.raw - pt.floor * pt.floor;
        if (sig_sq > 0.0) {
            pt.signal = std::sqrt(sig_sq);
            pt.signal_stderr = std::sqrt(pt.raw * pt.raw * pt.raw_stderr * pt.raw_stderr +
                                         pt.floor * pt.floor * pt.floor_stderr * pt.floor_stderr) /
                               pt.signal;
        } else {
            pt.signal = 0.0;
            pt.signal_stderr = std::sqrt(pt.raw_stderr * pt.raw_stderr +
                                         pt.floor_stderr * pt.floor_stderr);
        }
        series.points.push_back(pt);
    }

    const RatePoint& last = series.points.back();
    series.noise_dominated = last.signal < 2.0 * last.floor;

    // Weighted fit in log-log coordinates; only points with a positive
    // subtracted signal can enter.
    std::vector<double> x, y, sigma, y_corr;
    for (const RatePoint& pt : series.points) {
        if (pt.signal <= 0.0) continue;
        x.push_back(std::log(static_cast<double>(pt.n)));
        y.push_back(std::log(pt.signal));
        sigma.push_back(std::max(1e-12, pt.signal_stderr / pt.signal));
        y_corr.push_back(std::log(pt.signal) -
                         1.5 * std::log(std::log(static_cast<double>(pt.n))));
    }
    if (x.size() >= 2) {
        series.fit = fit_line_weighted(x, y, sigma);
        if (cfg.loglog_correction) series.fit_corrected = fit_line_weighted(x, y_corr, sigma);
    }
    return series;
}

}  // namespace vortexgas::meanfield
