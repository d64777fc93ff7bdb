#include "vortexgas/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vortexgas/field.hpp"
#include "vortexgas/io.hpp"
#include "vortexgas/parallel.hpp"

namespace vortexgas::gibbs {

namespace {

constexpr std::uint64_t kSaltPartition = 0x70617274ULL;  // uniform partition samples
constexpr std::uint64_t kSaltChain = 0x6368616eULL;      // chain init + proposals

/// Pair interaction sum via table lookups; "singular-diagonal" from the
/// table (a pair below the regularisation scale) surfaces as the configured
/// coincidence error.
double pair_sum(const VortexConfig& cfg, const kernels::KernelTable& kernel) {
    KahanSum acc;
    try {
        const auto& p = cfg.plus;
        const auto& m = cfg.minus;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j)
                acc.add(kernel.eval({p[i].x - p[j].x, p[i].y - p[j].y}));
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i + 1; j < m.size(); ++j)
                acc.add(kernel.eval({m[i].x - m[j].x, m[i].y - m[j].y}));
        for (const auto& a : p)
            for (const auto& b : m)
                acc.add(-kernel.eval({a.x - b.x, a.y - b.y}));
    } catch (const Error& e) {
        if (e.code() == "singular-diagonal")
            throw Error("coincident-vortices", "hamiltonian: pair distance underflows the regularisation scale");
        throw;
    }
    return acc.value();
}

}  // namespace

void EnsembleParams::validate() const {
    if (n_vortices < 2 || n_vortices % 2 != 0)
        throw Error("invalid-spec", "EnsembleParams: n_vortices must be even and >= 2");
    if (!(beta >= 0.0) || !(beta < 4.0 * kPi * n_vortices))
        throw Error("invalid-spec", "EnsembleParams: beta must lie in [0, 4 pi N)");
    if (h < 0 || l < 0 || h > n_vortices / 2 || l > n_vortices / 2 || h + l > n_vortices)
        throw Error("invalid-spec", "EnsembleParams: tagged counts exceed the ensemble");
}

double hamiltonian(const VortexConfig& cfg, const kernels::KernelTable& kernel) {
    const double h = pair_sum(cfg, kernel);
    if (!std::isfinite(h)) throw Error("non-finite-energy", "hamiltonian: non-finite pair sum");
    return h;
}

EnergySplit hamiltonian_split(const VortexConfig& cfg, const kernels::KernelTable& smooth,
                              const kernels::KernelTable& yukawa) {
    EnergySplit out;
    out.smooth = hamiltonian(cfg, smooth);
    out.yukawa = hamiltonian(cfg, yukawa);
    return out;
}

Estimate partition_estimate(const EnsembleParams& p, const kernels::KernelTable& kernel,
                            long long n_samples, std::uint64_t seed) {
    p.validate();
    if (n_samples < 2) throw Error("insufficient-samples", "partition_estimate: need >= 2 samples");
    const std::uint64_t base = field::sub_seed(seed, kSaltPartition);
    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
        rng::Stream s(base, static_cast<std::uint64_t>(i));
        for (;;) {
            VortexConfig cfg;
            cfg.plus.resize(static_cast<std::size_t>(p.n_vortices / 2));
            cfg.minus.resize(static_cast<std::size_t>(p.n_vortices / 2));
            for (auto& v : cfg.plus) v = {s.next_unit(), s.next_unit()};
            for (auto& v : cfg.minus) v = {s.next_unit(), s.next_unit()};
            try {
                vals[i] = std::exp(-p.beta / p.n_vortices * hamiltonian(cfg, kernel));
                break;
            } catch (const Error& e) {
                // a coincident uniform draw has probability zero; redraw
                if (e.code() != "coincident-vortices") throw;
            }
        }
    });
    MeanAccumulator acc;
    for (double v : vals) acc.add(v);
    return acc.estimate("uniform-mc");
}

McmcChain::McmcChain(const EnsembleParams& p, const kernels::KernelTable& kernel,
                     double proposal_sigma, std::uint64_t seed)
    : params_(p), kernel_(&kernel), sigma_(proposal_sigma),
      rng_(field::sub_seed(seed, kSaltChain), 0) {
    params_.validate();
    if (!(proposal_sigma > 0.0) || !(proposal_sigma < 0.5))
        throw Error("invalid-spec", "McmcChain: proposal_sigma must lie in (0, 0.5)");
    cfg_.plus.resize(static_cast<std::size_t>(params_.n_vortices / 2));
    cfg_.minus.resize(static_cast<std::size_t>(params_.n_vortices / 2));
    for (auto& v : cfg_.plus) v = {rng_.next_unit(), rng_.next_unit()};
    for (auto& v : cfg_.minus) v = {rng_.next_unit(), rng_.next_unit()};
}

double McmcChain::move_delta(int idx, int sign, Vec2 from, Vec2 to) const {
    const int half = params_.n_vortices / 2;
    KahanSum acc;
    auto contrib = [&](const Vec2& other, int other_sign) {
        const double w = static_cast<double>(sign * other_sign);
        acc.add(w * (kernel_->eval({to.x - other.x, to.y - other.y}) -
                     kernel_->eval({from.x - other.x, from.y - other.y})));
    };
    for (int j = 0; j < half; ++j)
        if (sign != +1 || j != idx) contrib(cfg_.plus[static_cast<std::size_t>(j)], +1);
    for (int j = 0; j < half; ++j)
        if (sign != -1 || j != idx) contrib(cfg_.minus[static_cast<std::size_t>(j)], -1);
    return acc.value();
}

void McmcChain::step() {
    // Fixed draw budget per proposal (4 stream values) regardless of the
    // accept/reject path, so chains replay identically.
    const int pick = static_cast<int>(rng_.next_u64() % static_cast<std::uint64_t>(params_.n_vortices));
    double a = 0.0, b = 0.0;
    rng_.next_normal_pair(a, b);
    const double u = rng_.next_unit();
    ++steps_;

    const int half = params_.n_vortices / 2;
    const int sign = pick < half ? +1 : -1;
    const int idx = pick < half ? pick : pick - half;
    Vec2& pos = sign > 0 ? cfg_.plus[static_cast<std::size_t>(idx)]
                         : cfg_.minus[static_cast<std::size_t>(idx)];
    const Vec2 from = pos;
    const Vec2 to = wrap_point({from.x + sigma_ * a, from.y + sigma_ * b});

    if (params_.beta == 0.0) {
        // Uniform target: every in-torus proposal is accepted.
        pos = to;
        ++accepted_;
        return;
    }
    double delta = 0.0;
    try {
        delta = move_delta(idx, sign, from, to);
    } catch (const Error& e) {
        if (e.code() == "singular-diagonal" || e.code() == "coincident-vortices") return;  // reject
        throw;
    }
    if (!std::isfinite(delta)) throw Error("non-finite-energy", "McmcChain: non-finite energy change");
    if (std::log(u) < -params_.beta / params_.n_vortices * delta) {
        pos = to;
        ++accepted_;
    }
}

std::vector<VortexConfig> mcmc_chain(const EnsembleParams& p, const kernels::KernelTable& kernel,
                                     long long n_steps, double proposal_sigma, std::uint64_t seed,
                                     long long burn_in, long long thinning) {
    if (burn_in < 0) burn_in = 10LL * p.n_vortices * 8;
    if (thinning <= 0) thinning = p.n_vortices;
    McmcChain chain(p, kernel, proposal_sigma, seed);
    for (long long i = 0; i < burn_in; ++i) chain.step();
    std::vector<VortexConfig> kept;
    kept.reserve(static_cast<std::size_t>(n_steps / thinning));
    for (long long i = 1; i <= n_steps; ++i) {
        chain.step();
        if (i % thinning == 0) kept.push_back(chain.config());
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Correlation histograms
// ---------------------------------------------------------------------------

CorrelationAccumulator::CorrelationAccumulator(const EnsembleParams& p, int bins, int n_blocks,
                                               long long expected_configs)
    : expected_(expected_configs) {
    p.validate();
    if (bins < 2) throw Error("invalid-spec", "CorrelationAccumulator: need >= 2 bins per axis");
    if (n_blocks < 2) throw Error("invalid-spec", "CorrelationAccumulator: need >= 2 blocks");
    if (expected_configs < 1)
        throw Error("invalid-spec", "CorrelationAccumulator: expected_configs must be positive");
    const int hl = p.h + p.l;
    if (hl < 1 || hl > 2)
        throw Error("invalid-spec", "CorrelationAccumulator: desk-scale harness covers h + l in {1, 2}");
    est_.params = p;
    est_.bins = bins;
    est_.n_blocks = n_blocks;
    est_.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
    est_.block_counts.assign(static_cast<std::size_t>(n_blocks) * bins * bins, 0);
}

void CorrelationAccumulator::add(const VortexConfig& cfg) {
    const int bins = est_.bins;
    const long long blk =
        std::min<long long>(est_.n_blocks - 1, est_.n_configs * est_.n_blocks / expected_);
    long long* block = est_.block_counts.data() + blk * bins * bins;
    long long added = 0;
    auto deposit = [&](double dx, double dy) {
        const double wx = wrap_unit(dx);
        const double wy = wrap_unit(dy);
        const int bi = std::min(bins - 1, static_cast<int>(wx * bins));
        const int bj = std::min(bins - 1, static_cast<int>(wy * bins));
        const std::size_t at = static_cast<std::size_t>(bi) * bins + bj;
        est_.counts[at]++;
        block[at]++;
        ++added;
    };
    const int h = est_.params.h, l = est_.params.l;
    if (h == 1 && l == 1) {
        for (const auto& y : cfg.plus)
            for (const auto& z : cfg.minus) deposit(y.x - z.x, y.y - z.y);
    } else if (h + l == 2) {  // same-sign pair separation
        const auto& v = (h == 2) ? cfg.plus : cfg.minus;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                if (i != j) deposit(v[i].x - v[j].x, v[i].y - v[j].y);
    } else {  // one-point density null check
        const auto& v = (h == 1) ? cfg.plus : cfg.minus;
        for (const auto& y : v) deposit(y.x, y.y);
    }
    est_.total_counts += added;
    est_.n_configs++;
}

CorrelationEstimate CorrelationAccumulator::finalize() const {
    CorrelationEstimate out = est_;
    const long long cells = static_cast<long long>(out.bins) * out.bins;
    if (out.n_configs < 1 || out.total_counts < 10 * cells)
        throw Error("insufficient-samples",
                    "correlation_estimate: effective sample size below 10 per bin");
    out.density.resize(static_cast<std::size_t>(cells));
    const double norm = static_cast<double>(cells) / static_cast<double>(out.total_counts);
    for (long long c = 0; c < cells; ++c)
        out.density[static_cast<std::size_t>(c)] =
            static_cast<double>(out.counts[static_cast<std::size_t>(c)]) * norm;
    return out;
}

CorrelationEstimate correlation_estimate(const std::vector<VortexConfig>& chain,
                                         const EnsembleParams& p, int bins) {
    if (chain.empty()) throw Error("insufficient-samples", "correlation_estimate: empty chain");
    CorrelationAccumulator acc(p, bins, 16, static_cast<long long>(chain.size()));
    for (const auto& cfg : chain) acc.add(cfg);
    return acc.finalize();
}

double CorrelationEstimate::value(int bi, int bj) const {
    return density[static_cast<std::size_t>(bi) * bins + bj];
}

double CorrelationEstimate::stderr_bin(int bi, int bj) const {
    const std::size_t at = static_cast<std::size_t>(bi) * bins + bj;
    const long long cells = static_cast<long long>(bins) * bins;
    // Jackknife over blocks on the normalised bin value.
    std::vector<double> leave(static_cast<std::size_t>(n_blocks));
    for (int b = 0; b < n_blocks; ++b) {
        long long cnt = counts[at] - block_counts[static_cast<std::size_t>(b) * cells + at];
        long long tot = 0;
        for (long long c = 0; c < cells; ++c)
            tot += block_counts[static_cast<std::size_t>(b) * cells + c];
        const long long rest = total_counts - tot;
        leave[static_cast<std::size_t>(b)] =
            rest > 0 ? static_cast<double>(cnt) * cells / static_cast<double>(rest) : 0.0;
    }
    double mean = 0.0;
    for (double v : leave) mean += v;
    mean /= static_cast<double>(n_blocks);
    double ss = 0.0;
    for (double v : leave) ss += (v - mean) * (v - mean);
    return std::sqrt(ss * static_cast<double>(n_blocks - 1) / static_cast<double>(n_blocks));
}

DistanceResult lp_distance(const CorrelationEstimate& est, double p) {
    if (!(p >= 1.0)) throw Error("bad-range", "lp_distance: p must be >= 1");
    if (est.density.empty()) throw Error("invalid-spec", "lp_distance: estimate not finalised");
    const long long cells = static_cast<long long>(est.bins) * est.bins;

    auto distance_from = [&](const std::vector<double>& dens) {
        KahanSum acc;
        for (double v : dens) acc.add(std::pow(std::abs(v - 1.0), p));
        return std::pow(acc.value() / static_cast<double>(cells), 1.0 / p);
    };

    DistanceResult out;
    out.distance.value = distance_from(est.density);
    out.distance.n_samples = est.n_configs;
    out.distance.method = "histogram";
    out.noise_floor_hint =
        std::sqrt(static_cast<double>(cells) / static_cast<double>(est.total_counts));

    // Jackknife over blocks.
    std::vector<double> leave(static_cast<std::size_t>(est.n_blocks));
    std::vector<double> dens(static_cast<std::size_t>(cells));
    for (int b = 0; b < est.n_blocks; ++b) {
        long long tot = 0;
        for (long long c = 0; c < cells; ++c)
            tot += est.block_counts[static_cast<std::size_t>(b) * cells + c];
        const long long rest = est.total_counts - tot;
        for (long long c = 0; c < cells; ++c) {
            const long long cnt = est.counts[static_cast<std::size_t>(c)] -
                                  est.block_counts[static_cast<std::size_t>(b) * cells + c];
            dens[static_cast<std::size_t>(c)] =
                rest > 0 ? static_cast<double>(cnt) * cells / static_cast<double>(rest) : 0.0;
        }
        leave[static_cast<std::size_t>(b)] = distance_from(dens);
    }
    double mean = 0.0;
    for (double v : leave) mean += v;
    mean /= static_cast<double>(est.n_blocks);
    double ss = 0.0;
    for (double v : leave) ss += (v - mean) * (v - mean);
    out.distance.stderr_ =
        std::sqrt(ss * static_cast<double>(est.n_blocks - 1) / static_cast<double>(est.n_blocks));
    return out;
}

void write_chain_csv(std::ostream& os, const std::vector<VortexConfig>& chain) {
    io::CsvWriter csv(os, {"step", "sign", "index", "x", "y"});
    for (std::size_t step = 0; step < chain.size(); ++step) {
        const auto& cfg = chain[step];
        for (std::size_t i = 0; i < cfg.plus.size(); ++i)
            csv.row_raw({std::to_string(step), "1", std::to_string(i),
                         format_double(cfg.plus[i].x), format_double(cfg.plus[i].y)});
        for (std::size_t i = 0; i < cfg.minus.size(); ++i)
            csv.row_raw({std::to_string(step), "-1", std::to_string(i),
                         format_double(cfg.minus[i].x), format_double(cfg.minus[i].y)});
    }
}

void write_correlation_csv(std::ostream& os, const CorrelationEstimate& est) {
    io::CsvWriter csv(os, {"bin_i", "bin_j", "value", "stderr"});
    for (int i = 0; i < est.bins; ++i)
        for (int j = 0; j < est.bins; ++j)
            csv.row_raw({std::to_string(i), std::to_string(j), format_double(est.value(i, j)),
                         format_double(est.stderr_bin(i, j))});
}

}  // namespace vortexgas::gibbs
