#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vortexgas/common.hpp"
#include "vortexgas/kernels.hpp"
#include "vortexgas/rng.hpp"

namespace vortexgas::gibbs {

/// Signed vortex configuration on the torus: equal-length + and - lists.
struct VortexConfig {
    std::vector<Vec2> plus;
    std::vector<Vec2> minus;
    int total() const { return static_cast<int>(plus.size() + minus.size()); }
};

struct EnsembleParams {
    double beta = 1.0;
    int n_vortices = 8;  ///< even, split evenly between signs
    int h = 1;           ///< tagged + vortices of the correlation observable
    int l = 1;           ///< tagged - vortices
    void validate() const;  ///< throws Error("invalid-spec")
};

/// H_N = sum over unordered pairs of xi_i xi_j K(x_i - x_j), via table lookup.
/// Propagates "coincident-vortices" when a pair underflows the table's
/// regularisation scale; throws "non-finite-energy" on a non-finite result.
double hamiltonian(const VortexConfig& cfg, const kernels::KernelTable& kernel);

struct EnergySplit {
    double smooth = 0.0;
    double yukawa = 0.0;
    double total() const { return smooth + yukawa; }
};
EnergySplit hamiltonian_split(const VortexConfig& cfg, const kernels::KernelTable& smooth,
                              const kernels::KernelTable& yukawa);

/// Plain Monte Carlo over uniform configurations of e^{-(beta/N) H_N}.
/// Jensen puts the true value at >= 1; the estimate must satisfy
/// value + 3 stderr >= 1.
Estimate partition_estimate(const EnsembleParams& p, const kernels::KernelTable& kernel,
                            long long n_samples, std::uint64_t seed);

/// Streaming Metropolis chain: single-vortex wrapped-Gaussian proposals
/// targeting the density proportional to e^{-(beta/N) H_N}.  Incremental
/// energy updates; a proposal that underflows the regularisation scale of a
/// pair distance is rejected.
class McmcChain {
  public:
    McmcChain(const EnsembleParams& p, const kernels::KernelTable& kernel,
              double proposal_sigma, std::uint64_t seed);

    void step();                     ///< one proposed move (fixed draw budget)
    void sweep() { for (int i = 0; i < params_.n_vortices; ++i) step(); }

    const VortexConfig& config() const { return cfg_; }
    const EnsembleParams& params() const { return params_; }
    long long steps() const { return steps_; }
    double acceptance_rate() const { return steps_ > 0 ? double(accepted_) / double(steps_) : 0.0; }

  private:
    EnsembleParams params_;
    const kernels::KernelTable* kernel_;
    double sigma_;
    VortexConfig cfg_;
    long long steps_ = 0;
    long long accepted_ = 0;
    rng::Stream rng_;

    double move_delta(int idx, int sign, Vec2 from, Vec2 to) const;
};

/// Materialised chain: burn_in discarded, then every `thinning`-th step kept.
/// Negative burn_in/thinning select the defaults 10 * N * bins-per-axis (with
/// bins = 8) and N.
std::vector<VortexConfig> mcmc_chain(const EnsembleParams& p, const kernels::KernelTable& kernel,
                                     long long n_steps, double proposal_sigma, std::uint64_t seed,
                                     long long burn_in = -1, long long thinning = -1);

/// Separation histogram of the (h, l) correlation observable, normalised so
/// the flat density is exactly 1; per-block copies feed jackknife errors.
struct CorrelationEstimate {
    EnsembleParams params;
    int bins = 8;  ///< per axis
    int n_blocks = 16;
    long long n_configs = 0;
    long long total_counts = 0;
    std::vector<double> density;              ///< bins^2, grid mean exactly 1
    std::vector<long long> counts;            ///< raw pair counts
    std::vector<long long> block_counts;      ///< n_blocks x bins^2
    double value(int bi, int bj) const;
    double stderr_bin(int bi, int bj) const;  ///< jackknife over blocks
};

/// Streaming accumulator: add() pairs from each kept configuration.
class CorrelationAccumulator {
  public:
    CorrelationAccumulator(const EnsembleParams& p, int bins, int n_blocks,
                           long long expected_configs);
    void add(const VortexConfig& cfg);
    CorrelationEstimate finalize() const;  ///< throws "insufficient-samples"

  private:
    CorrelationEstimate est_;
    long long expected_;
};

CorrelationEstimate correlation_estimate(const std::vector<VortexConfig>& chain,
                                         const EnsembleParams& p, int bins);

/// Grid L^p distance of the histogram density from the constant 1 with a
/// jackknife stderr, plus the a-priori histogram noise-floor scale
/// sqrt(bins^2 / total pair count).
struct DistanceResult {
    Estimate distance;
    double noise_floor_hint = 0.0;
};
DistanceResult lp_distance(const CorrelationEstimate& est, double p);

/// CSV rows "step,sign,index,x,y" (one row per vortex per kept config).
void write_chain_csv(std::ostream& os, const std::vector<VortexConfig>& chain);
/// CSV rows "bin_i,bin_j,value,stderr".
void write_correlation_csv(std::ostream& os, const CorrelationEstimate& est);

}  // namespace vortexgas::gibbs
