#pragma once

#include <cstdint>
#include <vector>

#include "vortexgas/common.hpp"
#include "vortexgas/gibbs.hpp"
#include "vortexgas/kernels.hpp"

namespace vortexgas::meanfield {

/// Signed pair of probability densities on the unit torus grid (mean 1 each).
struct DensityPair {
    int grid_n = 0;
    std::vector<double> plus;   ///< grid_n^2 row-major
    std::vector<double> minus;
};
void validate_density(const DensityPair& d);  ///< throws "invalid-density"

/// Mean-field free energy: (1/beta) * entropy by grid quadrature plus the
/// spectral interaction of (rho+ - rho-) against the truncated Coulomb
/// multiplier (modes 0 < |k|_inf <= spec.cutoff, folded to the grid).
double free_energy(const DensityPair& d, double beta, const kernels::KernelSpec& spec);

/// Spectral residual of the stationary equation Delta psi = (1/alpha) sinh(beta psi)
/// plus the defect of the normalisation identity 4 alpha^2 = int e^{-beta psi} int e^{beta psi}.
struct SinhPoissonCheck {
    double pde_residual = 0.0;        ///< grid L2 norm
    double consistency_defect = 0.0;  ///< |4 alpha^2 - product of exponential integrals|
};
SinhPoissonCheck sinh_poisson_residual(const std::vector<double>& psi, int grid_n, double beta,
                                       double alpha);

/// Decorrelation-rate experiment configuration.  samples_base recorded
/// configurations are taken per ensemble size: the pair count per record
/// grows like N^2, so at fixed record count the histogram noise floor falls
/// like 1/N and the signal-to-floor ratio improves with N.
struct RateConfig {
    double beta = 1.0;
    double p = 2.0;
    int h = 1;
    int l = 1;
    std::vector<int> n_grid{8, 16, 32, 64};
    int bins = 8;
    int n_blocks = 16;
    int chains = 4;
    long long samples_base = 400000;
    int thin_sweeps = 3;        ///< sweeps between recorded configurations
    long long burn_in = -1;     ///< steps; negative selects 10 * N * bins
    double proposal_sigma = 0.12;
    bool loglog_correction = true;  ///< also fit with the fixed (3/2) log log N term
    std::uint64_t seed = 1;
};

struct RatePoint {
    int n = 0;
    double raw = 0.0;             ///< measured histogram distance
    double raw_stderr = 0.0;
    double floor = 0.0;           ///< beta = 0 calibration distance
    double floor_stderr = 0.0;
    double signal = 0.0;          ///< sqrt(max(raw^2 - floor^2, 0))
    double signal_stderr = 0.0;
    double acceptance = 0.0;      ///< chain acceptance rate at this N
};

struct RateSeries {
    std::vector<RatePoint> points;
    LinearFit fit;                ///< log signal = c + s log N (weighted)
    LinearFit fit_corrected;      ///< after subtracting (3/2) log log N
    bool noise_dominated = false; ///< signal below 2x floor at the largest N
};

/// Runs the chains (beta and the beta = 0 calibration twin with identical
/// bins/samples/thinning), subtracts the floor in quadrature, and fits the
/// decay exponent.  Throws nothing for the noise-dominated outcome; callers
/// inspect the flag (the CLI maps it to its own exit code).
RateSeries rate_experiment(const RateConfig& cfg, const kernels::KernelTable& kernel);

}  // namespace vortexgas::meanfield
