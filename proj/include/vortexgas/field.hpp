#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vortexgas/common.hpp"
#include "vortexgas/kernels.hpp"
#include "vortexgas/rng.hpp"

namespace vortexgas::field {

/// Derive an independent sub-seed for a named random-draw context, so the
/// different consumers of one run seed never share a stream.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
    return rng::mix_key(seed, salt);
}

/// Canonical half mode set: one representative of each +-k pair,
/// 0 < |k|_inf <= K. Fixed enumeration order (k1 = 0 row first, then
/// k1 = 1..K with k2 = -K..K); mode index in this order keys the RNG
/// stream of the mode, so samples are reproducible under any threading.
std::size_t half_mode_count(int cutoff);

template <class F>
void for_half_modes(int cutoff, F&& f) {
    std::size_t idx = 0;
    for (int k2 = 1; k2 <= cutoff; ++k2) f(idx++, 0, k2);
    for (int k1 = 1; k1 <= cutoff; ++k1)
        for (int k2 = -cutoff; k2 <= cutoff; ++k2) f(idx++, k1, k2);
}

/// One realisation of the Gaussian field with covariance kernel smooth(mass):
/// coefficient representative per half mode (the -k partner is the conjugate)
/// plus real grid values from the inverse transform.
struct FieldSample {
    kernels::KernelSpec spec;
    std::uint64_t seed = 0;
    std::vector<std::complex<double>> coeffs;  ///< half modes, canonical order
    std::vector<double> grid;                  ///< grid_n^2 row-major, F(i/n, j/n)

    double l2_sq_parseval() const;  ///< sum over all modes of |coeff|^2
    double grid_mean() const;
};

/// Coefficients only (no grid synthesis); same draws as sample_field.
std::vector<std::complex<double>> sample_coeffs(const kernels::KernelSpec& spec,
                                                std::uint64_t seed);

FieldSample sample_field(const kernels::KernelSpec& spec, std::uint64_t seed);

/// Per-mode coefficient variance m^2 / (4 pi^2 |k|^2 (m^2 + 4 pi^2 |k|^2)).
double mode_variance(const kernels::KernelSpec& spec, int k1, int k2);

/// Field restricted to a coarse eval_n x eval_n grid, exact in law: every
/// mode is drawn (identical draws as sample_field for equal seed), the
/// coefficients are folded mod eval_n and one small transform is run.
/// l2_sq is the grid mean of F^2 over the same eval points, so position
/// averages and the Gaussian weight see one common lattice measure; with a
/// fully resolving grid it coincides with the Parseval norm.  This is what
/// makes large-mass experiments affordable: cost is one draw per mode, not
/// one grid point.
struct CoarseSample {
    int eval_n = 0;
    std::vector<double> grid;  ///< eval_n^2 row-major
    double l2_sq = 0.0;
};
CoarseSample sample_field_coarse(const kernels::KernelSpec& spec, int eval_n,
                                 std::uint64_t seed);

/// Grid quadrature of (integral |F|^p)^(1/p), uniform weights.
double lp_norm(const FieldSample& sample, double p);

/// E_j = integral of exp(i * sign * sqrt(beta/N) * F) over the torus.
std::complex<double> e_factor(const FieldSample& sample, int sign, double beta,
                              int n_vortices);

/// The Gaussian weight exp(-(beta/2N) ||F||_2^2), in (0, 1].
double gauss_weight(const FieldSample& sample, double beta, int n_vortices);
double gauss_weight_from_l2(double l2_sq, double beta, int n_vortices);

/// Exact truncated-mode value of E[exp(-alpha ||F||_2^2)]:
/// exp(-1/2 sum over modes of log(1 + 2 alpha sigma_k^2)).
double analytic_exp_moment(double alpha, const kernels::KernelSpec& spec);

/// Monte Carlo estimates of E||F||_2^2 and E[exp(-alpha ||F||_2^2)] drawn in
/// coefficient space (law-exact via Parseval: ||F||^2 = sum of 2 sigma_k^2 E_k
/// with E_k iid unit exponentials).
Estimate norm_sq_mc(const kernels::KernelSpec& spec, long long n_samples,
                    std::uint64_t seed);
Estimate exp_moment_mc(double alpha, const kernels::KernelSpec& spec, long long n_samples,
                       std::uint64_t seed);

/// One row of the exponential-moment difference check at this spec's mass:
/// difference of the closed forms at alpha < alpha2, the comparison scale
/// (alpha2 - alpha) m^(-alpha/2pi) log m, and their ratio; optionally a
/// paired-sample MC estimate of the same difference (n_samples > 0).
struct DiffCheckRow {
    double mass = 0.0;
    double difference = 0.0;  ///< analytic, always >= 0
    double scale = 0.0;
    double ratio = 0.0;
    Estimate mc_difference;
};
DiffCheckRow exp_moment_diff_check(double alpha, double alpha2,
                                   const kernels::KernelSpec& spec, long long n_samples,
                                   std::uint64_t seed);

/// CSV rows "k1,k2,re,im" for the half-mode coefficients.
void write_coeffs_csv(std::ostream& os, const FieldSample& sample);

}  // namespace vortexgas::field
