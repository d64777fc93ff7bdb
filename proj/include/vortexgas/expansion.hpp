#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "vortexgas/common.hpp"
#include "vortexgas/field.hpp"
#include "vortexgas/kernels.hpp"

namespace vortexgas::expansion {

/// Mean-zero test function on a uniform grid (uniform quadrature weights):
/// piecewise constant on a random dyadic partition, cell values iid uniform,
/// then exactly mean-centred.
struct TestFunction {
    int grid_n = 64;
    std::vector<double> values;  ///< grid_n^2 row-major
    double mean() const;
};

/// grid_n must be a power of two >= 4; |values| stays <= 2*amplitude after
/// centring (draws are uniform in [-amplitude, amplitude]).
TestFunction random_dyadic_function(int grid_n, double amplitude, std::uint64_t seed);

/// Margin RHS - LHS of the even-power inequality
///   integral (e^{-f} - 1)^{2n} <= 2^{2n-2} integral (e^{-2nf} - 1)
/// for mean-zero f; nonnegative up to rounding.  Throws "not-mean-zero".
double check_even_power_inequality(const TestFunction& f, int n);

/// The n = 1 margin in closed form: 2 (integral e^{-f} - 1).
double even_power_margin_closed_n1(const TestFunction& f);

/// Margin of the characteristic-function bound
///   |integral e^{if} - e^{-||f||_2^2 / 2}| <= ||f||_3^3 / 6 + ||f||_2^4 / 8.
double check_complex_taylor(const TestFunction& f);

/// Aggregate over a sweep of random test functions.
struct InequalityStats {
    long long n_functions = 0;
    long long instances = 0;       ///< function x order evaluations
    long long violations = 0;      ///< margins below -1e-12
    double min_margin = 0.0;
    double max_closed_form_gap = 0.0;  ///< |direct n=1 margin - closed form|
};
/// When per_instance is given it receives n_functions * (orders + 1) margins,
/// row-major per function (even-power orders in list order, then the
/// characteristic bound).
InequalityStats inequality_sweep(long long n_functions, const std::vector<int>& orders,
                                 int grid_n, double amplitude, std::uint64_t seed,
                                 std::vector<double>* per_instance = nullptr);

/// Both sides of the transform identity at one (N, beta, mass) cell:
/// lhs by deterministic quadrature of the configuration integral, rhs by
/// field Monte Carlo of prefactor * E[product of E_j].
struct SineGordonCell {
    int n_vortices = 2;
    double beta = 1.0;
    double mass = 1.0;
    double lhs = 0.0;
    double lhs_quad_err = 0.0;  ///< two-resolution / shift-spread quadrature tolerance
    double prefactor = 0.0;     ///< exp((beta/2) V_m(0,0))
    Estimate rhs;
};

/// One cell with its own field samples (N in {2, 4}; throws "N-too-large").
SineGordonCell sine_gordon_check(double beta, int n_vortices, const kernels::KernelSpec& spec,
                                 long long n_field_samples, std::uint64_t seed);

/// Full product sweep sharing one set of field samples per mass (the E_j
/// factors for every (N, beta) pair are read off the same sample set).
std::vector<SineGordonCell> sine_gordon_sweep(const std::vector<int>& n_list,
                                              const std::vector<double>& betas,
                                              const std::vector<double>& masses,
                                              long long n_field_samples, long long qmc_nodes,
                                              std::uint64_t seed);

/// Remainder of the product expansion after tagging the first k factors:
/// direct form prod_{j>k} E_j - E^(N-k) against the order-n expanded form.
struct RemainderReport {
    int k = 0;
    int order = 1;
    std::complex<double> direct;
    std::complex<double> expanded;
    double identity_error = 0.0;
};

std::complex<double> remainder_direct(const std::vector<std::complex<double>>& e_values,
                                      double e_weight, int k);
std::complex<double> remainder_expanded(const std::vector<std::complex<double>>& e_values,
                                        double e_weight, int k, int order);
RemainderReport remainder_expand(const std::vector<std::complex<double>>& e_values,
                                 double e_weight, int k, int order);

/// E|R_k| along the schedule m = N^a, with the expansion identity re-checked
/// on every drawn sample tuple.
struct RemainderRow {
    int n_vortices = 0;
    double mass = 0.0;
    long long samples = 0;
    Estimate mean_abs;
    double bound_scale = 0.0;  ///< reference envelope (unknown constant omitted)
    double identity_error_max = 0.0;
};
std::vector<RemainderRow> remainder_moment_study(double beta, const std::vector<int>& n_grid,
                                                 double a, int k, int order, long long samples,
                                                 int eval_n, std::uint64_t seed);

/// Default expansion order for the moment study: smallest integer exceeding
/// 1 + (beta/2pi) a.
int default_expansion_order(double beta, double a);

/// Slack census of the single-factor bound |E_j - E| <= N^(-3/2) ||F||_3^3.
struct ProofStepResult {
    long long samples = 0;
    long long violations = 0;
    double min_slack = 0.0;  ///< min over samples of bound + 1e-9 - |E_j - E|
};
ProofStepResult e_factor_bound_check(double beta, int n_vortices,
                                     const kernels::KernelSpec& spec, long long samples,
                                     std::uint64_t seed);

/// Screened-interaction partition growth: z = MC mean of e^{-beta H_W} over
/// uniform configurations, and g(m) = (z^{1/N} - 1) m^2 / (log m)^2.
struct YukawaRow {
    double mass = 0.0;
    Estimate z;
    double g = 0.0;
    double g_stderr = 0.0;
};
std::vector<YukawaRow> yukawa_partition_check(double beta, int n_vortices,
                                              const std::vector<double>& masses,
                                              long long samples, std::uint64_t seed);

/// Smooth-interaction partition sequence along m = N^a with the mean-field
/// weight e^{-(beta/N) H_V}; bounded in N.
struct RegularRow {
    int n_vortices = 0;
    double mass = 0.0;
    Estimate z;
};
std::vector<RegularRow> regular_partition_check(double beta, const std::vector<int>& n_grid,
                                                double a, long long samples,
                                                std::uint64_t seed);

}  // namespace vortexgas::expansion
