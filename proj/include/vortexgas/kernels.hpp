#pragma once

#include <iosfwd>
#include <vector>

#include "vortexgas/common.hpp"

namespace vortexgas::kernels {

/// Truncated torus kernels, all built from the same Fourier multipliers over
/// the mode square 0 < |k|_inf <= cutoff (the zero mode is excluded from all
/// three kinds, so every kernel integrates to zero over the torus):
///
///   green:   1 / (4 pi^2 |k|^2)                    -- truncated Coulomb G
///   yukawa:  1 / (m^2 + 4 pi^2 |k|^2)              -- screened part W_m
///   smooth:  m^2 / (4 pi^2 |k|^2 (m^2 + 4 pi^2 |k|^2))  -- remainder V_m
///
/// By construction green = yukawa + smooth holds mode by mode, hence exactly
/// (to rounding) for every evaluation path that uses one mode set.
enum class Kind { green, yukawa, smooth };

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& name);

struct KernelSpec {
    double mass = 1.0;  ///< screening mass m > 0
    int cutoff = 64;    ///< mode square half-width K >= 1
    int grid_n = 128;   ///< table / evaluation grid size per side, even, >= 4

    /// Default table resolution; cutoff covers the m^2-crossover scale.
    static KernelSpec for_tables(double mass);
    /// Grid fine enough to hold all modes of the sampled field without aliasing.
    static KernelSpec for_field(double mass);
    static int default_cutoff(double mass);

    void validate() const;  ///< throws Error("invalid-spec") on bad values
};

/// Fourier multiplier of one kind at integer mode k (k != 0).
double multiplier(Kind kind, double mass, int k1, int k2);

/// Point evaluations: direct compensated mode sums, accumulated over
/// |k|_inf shells from the inside out. green/yukawa refuse the diagonal.
double green_eval(const KernelSpec& spec, Vec2 d);
double yukawa_eval(const KernelSpec& spec, Vec2 d);
double smooth_eval(const KernelSpec& spec, Vec2 d);

/// V_m(0,0) = sum of smooth multipliers; grows like log(m)/(2 pi).
/// Requires cutoff >= 4m so the neglected tail is mass-independent.
double smooth_diag(const KernelSpec& spec);

/// Precomputed kernel values on the regular grid_n x grid_n displacement grid
/// d = (i,j)/grid_n, plus a log-corrected patch near the origin for the
/// singular kinds. eval() is the O(1) lookup used by the samplers.
class KernelTable {
  public:
    static KernelTable build(Kind kind, const KernelSpec& spec);

    Kind kind() const { return kind_; }
    const KernelSpec& spec() const { return spec_; }

    /// Exact nodal value at displacement (i,j)/grid_n (periodic indices).
    /// The (0,0) node of green/yukawa is not a kernel value; reading it
    /// throws Error("singular-diagonal").
    double node(int i, int j) const;

    /// Bilinear interpolation; for green/yukawa inside |d| < 2/grid_n the
    /// interpolation runs on the smooth remainder S = kernel + log|d|/(2 pi)
    /// and the log term is restored exactly.  Displacements shorter than the
    /// regularisation scale (1e-8) throw Error("singular-diagonal").
    double eval(Vec2 d) const;

    double grid_mean() const;  ///< mean over nodes, diagonal excluded for singular kinds

    /// CSV export: metadata line "# kind,mass,cutoff,grid_n", then a header and
    /// grid_n^2 rows "i,j,value" in row-major order; the singular diagonal
    /// entry of green/yukawa is written as the literal "singular".
    void write_csv(std::ostream& os) const;

    static constexpr double regularisation_scale = 1e-8;

  private:
    Kind kind_ = Kind::green;
    KernelSpec spec_;
    std::vector<double> values_;   ///< grid_n^2, row-major value[i*n+j]
    std::vector<double> patch_;    ///< corrected S-values around the origin (singular kinds)
    int patch_half_ = 0;           ///< patch covers |i|,|j| <= patch_half_
    double near_radius_ = 0.0;     ///< switch to the corrected path below this |d|

    double patch_at(int i, int j) const;  ///< wrapped signed indices
    double bilinear_raw(Vec2 d) const;
    double bilinear_corrected(Vec2 d) const;
};

}  // namespace vortexgas::kernels
