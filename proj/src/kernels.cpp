#include "vortexgas/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "vortexgas/io.hpp"

namespace vortexgas::kernels {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kFourPiSq = 4.0 * kPi * kPi;

/// Visit one representative of every +-k mode pair with 0 < |k|_inf <= K,
/// ordered by shell |k|_inf from the inside out (largest multipliers first,
/// which keeps the compensated sums well conditioned).
template <class F>
void for_half_modes_shellwise(int K, F&& f) {
    for (int s = 1; s <= K; ++s) {
        f(s, 0);
        f(0, s);
        for (int k2 = 1; k2 <= s; ++k2) {
            f(s, k2);
            f(s, -k2);
        }
        for (int k1 = 1; k1 < s; ++k1) {
            f(k1, s);
            f(k1, -s);
        }
    }
}

double point_sum(Kind kind, const KernelSpec& spec, Vec2 d) {
    spec.validate();
    Vec2 w = wrap_disp(d);
    double r = std::sqrt(w.x * w.x + w.y * w.y);
    if (kind != Kind::smooth && r < 1e-12)
        throw Error("singular-diagonal", "point evaluation of " + std::string(kind_name(kind)) +
                                             " kernel on the diagonal");
    KahanSum sum;
    for_half_modes_shellwise(spec.cutoff, [&](int k1, int k2) {
        double phase = 2.0 * kPi * (k1 * w.x + k2 * w.y);
        sum.add(2.0 * std::cos(phase) * multiplier(kind, spec.mass, k1, k2));
    });
    return sum.value();
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::green: return "green";
        case Kind::yukawa: return "yukawa";
        case Kind::smooth: return "smooth";
    }
    return "?";
}

Kind kind_from_name(const std::string& name) {
    if (name == "green") return Kind::green;
    if (name == "yukawa") return Kind::yukawa;
    if (name == "smooth") return Kind::smooth;
    throw Error("invalid-spec", "unknown kernel kind '" + name + "'");
}

int KernelSpec::default_cutoff(double mass) {
    return std::max(64, 4 * int(std::ceil(mass)));
}

KernelSpec KernelSpec::for_tables(double mass) {
    KernelSpec s;
    s.mass = mass;
    s.cutoff = default_cutoff(mass);
    s.grid_n = 128;
    s.validate();
    return s;
}

KernelSpec KernelSpec::for_field(double mass) {
    KernelSpec s;
    s.mass = mass;
    s.cutoff = default_cutoff(mass);
    // smallest even n with n >= 2*(2K+2): holds every mode pair unaliased
    int n = 2 * (s.cutoff + 1);
    s.grid_n = 2 * n;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw Error("invalid-spec", "mass must be positive and finite");
    if (cutoff < 1) throw Error("invalid-spec", "cutoff must be >= 1");
    if (grid_n < 4 || grid_n % 2 != 0)
        throw Error("invalid-spec", "grid_n must be even and >= 4");
}

double multiplier(Kind kind, double mass, int k1, int k2) {
    double ksq = kFourPiSq * (double(k1) * k1 + double(k2) * k2);
    switch (kind) {
        case Kind::green: return 1.0 / ksq;
        case Kind::yukawa: return 1.0 / (mass * mass + ksq);
        case Kind::smooth: return mass * mass / (ksq * (mass * mass + ksq));
    }
    return 0.0;
}

double green_eval(const KernelSpec& spec, Vec2 d) { return point_sum(Kind::green, spec, d); }
double yukawa_eval(const KernelSpec& spec, Vec2 d) { return point_sum(Kind::yukawa, spec, d); }
double smooth_eval(const KernelSpec& spec, Vec2 d) { return point_sum(Kind::smooth, spec, d); }

double smooth_diag(const KernelSpec& spec) {
    spec.validate();
    if (double(spec.cutoff) < 4.0 * spec.mass)
        throw Error("cutoff-too-small", "smooth_diag needs cutoff >= 4*mass for a "
                                        "mass-independent truncation tail");
    KahanSum sum;
    for_half_modes_shellwise(spec.cutoff, [&](int k1, int k2) {
        sum.add(2.0 * multiplier(Kind::smooth, spec.mass, k1, k2));
    });
    return sum.value();
}

KernelTable KernelTable::build(Kind kind, const KernelSpec& spec) {
    spec.validate();
    const int n = spec.grid_n;
    const int K = spec.cutoff;
    const double mass = spec.mass;

    // cos(2 pi k x / n) at nodes only needs k*x mod n: one period table
    std::vector<double> cosn(n);
    for (int r = 0; r < n; ++r) cosn[r] = std::cos(2.0 * kPi * double(r) / double(n));

    // inner sums c[k1][j] = sum over k2 of multiplier * cos(2 pi k2 j / n),
    // then the outer k1 sum; both stay column-even so half the j (and i)
    // range is mirrored instead of recomputed.
    const int half = n / 2;
    std::vector<double> inner((K + 1) * (half + 1));
    for (int k1 = 0; k1 <= K; ++k1) {
        for (int j = 0; j <= half; ++j) {
            KahanSum s;
            if (k1 > 0) s.add(multiplier(kind, mass, k1, 0));
            for (int k2 = 1; k2 <= K; ++k2) {
                long long r = (long long)(k2) * j % n;
                s.add(2.0 * multiplier(kind, mass, k1, k2) * cosn[r]);
            }
            inner[k1 * (half + 1) + j] = s.value();
        }
    }

    KernelTable t;
    t.kind_ = kind;
    t.spec_ = spec;
    t.values_.assign(std::size_t(n) * n, 0.0);
    for (int i = 0; i <= half; ++i) {
        for (int j = 0; j <= half; ++j) {
            KahanSum s;
            s.add(inner[j]);  // k1 = 0 row
            for (int k1 = 1; k1 <= K; ++k1) {
                long long r = (long long)(k1) * i % n;
                s.add(2.0 * inner[k1 * (half + 1) + j] * cosn[r]);
            }
            double v = s.value();
            int im = (n - i) % n;
            int jm = (n - j) % n;
            t.values_[std::size_t(i) * n + j] = v;
            t.values_[std::size_t(im) * n + j] = v;
            t.values_[std::size_t(i) * n + jm] = v;
            t.values_[std::size_t(im) * n + jm] = v;
        }
    }

    t.near_radius_ = 2.0 / double(n);
    if (kind != Kind::smooth) {
        // S = kernel + log|d| / (2 pi) is smooth through the origin; tabulate
        // it on a small signed patch so interpolation near zero is sane.
        t.patch_half_ = 4;
        int side = 2 * t.patch_half_ + 1;
        t.patch_.assign(std::size_t(side) * side, 0.0);
        for (int i = -t.patch_half_; i <= t.patch_half_; ++i) {
            for (int j = -t.patch_half_; j <= t.patch_half_; ++j) {
                if (i == 0 && j == 0) continue;
                double r = std::sqrt(double(i) * i + double(j) * j) / double(n);
                double raw = t.values_[std::size_t((i + n) % n) * n + (j + n) % n];
                t.patch_[std::size_t(i + t.patch_half_) * side + (j + t.patch_half_)] =
                    raw + std::log(r) / (2.0 * kPi);
            }
        }
        // origin: average of the four axis neighbours (linear in nodal data,
        // so identities between kinds survive interpolation untouched)
        double s00 = 0.25 * (t.patch_at(1, 0) + t.patch_at(-1, 0) + t.patch_at(0, 1) +
                             t.patch_at(0, -1));
        t.patch_[std::size_t(t.patch_half_) * side + t.patch_half_] = s00;
        // the raw diagonal slot holds a truncated mode sum, not a kernel
        // value; poison it so accidental reads are loud
        t.values_[0] = std::numeric_limits<double>::quiet_NaN();
    }
    return t;
}

double KernelTable::node(int i, int j) const {
    const int n = spec_.grid_n;
    int ii = ((i % n) + n) % n;
    int jj = ((j % n) + n) % n;
    if (kind_ != Kind::smooth && ii == 0 && jj == 0)
        throw Error("singular-diagonal", "diagonal node of a singular kernel table");
    return values_[std::size_t(ii) * n + jj];
}

double KernelTable::patch_at(int i, int j) const {
    int side = 2 * patch_half_ + 1;
    return patch_[std::size_t(i + patch_half_) * side + (j + patch_half_)];
}

double KernelTable::bilinear_raw(Vec2 d) const {
    const int n = spec_.grid_n;
    double u = wrap_unit(d.x) * n;
    double v = wrap_unit(d.y) * n;
    int i0 = int(std::floor(u));
    int j0 = int(std::floor(v));
    double fu = u - i0;
    double fv = v - j0;
    i0 %= n;
    j0 %= n;
    int i1 = (i0 + 1) % n;
    int j1 = (j0 + 1) % n;
    const double* a = values_.data();
    double v00 = a[std::size_t(i0) * n + j0];
    double v01 = a[std::size_t(i0) * n + j1];
    double v10 = a[std::size_t(i1) * n + j0];
    double v11 = a[std::size_t(i1) * n + j1];
    return (1 - fu) * ((1 - fv) * v00 + fv * v01) + fu * ((1 - fv) * v10 + fv * v11);
}

double KernelTable::bilinear_corrected(Vec2 d) const {
    // signed cell around the origin; |d| < near_radius_ keeps indices inside the patch
    const int n = spec_.grid_n;
    Vec2 w = wrap_disp(d);
    double u = w.x * n;
    double v = w.y * n;
    int i0 = int(std::floor(u));
    int j0 = int(std::floor(v));
    double fu = u - i0;
    double fv = v - j0;
    double s00 = patch_at(i0, j0);
    double s01 = patch_at(i0, j0 + 1);
    double s10 = patch_at(i0 + 1, j0);
    double s11 = patch_at(i0 + 1, j0 + 1);
    double s = (1 - fu) * ((1 - fv) * s00 + fv * s01) + fu * ((1 - fv) * s10 + fv * s11);
    double r = std::sqrt(w.x * w.x + w.y * w.y);
    return s - std::log(r) / (2.0 * kPi);
}

double KernelTable::eval(Vec2 d) const {
    Vec2 w = wrap_disp(d);
    double r = std::sqrt(w.x * w.x + w.y * w.y);
    if (kind_ == Kind::smooth) return bilinear_raw(w);
    if (r < regularisation_scale)
        throw Error("singular-diagonal", "kernel evaluation below the regularisation scale");
    if (r < near_radius_) return bilinear_corrected(w);
    return bilinear_raw(w);
}

double KernelTable::grid_mean() const {
    const int n = spec_.grid_n;
    KahanSum s;
    long long cnt = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (kind_ != Kind::smooth && i == 0 && j == 0) continue;
            s.add(values_[std::size_t(i) * n + j]);
            ++cnt;
        }
    return s.value() / double(cnt);
}

void KernelTable::write_csv(std::ostream& os) const {
    const int n = spec_.grid_n;
    os << "# " << kind_name(kind_) << "," << format_double(spec_.mass) << "," << spec_.cutoff
       << "," << n << "\r\n";
    io::CsvWriter csv(os, {"i", "j", "value"});
    const bool singular = (kind_ != Kind::smooth);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (singular && i == 0 && j == 0) {
                csv.row_raw({"0", "0", "singular"});
                continue;
            }
            csv.row_raw({std::to_string(i), std::to_string(j),
                         format_double(values_[std::size_t(i) * n + j])});
        }
    }
}

}  // namespace vortexgas::kernels
