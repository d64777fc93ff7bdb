#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"
#include "vortexgas/common.hpp"
#include "vortexgas/kernels.hpp"

using namespace vortexgas;
using kernels::Kind;
using kernels::KernelSpec;
using kernels::KernelTable;

namespace {

/// Independent brute-force truncated lattice sum: a plain double loop over
/// the full mode square, nothing shared with the table's separable scheme.
double brute_sum(Kind kind, const KernelSpec& spec, Vec2 x) {
    double sum = 0.0;
    for (int k1 = -spec.cutoff; k1 <= spec.cutoff; ++k1)
        for (int k2 = -spec.cutoff; k2 <= spec.cutoff; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double phase = 2.0 * kPi * (k1 * x.x + k2 * x.y);
            sum += std::cos(phase) * kernels::multiplier(kind, spec.mass, k1, k2);
        }
    return sum;
}

std::string error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("mode multipliers satisfy the splitting identity exactly") {
    const double mass = 7.5;
    for (int k1 = -5; k1 <= 5; ++k1)
        for (int k2 = -5; k2 <= 5; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double g = kernels::multiplier(Kind::green, mass, k1, k2);
            const double w = kernels::multiplier(Kind::yukawa, mass, k1, k2);
            const double v = kernels::multiplier(Kind::smooth, mass, k1, k2);
            CHECK(g == doctest::Approx(w + v).epsilon(1e-14));
            const double lam = 4.0 * kPi * kPi * (double(k1) * k1 + double(k2) * k2);
            CHECK(g == doctest::Approx(1.0 / lam).epsilon(1e-14));
            CHECK(w == doctest::Approx(1.0 / (mass * mass + lam)).epsilon(1e-14));
        }
}

TEST_CASE("table nodes match an independent brute-force mode sum") {
    KernelSpec spec;
    spec.mass = 2.5;
    spec.cutoff = 24;  // small cutoff keeps the brute force cheap
    spec.grid_n = 16;
    for (Kind kind : {Kind::green, Kind::yukawa, Kind::smooth}) {
        const auto table = KernelTable::build(kind, spec);
        for (auto [i, j] : {std::pair{1, 0}, {3, 5}, {8, 8}, {15, 2}, {0, 7}}) {
            const Vec2 x{double(i) / spec.grid_n, double(j) / spec.grid_n};
            CHECK(table.node(i, j) == doctest::Approx(brute_sum(kind, spec, x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("point evaluation agrees with the brute-force sum off the diagonal") {
    KernelSpec spec;
    spec.mass = 4.0;
    spec.cutoff = 20;
    spec.grid_n = 16;
    const Vec2 x{3.0 / 16.0, 11.0 / 16.0};  // exact grid node, bilinear is exact there
    for (Kind kind : {Kind::green, Kind::yukawa, Kind::smooth}) {
        const auto table = KernelTable::build(kind, spec);
        CHECK(table.eval(x) == doctest::Approx(brute_sum(kind, spec, x)).epsilon(1e-10));
    }
    CHECK(kernels::green_eval(spec, x) == doctest::Approx(brute_sum(Kind::green, spec, x)).epsilon(1e-12));
    CHECK(kernels::yukawa_eval(spec, x) ==
          doctest::Approx(brute_sum(Kind::yukawa, spec, x)).epsilon(1e-12));
    CHECK(kernels::smooth_eval(spec, x) ==
          doctest::Approx(brute_sum(Kind::smooth, spec, x)).epsilon(1e-12));
}

TEST_CASE("node indices wrap periodically") {
    KernelSpec spec;
    spec.mass = 3.0;
    spec.cutoff = 16;
    spec.grid_n = 8;
    const auto t = KernelTable::build(Kind::smooth, spec);
    CHECK(t.node(9, 3) == t.node(1, 3));
    CHECK(t.node(-1, 3) == t.node(7, 3));
    CHECK(t.node(3, -9) == t.node(3, 7));
}

TEST_CASE("kernels are even under point reflection") {
    KernelSpec spec;
    spec.mass = 6.0;
    spec.cutoff = 32;
    spec.grid_n = 32;
    const auto t = KernelTable::build(Kind::green, spec);
    for (auto [i, j] : {std::pair{1, 2}, {5, 30}, {13, 13}})
        CHECK(t.node(i, j) == doctest::Approx(t.node(spec.grid_n - i, spec.grid_n - j))
                                  .epsilon(1e-13));
}

TEST_CASE("smooth diagonal equals the table origin node and grows with mass") {
    for (double mass : {2.0, 8.0, 20.0}) {
        const auto spec = KernelSpec::for_tables(mass);
        const auto t = KernelTable::build(Kind::smooth, spec);
        CHECK(t.node(0, 0) == doctest::Approx(kernels::smooth_diag(spec)).epsilon(1e-12));
    }
    CHECK(kernels::smooth_diag(KernelSpec::for_tables(20.0)) >
          kernels::smooth_diag(KernelSpec::for_tables(5.0)));
}

TEST_CASE("smooth diagonal needs enough modes past the screening mass") {
    KernelSpec spec;
    spec.mass = 20.0;
    spec.cutoff = 64;  // below 4 * mass
    spec.grid_n = 128;
    CHECK(error_code([&] { kernels::smooth_diag(spec); }) == "cutoff-too-small");
}

TEST_CASE("default cutoff follows the mass") {
    CHECK(KernelSpec::default_cutoff(1.0) == 64);
    CHECK(KernelSpec::default_cutoff(16.0) == 64);
    CHECK(KernelSpec::default_cutoff(20.0) == 80);
    CHECK(KernelSpec::default_cutoff(100.0) == 400);
    CHECK(KernelSpec::default_cutoff(20.2) == 84);  // ceil first, then scale
}

TEST_CASE("spec validation rejects bad parameters") {
    KernelSpec spec;
    spec.mass = -1.0;
    CHECK(error_code([&] { spec.validate(); }) == "invalid-spec");
    spec.mass = 1.0;
    spec.cutoff = 0;
    CHECK(error_code([&] { spec.validate(); }) == "invalid-spec");
    spec.cutoff = 64;
    spec.grid_n = 127;  // odd
    CHECK(error_code([&] { spec.validate(); }) == "invalid-spec");
}

TEST_CASE("singular kernels refuse their diagonal") {
    KernelSpec spec;
    spec.mass = 2.0;
    spec.cutoff = 16;
    spec.grid_n = 8;
    const auto g = KernelTable::build(Kind::green, spec);
    CHECK(error_code([&] { g.node(0, 0); }) == "singular-diagonal");
    CHECK(error_code([&] { g.eval({0.0, 0.0}); }) == "singular-diagonal");
    CHECK(error_code([&] { g.eval({1e-9, 0.0}); }) == "singular-diagonal");
    CHECK(error_code([&] { kernels::green_eval(spec, {0.0, 0.0}); }) == "singular-diagonal");
}

TEST_CASE("near-origin evaluation tracks the logarithmic singularity") {
    const auto spec = KernelSpec::for_tables(2.0);
    const auto g = KernelTable::build(Kind::green, spec);
    // G(r) + log(r)/(2 pi) should be nearly constant as r -> 0.
    const double c1 = g.eval({1e-5, 0.0}) + std::log(1e-5) / (2.0 * kPi);
    const double c2 = g.eval({1e-7, 0.0}) + std::log(1e-7) / (2.0 * kPi);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-3));
    // And the corrected value must blow up positively as r -> 0.
    CHECK(g.eval({1e-7, 0.0}) > g.eval({1e-5, 0.0}));
    CHECK(g.eval({1e-7, 0.0}) > 1.0);
}

TEST_CASE("evaluation is continuous across the near-origin patch boundary") {
    const auto spec = KernelSpec::for_tables(2.0);
    const auto g = KernelTable::build(Kind::green, spec);
    const double r = 2.0 / spec.grid_n;  // the patch radius
    const double inside = g.eval({r * 0.999, 0.0});
    const double outside = g.eval({r * 1.001, 0.0});
    CHECK(inside == doctest::Approx(outside).epsilon(5e-3));
}

TEST_CASE("kind names round-trip and reject junk") {
    for (Kind k : {Kind::green, Kind::yukawa, Kind::smooth})
        CHECK(kernels::kind_from_name(kernels::kind_name(k)) == k);
    CHECK(error_code([&] { kernels::kind_from_name("coulomb"); }) == "invalid-spec");
}

TEST_CASE("table CSV carries metadata, nodes, and the singular marker") {
    KernelSpec spec;
    spec.mass = 2.0;
    spec.cutoff = 8;
    spec.grid_n = 4;
    const auto g = KernelTable::build(Kind::green, spec);
    std::ostringstream ss;
    g.write_csv(ss);
    const std::string text = ss.str();
    CHECK(text.rfind("# green,2,8,4\r\n", 0) == 0);
    CHECK(text.find("i,j,value\r\n") != std::string::npos);
    CHECK(text.find("0,0,singular\r\n") != std::string::npos);
    // 1 metadata + 1 header + 16 node rows, CRLF terminated.
    int lines = 0;
    for (std::size_t pos = 0; (pos = text.find("\r\n", pos)) != std::string::npos; pos += 2)
        ++lines;
    CHECK(lines == 18);

    const auto v = KernelTable::build(Kind::smooth, spec);
    std::ostringstream sv;
    v.write_csv(sv);
    CHECK(sv.str().find("singular") == std::string::npos);
}

TEST_CASE("grid mean of the zero-mode-free kernels is near zero") {
    // All three kernels exclude the zero mode, so their torus average vanishes;
    // the grid mean sees only discretisation error (and diagonal exclusion).
    const auto spec = KernelSpec::for_tables(5.0);
    const auto v = KernelTable::build(Kind::smooth, spec);
    CHECK(std::abs(v.grid_mean()) < 1e-3);
}
