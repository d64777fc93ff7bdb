#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "vortexgas/common.hpp"
#include "vortexgas/parallel.hpp"
#include "vortexgas/rng.hpp"

using namespace vortexgas;

TEST_CASE("torus wrapping maps into the fundamental cells") {
    CHECK(wrap_unit(0.25) == doctest::Approx(0.25));
    CHECK(wrap_unit(1.25) == doctest::Approx(0.25));
    CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
    CHECK(wrap_unit(0.0) == 0.0);
    // A tiny negative argument must not wrap to exactly 1.
    CHECK(wrap_unit(-1e-18) < 1.0);
    CHECK(wrap_unit(-1e-18) >= 0.0);

    const Vec2 d = wrap_disp({0.75, -0.75});
    CHECK(d.x == doctest::Approx(-0.25));
    CHECK(d.y == doctest::Approx(0.25));
    CHECK(wrap_disp({0.5, 0.0}).x == doctest::Approx(-0.5));
}

TEST_CASE("torus distance respects periodicity and symmetry") {
    const Vec2 a{0.1, 0.9};
    const Vec2 b{0.9, 0.1};
    CHECK(torus_dist(a, b) == doctest::Approx(std::sqrt(0.08)));
    CHECK(torus_dist(a, b) == doctest::Approx(torus_dist(b, a)));
    CHECK(torus_dist(a, a) == 0.0);
    // Shifting both points by a lattice vector changes nothing.
    const Vec2 a2{a.x + 3.0, a.y - 2.0};
    CHECK(torus_dist({wrap_unit(a2.x), wrap_unit(a2.y)}, b) == doctest::Approx(torus_dist(a, b)));
}

TEST_CASE("Kahan summation keeps small terms that naive addition drops") {
    KahanSum k;
    double naive = 0.0;
    k.add(1.0);
    naive += 1.0;
    for (int i = 0; i < 10000000; ++i) {
        k.add(1e-16);
        naive += 1e-16;
    }
    CHECK(k.value() == doctest::Approx(1.0 + 1e-9).epsilon(1e-12));
    CHECK(std::abs(naive - (1.0 + 1e-9)) > 1e-10);  // the control: naive really loses it
}

TEST_CASE("MeanAccumulator matches direct mean, variance and stderr") {
    const std::vector<double> xs = {1.0, 2.0, 4.0, 8.0, 16.0};
    MeanAccumulator acc;
    for (double x : xs) acc.add(x);
    const double mean = 6.2;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / 4.0;
    CHECK(acc.mean() == doctest::Approx(mean));
    CHECK(acc.variance() == doctest::Approx(var));
    CHECK(acc.stderr_of_mean() == doctest::Approx(std::sqrt(var / 5.0)));
    const Estimate e = acc.estimate("direct");
    CHECK(e.n_samples == 5);
    CHECK(e.method == "direct");
}

TEST_CASE("ordinary least squares recovers an exact line") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> y = {3.5, 5.0, 6.5, 8.0, 9.5};
    const LinearFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(1.5));
    CHECK(f.intercept == doctest::Approx(2.0));
    CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ordinary least squares stderr matches the textbook formula") {
    const std::vector<double> x = {0, 1, 2, 3};
    const std::vector<double> y = {0.0, 1.1, 1.9, 3.2};
    const LinearFit f = fit_line(x, y);
    // Direct computation: slope 1.04, intercept -0.01, s^2 = SSR/2.
    CHECK(f.slope == doctest::Approx(1.04));
    CHECK(f.intercept == doctest::Approx(-0.01));
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    const double sxx = 5.0;  // sum (x - 1.5)^2
    CHECK(f.slope_stderr == doctest::Approx(std::sqrt(ssr / 2.0 / sxx)));
}

TEST_CASE("weighted least squares follows the trusted points") {
    const std::vector<double> x = {0, 1, 2, 3};
    const std::vector<double> y = {0.0, 1.0, 2.0, 9.0};
    // The outlier carries a huge sigma, so the fit should ignore it.
    const std::vector<double> sigma = {1e-3, 1e-3, 1e-3, 1e3};
    const LinearFit f = fit_line_weighted(x, y, sigma);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-6));
    // Weight-matrix stderr for unit-ish weights: 1/sqrt(sum w dx^2).
    CHECK(f.slope_stderr == doctest::Approx(1e-3 / std::sqrt(2.0 / 3.0)).epsilon(1e-3));
}

TEST_CASE("format_double round-trips exactly and uses the dot decimal") {
    const std::vector<double> vals = {0.0,      1.0,        -1.5,       1e-10,   3.14159,
                                      1e300,    -2.5e-308,  0.1,        1.0 / 3, 123456789.0,
                                      6.02e23,  -7.25e-9};
    for (double v : vals) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find(',') == std::string::npos);
    }
    CHECK(format_double(1e-10) == "1e-10");
}

TEST_CASE("Error carries a stable machine-readable code") {
    const Error e("bad-range", "details here");
    CHECK(e.code() == "bad-range");
    CHECK(std::string(e.what()).find("bad-range") != std::string::npos);
    CHECK(std::string(e.what()).find("details here") != std::string::npos);
}

TEST_CASE("counter streams are deterministic and id-separated") {
    rng::Stream a(42, 7), b(42, 7), c(42, 8);
    bool identical = true, distinct = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        if (va != b.next_u64()) identical = false;
        if (va != c.next_u64()) distinct = true;
    }
    CHECK(identical);
    CHECK(distinct);
}

TEST_CASE("uniform and normal draws have sane first moments") {
    rng::Stream s(123, 0);
    MeanAccumulator u, n2;
    for (int i = 0; i < 20000; ++i) u.add(s.next_unit());
    CHECK(u.mean() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(u.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.05));
    for (int i = 0; i < 20000; ++i) {
        double a, b;
        s.next_normal_pair(a, b);
        n2.add(a * a);
        n2.add(b * b);
    }
    CHECK(n2.mean() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("next_unit stays inside the open interval") {
    rng::Stream s(99, 1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.next_unit();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("parallel_for visits every index exactly once") {
    const long long n = 1000;
    std::vector<std::atomic<int>> hits(n);
    for (auto& h : hits) h.store(0);
    parallel_for(n, [&](long long i) { hits[static_cast<std::size_t>(i)].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("thread budget honours the environment cap") {
    // The cap is read per call, so a temporary override is visible.
    setenv("VORTEXGAS_THREADS", "3", 1);
    CHECK(thread_budget() == 3);
    setenv("VORTEXGAS_THREADS", "1", 1);
    CHECK(thread_budget() == 1);
    unsetenv("VORTEXGAS_THREADS");
    CHECK(thread_budget() >= 1);
}
