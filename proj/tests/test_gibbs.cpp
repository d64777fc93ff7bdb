#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vortexgas/common.hpp"
#include "vortexgas/gibbs.hpp"
#include "vortexgas/kernels.hpp"
#include "vortexgas/rng.hpp"

using namespace vortexgas;
using gibbs::EnsembleParams;
using gibbs::VortexConfig;

namespace {

std::string error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

kernels::KernelTable small_table(kernels::Kind kind, double mass) {
    kernels::KernelSpec spec;
    spec.mass = mass;
    spec.cutoff = 12;
    spec.grid_n = 64;
    return kernels::KernelTable::build(kind, spec);
}

}  // namespace

TEST_CASE("two-vortex energy is minus the kernel at the separation") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    VortexConfig cfg;
    cfg.plus = {{0.15, 0.35}};
    cfg.minus = {{0.65, 0.80}};
    const double h = gibbs::hamiltonian(cfg, table);
    CHECK(h == doctest::Approx(-table.eval({0.15 - 0.65, 0.35 - 0.80})).epsilon(1e-14));
}

TEST_CASE("four-vortex energy matches the explicit signed pair sum") {
    const auto table = small_table(kernels::Kind::smooth, 4.0);
    const Vec2 a{0.1, 0.2}, b{0.45, 0.7}, c{0.9, 0.05}, d{0.3, 0.55};
    VortexConfig cfg;
    cfg.plus = {a, b};
    cfg.minus = {c, d};
    auto K = [&](Vec2 u, Vec2 v) { return table.eval({u.x - v.x, u.y - v.y}); };
    const double expected =
        K(a, b) + K(c, d) - K(a, c) - K(a, d) - K(b, c) - K(b, d);
    CHECK(gibbs::hamiltonian(cfg, table) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("energy is invariant under a common translation") {
    const auto table = small_table(kernels::Kind::green, 1.0);
    VortexConfig cfg;
    cfg.plus = {{0.12, 0.81}, {0.44, 0.27}};
    cfg.minus = {{0.66, 0.09}, {0.93, 0.58}};
    const double before = gibbs::hamiltonian(cfg, table);
    VortexConfig moved = cfg;
    for (auto* side : {&moved.plus, &moved.minus})
        for (auto& v : *side) v = {wrap_unit(v.x + 0.37), wrap_unit(v.y + 0.59)};
    CHECK(gibbs::hamiltonian(moved, table) == doctest::Approx(before).epsilon(1e-11));
}

TEST_CASE("coincident vortices are reported with a dedicated code") {
    const auto table = small_table(kernels::Kind::green, 1.0);
    VortexConfig cfg;
    cfg.plus = {{0.4, 0.4}, {0.4, 0.4}};
    cfg.minus = {{0.1, 0.9}, {0.7, 0.2}};
    CHECK(error_code([&] { gibbs::hamiltonian(cfg, table); }) == "coincident-vortices");
}

TEST_CASE("ensemble parameter validation") {
    EnsembleParams p;
    p.n_vortices = 7;
    CHECK(error_code([&] { p.validate(); }) == "invalid-spec");
    p.n_vortices = 8;
    p.beta = -0.1;
    CHECK(error_code([&] { p.validate(); }) == "invalid-spec");
    p.beta = 4.0 * kPi * 8;  // upper edge excluded
    CHECK(error_code([&] { p.validate(); }) == "invalid-spec");
    p.beta = 1.0;
    p.h = 5;  // more tags than + vortices
    CHECK(error_code([&] { p.validate(); }) == "invalid-spec");
    p.h = 1;
    CHECK(error_code([&] { p.validate(); }) == "");
}

TEST_CASE("partition estimate obeys the convexity lower bound") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    p.beta = 1.0;
    p.n_vortices = 4;
    const auto z = gibbs::partition_estimate(p, table, 5000, 3);
    CHECK(z.n_samples == 5000);
    CHECK(z.value + 3.0 * z.stderr_ >= 1.0);
    CHECK(error_code([&] { gibbs::partition_estimate(p, table, 1, 3); }) ==
          "insufficient-samples");
}

TEST_CASE("partition estimate at infinite temperature is exactly one") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    p.beta = 0.0;
    p.n_vortices = 4;
    const auto z = gibbs::partition_estimate(p, table, 200, 9);
    CHECK(z.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(z.stderr_ == doctest::Approx(0.0));
}

TEST_CASE("partition estimate is independent of the worker count") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    const auto a = gibbs::partition_estimate(p, table, 2000, 11);
    setenv("VORTEXGAS_THREADS", "1", 1);
    const auto b = gibbs::partition_estimate(p, table, 2000, 11);
    unsetenv("VORTEXGAS_THREADS");
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("chain construction validates the proposal width") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    CHECK(error_code([&] { gibbs::McmcChain(p, table, 0.0, 1); }) == "invalid-spec");
    CHECK(error_code([&] { gibbs::McmcChain(p, table, 0.6, 1); }) == "invalid-spec");
}

TEST_CASE("chain at infinite temperature accepts every proposal") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    p.beta = 0.0;
    gibbs::McmcChain chain(p, table, 0.1, 21);
    for (int i = 0; i < 500; ++i) chain.step();
    CHECK(chain.steps() == 500);
    CHECK(chain.acceptance_rate() == doctest::Approx(1.0));
}

TEST_CASE("chains with equal seeds agree; different seeds do not") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    gibbs::McmcChain a(p, table, 0.12, 5), b(p, table, 0.12, 5), c(p, table, 0.12, 6);
    for (int i = 0; i < 300; ++i) {
        a.step();
        b.step();
        c.step();
    }
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.config().plus.size(); ++i) {
        same = same && a.config().plus[i].x == b.config().plus[i].x &&
               a.config().plus[i].y == b.config().plus[i].y;
        differs = differs || a.config().plus[i].x != c.config().plus[i].x;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("materialised chain honours burn-in and thinning bookkeeping") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    p.n_vortices = 4;
    const auto kept = gibbs::mcmc_chain(p, table, 400, 0.15, 7, 50, 10);
    CHECK(kept.size() == 40);
    for (const auto& cfg : kept) {
        CHECK(cfg.plus.size() == 2);
        CHECK(cfg.minus.size() == 2);
        for (const auto& v : cfg.plus) {
            CHECK(v.x >= 0.0);
            CHECK(v.x < 1.0);
        }
    }
}

TEST_CASE("correlation histogram of uniform pairs is flat within errors") {
    EnsembleParams p;
    p.n_vortices = 8;
    rng::Stream s(31, 0);
    const int n_configs = 2000;
    gibbs::CorrelationAccumulator acc(p, 4, 16, n_configs);
    for (int i = 0; i < n_configs; ++i) {
        VortexConfig cfg;
        for (int j = 0; j < 4; ++j) cfg.plus.push_back({s.next_unit(), s.next_unit()});
        for (int j = 0; j < 4; ++j) cfg.minus.push_back({s.next_unit(), s.next_unit()});
        acc.add(cfg);
    }
    const auto est = acc.finalize();
    CHECK(est.n_configs == n_configs);
    CHECK(est.total_counts == 16LL * n_configs);
    double mean = 0.0;
    for (double d : est.density) mean += d;
    CHECK(mean / double(est.density.size()) == doctest::Approx(1.0).epsilon(1e-12));
    for (int bi = 0; bi < 4; ++bi)
        for (int bj = 0; bj < 4; ++bj)
            CHECK(std::abs(est.value(bi, bj) - 1.0) <= 5.0 * est.stderr_bin(bi, bj));

    const auto dist = gibbs::lp_distance(est, 2.0);
    CHECK(dist.noise_floor_hint ==
          doctest::Approx(std::sqrt(16.0 / double(est.total_counts))));
    // A flat sample sits at the histogram noise floor, not far above it.
    CHECK(dist.distance.value <= 4.0 * dist.noise_floor_hint);
    CHECK(error_code([&] { gibbs::lp_distance(est, 0.5); }) == "bad-range");
}

TEST_CASE("one-point density mode bins absolute positions") {
    EnsembleParams p;
    p.n_vortices = 4;
    p.h = 1;
    p.l = 0;
    rng::Stream s(37, 1);
    gibbs::CorrelationAccumulator acc(p, 2, 4, 500);
    for (int i = 0; i < 500; ++i) {
        VortexConfig cfg;
        for (int j = 0; j < 2; ++j) cfg.plus.push_back({s.next_unit(), s.next_unit()});
        for (int j = 0; j < 2; ++j) cfg.minus.push_back({s.next_unit(), s.next_unit()});
        acc.add(cfg);
    }
    const auto est = acc.finalize();
    CHECK(est.total_counts == 1000);  // only the + side is tagged
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            CHECK(std::abs(est.value(bi, bj) - 1.0) <= 5.0 * est.stderr_bin(bi, bj));
}

TEST_CASE("correlation accumulator rejects undersized setups") {
    EnsembleParams p;
    CHECK(error_code([&] { gibbs::CorrelationAccumulator(p, 1, 4, 10); }) == "invalid-spec");
    CHECK(error_code([&] { gibbs::CorrelationAccumulator(p, 4, 1, 10); }) == "invalid-spec");
    EnsembleParams wide;
    wide.n_vortices = 8;
    wide.h = 2;
    wide.l = 2;  // h + l = 4 unsupported
    CHECK(error_code([&] { gibbs::CorrelationAccumulator(wide, 4, 4, 10); }) == "invalid-spec");
    CHECK(error_code([&] {
              gibbs::correlation_estimate(std::vector<VortexConfig>{}, p, 4);
          }) == "insufficient-samples");
    // A single configuration cannot reach 10 counts per bin.
    VortexConfig cfg;
    cfg.plus = {{0.1, 0.1}, {0.3, 0.8}, {0.6, 0.2}, {0.9, 0.5}};
    cfg.minus = {{0.2, 0.6}, {0.5, 0.9}, {0.7, 0.4}, {0.95, 0.05}};
    CHECK(error_code([&] {
              gibbs::correlation_estimate({cfg}, EnsembleParams{1.0, 8, 1, 1}, 4);
          }) == "insufficient-samples");
}

TEST_CASE("chain and correlation CSV writers emit the documented headers") {
    const auto table = small_table(kernels::Kind::smooth, 5.0);
    EnsembleParams p;
    p.n_vortices = 4;
    const auto kept = gibbs::mcmc_chain(p, table, 80, 0.15, 7, 20, 10);
    std::ostringstream chain_os;
    gibbs::write_chain_csv(chain_os, kept);
    CHECK(chain_os.str().rfind("step,sign,index,x,y\r\n", 0) == 0);

    rng::Stream s(41, 0);
    gibbs::CorrelationAccumulator acc(p, 2, 4, 300);
    for (int i = 0; i < 300; ++i) {
        VortexConfig cfg;
        for (int j = 0; j < 2; ++j) cfg.plus.push_back({s.next_unit(), s.next_unit()});
        for (int j = 0; j < 2; ++j) cfg.minus.push_back({s.next_unit(), s.next_unit()});
        acc.add(cfg);
    }
    std::ostringstream corr_os;
    gibbs::write_correlation_csv(corr_os, acc.finalize());
    CHECK(corr_os.str().rfind("bin_i,bin_j,value,stderr\r\n", 0) == 0);
}
