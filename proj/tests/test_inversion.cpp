#include <doctest.h>

#include <cmath>

#include "tq/inversion.hpp"
#include "tq/mms.hpp"
#include "tq/oracles.hpp"
#include "tq/rbm.hpp"
#include "tq/simulation.hpp"

using namespace tq;

TEST_CASE("closed transform pairs") {
    CHECK(std::abs(euler_invert([](Complex s) { return 1.0 / s; }, 7.3) - 1.0) < 1e-10);
    CHECK(std::abs(euler_invert([](Complex s) { return 1.0 / (s + 1.0); }, 1.0) - 0.36787944117144233) < 1e-9);
    for (double t : {0.1, 0.5, 2.0, 5.0})
        CHECK(std::abs(euler_invert([](Complex s) { return 1.0 / (s * s + 1.0); }, t) - std::sin(t)) < 1e-9);
    CHECK_THROWS_AS(euler_invert([](Complex s) { return 1.0 / s; }, 1.0, 13), InputError);
    CHECK_THROWS_AS(euler_invert([](Complex s) { return 1.0 / s; }, 0.0), InputError);
}

TEST_CASE("M/M/1 and M/M/2 transient pmfs match uniformization") {
    for (int s : {1, 2}) {
        const MmsParams p{1.0, 2.0 / s, s, {}};
        const auto gen = build_birth_death_generator(p.as_birth_death(80));
        for (int k : {0, 2}) {
            const auto f = [&](Complex z) {
                auto row = mms_pmf_row(k, 20, p, z);
                for (auto& x : row) x /= z;
                return row;
            };
            for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
                const auto inv = euler_invert_vector(f, t);
                const auto u = uniformization_pmf(gen, k, t);
                for (int n = 0; n <= 20; ++n) CHECK(std::abs(inv[n] - u[n]) < 1e-6);
            }
        }
    }
}

TEST_CASE("RBM survival inversion is a distribution function") {
    for (double t : {0.5, 1.0, 3.0}) {
        double prev = 1.0;
        for (double x : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const double v = euler_invert([&](Complex s) { return rbm_survival_transform(x, 1.0, s) / s; }, t);
            CHECK(v <= prev + 1e-9);
            CHECK(v >= -1e-9);
            prev = v;
        }
    }
    CHECK(std::abs(euler_invert([](Complex s) { return rbm_survival_transform(0.0, 1.0, s) / s; }, 1.0) - 1.0) < 1e-9);
}

TEST_CASE("inverted RBM survival matches simulated fixed-time CDF") {
    const double x0 = 1.0, t = 1.0;
    const std::int64_t n = 100000;
    const auto sim = simulate_rbm_at(x0, t, n, 1e-3, 17);
    int covered = 0, total = 0;
    for (double x : {0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
        const double exact = euler_invert([&](Complex s) { return rbm_survival_transform(x, x0, s) / s; }, t);
        double above = 0.0;
        for (double v : sim.level) above += v > x ? 1.0 : 0.0;
        above /= static_cast<double>(n);
        const double sigma = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n));
        ++total;
        if (std::abs(above - exact) <= 3.0 * sigma) ++covered;
    }
    CHECK(covered >= total - 1);
}
