#include <doctest.h>

#include <cmath>

#include "reference.hpp"
#include "tq/transforms.hpp"

using namespace tq;

namespace {

BirthDeathSpec mm1_chain(double lambda, double mu, int truncation = 400) {
    BirthDeathSpec s;
    s.birth = RateMap::constant(lambda);
    s.death = RateMap::constant(mu);
    s.truncation = truncation;
    return s;
}

BirthDeathSpec mminfty_chain(double lambda, double mu, int truncation = 200) {
    BirthDeathSpec s;
    s.birth = RateMap::constant(lambda);
    s.death = RateMap::linear(mu);
    s.truncation = truncation;
    return s;
}

} // namespace

TEST_CASE("kummer_m1 at z = 0 is 1") {
    CHECK(kummer_m1(Complex(1.0 / 3.0 + 1.0), 0.0) == Complex(1.0));
    CHECK(kummer_m1(Complex(2.5, 1.0), 0.0) == Complex(1.0));
}

TEST_CASE("kummer_m1(2, -1) = 1 - 1/e") {
    const double frozen = 0.6321205588285577;
    CHECK(std::abs((std::exp(-1.0) - 1.0) / -1.0 - frozen) < 1e-15);
    CHECK(std::abs(kummer_m1(2.0, -1.0).real() - frozen) < 1e-14);
    CHECK(std::abs(kummer_m1_direct_series(2.0, -1.0).real() - frozen) < 1e-14);
}

TEST_CASE("kummer_m1 matches the integral representation on a parameter cube") {
    const double grid[] = {0.25, 1.0, 4.0};
    for (double q : grid)
        for (double mu : grid)
            for (double rho : grid) {
                CAPTURE(q);
                CAPTURE(mu);
                CAPTURE(rho);
                const double direct = ref::kummer_integral(q, mu, rho);
                CHECK(std::abs(kummer_m1(q / mu + 1.0, -rho).real() - direct) < 1e-10);
            }
}

TEST_CASE("kummer_m1 large |z| route agrees with the series route near the switch") {
    for (double b : {1.5, 3.0, 20.0}) {
        const double below = kummer_m1(b, -50.0).real();
        const double above = kummer_m1(b, -50.0000001).real();
        CHECK(std::abs(below - above) < 1e-8 * std::abs(below));
        CHECK(std::abs(kummer_m1(b, -80.0).real() - ref::kummer_integral(b - 1.0, 1.0, 80.0)) < 1e-10);
    }
}

TEST_CASE("kummer_m1 rejects invalid arguments") {
    CHECK_THROWS_AS(kummer_m1(Complex(0.0, 1.0), -1.0), InputError);
    CHECK_THROWS_AS(kummer_m1(2.0, 0.5), InputError);
    CHECK_THROWS_AS(kummer_m1(0.5, -60.0), NumericalError);
}

TEST_CASE("kummer_m1 with real b is real, complex b conjugates") {
    CHECK(kummer_m1(3.0, -4.0).imag() == 0.0);
    const Complex b(2.0, 1.5);
    const Complex a = kummer_m1(b, -3.0);
    const Complex c = kummer_m1(std::conj(b), -3.0);
    CHECK(std::abs(a - std::conj(c)) < 1e-15);
}

TEST_CASE("busy-period transform") {
    SUBCASE("root of the quadratic equals first-step fixed point") {
        const double frozen = 0.5857864376269050;  // 2 - sqrt(2)
        CHECK(std::abs(ref::psi_fixed_point(1.0, 2.0, 1.0) - frozen) < 1e-14);
        CHECK(std::abs(mm1_busy_period_lst(1.0, 2.0, 1.0).real() - frozen) < 1e-15);
    }
    SUBCASE("q -> 0 gives 1 when lambda < mu") {
        CHECK(std::abs(mm1_busy_period_lst(1.0, 2.0, 1e-12).real() - 1.0) < 1e-10);
    }
    SUBCASE("q -> 0 gives mu / lambda when lambda > mu") {
        CHECK(std::abs(mm1_busy_period_lst(2.0, 1.0, 1e-12).real() - 0.5) < 1e-10);
    }
    SUBCASE("two levels down is psi squared") {
        const double frozen = 0.3431457505076198;
        const double oracle = ref::dense_hitting([](int) { return 1.0; }, [](int) { return 2.0; }, 0, 300, 3, 1, 1.0);
        CHECK(std::abs(oracle - frozen) < 1e-12);
        CHECK(std::abs(std::pow(mm1_busy_period_lst(1.0, 2.0, 1.0).real(), 2) - frozen) < 1e-15);
    }
    SUBCASE("(1 - psi)/q is stable for tiny q") {
        CHECK(std::abs(mm1_busy_period_tail_transform(1.0, 2.0, 1e-14).real() - 1.0) < 1e-9);
        const double psi = mm1_busy_period_lst(1.0, 2.0, 1.0).real();
        CHECK(std::abs(mm1_busy_period_tail_transform(1.0, 2.0, 1.0).real() - (1.0 - psi)) < 1e-15);
    }
    CHECK_THROWS_AS(mm1_busy_period_lst(0.0, 1.0, 1.0), InputError);
}

TEST_CASE("bd_hitting_lst examples") {
    const auto mm1 = mm1_chain(1.0, 2.0);
    CHECK(bd_hitting_lst(mm1, 4, 4, 1.0) == Complex(1.0));
    CHECK(std::abs(bd_hitting_lst(mm1, 3, 1, 1.0).real() - 0.3431457505076198) < 1e-12);

    // M/M/inf, 0 -> 1: ratio of point pmfs by quadrature
    const double e = std::exp(-1.0);
    const double ratio = (1.0 - 2.0 * e) / (2.0 - 4.0 * e);
    const double num = ref::mminfty_at_exponential(0, 1, 1.0, 1.0, 1.0);
    const double den = ref::mminfty_at_exponential(1, 1, 1.0, 1.0, 1.0);
    CHECK(std::abs(num - (1.0 - 2.0 * e)) < 1e-12);
    CHECK(std::abs(den - (2.0 - 4.0 * e)) < 1e-12);
    CHECK(std::abs(ratio - 0.5) < 1e-15);
    CHECK(std::abs(bd_hitting_lst(mminfty_chain(1.0, 1.0), 0, 1, 1.0).real() - 0.5) < 1e-12);
}

TEST_CASE("bd_hitting_lst equals psi powers on M/M/1") {
    const auto mm1 = mm1_chain(1.0, 2.0);
    for (double q : {0.3, 1.0, 2.5}) {
        const Complex psi = mm1_busy_period_lst(1.0, 2.0, q);
        for (int d = 1; d <= 5; ++d) CHECK(std::abs(bd_hitting_lst(mm1, 10 + d, 10, q) - std::pow(psi, d)) < 1e-12);
    }
}

TEST_CASE("bd_hitting_lst agrees with a dense first-passage solve") {
    const auto birth = [](int) { return 1.5; };
    const auto death = [](int n) { return 0.7 * n; };
    BirthDeathSpec s;
    s.birth = RateMap::constant(1.5);
    s.death = RateMap::linear(0.7);
    s.upper = 30;
    for (int from : {0, 3, 12, 30})
        for (int target : {0, 5, 20}) {
            const double oracle = ref::dense_hitting(birth, death, 0, 30, from, target, 0.8);
            CHECK(std::abs(bd_hitting_lst(s, from, target, 0.8).real() - oracle) < 1e-12);
        }
}

TEST_CASE("hitting transforms lie in (0, 1] and decrease in q") {
    const auto chain = mminfty_chain(2.0, 1.0);
    for (auto [from, target] : {std::pair{0, 3}, {6, 2}, {1, 2}}) {
        double prev = 1.0 + 1e-15;
        for (double q : {0.01, 0.1, 0.5, 1.0, 2.0, 8.0}) {
            const double v = bd_hitting_lst(chain, from, target, q).real();
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("complex q conjugates every transform") {
    const Complex q(0.7, 1.3);
    const Complex psi = mm1_busy_period_lst(1.0, 2.0, q);
    CHECK(std::abs(psi - std::conj(mm1_busy_period_lst(1.0, 2.0, std::conj(q)))) < 1e-15);
    CHECK(std::abs(psi) <= 1.0);
    const auto chain = mminfty_chain(1.0, 1.0);
    for (auto [from, target] : {std::pair{0, 3}, {5, 1}}) {
        const Complex a = bd_hitting_lst(chain, from, target, q);
        const Complex b = bd_hitting_lst(chain, from, target, std::conj(q));
        CHECK(std::abs(a - std::conj(b)) < 1e-14);
    }
}

TEST_CASE("bd_hitting_lst signals an insufficient truncation") {
    auto drifting = mm1_chain(2.0, 1.0, 5);
    CHECK_THROWS_AS(bd_hitting_lst(drifting, 4, 0, 0.01), TruncationError);
    CHECK_THROWS_AS(bd_hitting_lst(drifting, 7, 0, 1.0), InputError);
}
