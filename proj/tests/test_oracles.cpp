#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>

#include "reference.hpp"
#include "specs.hpp"
#include "tq/oracles.hpp"
#include "tq/parallel.hpp"
#include "tq/rbm.hpp"
#include "tq/simulation.hpp"

using namespace tq;

namespace {

GeneratorMatrix flip_chain() {
    BirthDeathSpec s;
    s.upper = 1;
    s.birth = RateMap::constant(1.0);
    s.death = RateMap::constant(1.0);
    return build_birth_death_generator(s);
}

} // namespace

TEST_CASE("two-state chain") {
    const auto g = flip_chain();
    const auto r = resolvent_pmf(g, 0, 1.0);
    CHECK(std::abs(r.at(0).real() - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(r.at(1).real() - 1.0 / 3.0) < 1e-15);
    const auto u0 = uniformization_pmf(g, 0, 0.0);
    CHECK(u0[0] == 1.0);
    CHECK(u0[1] == 0.0);
    const auto u1 = uniformization_pmf(g, 0, 1.0);
    CHECK(std::abs(u1[0] - 0.5676676416183064) < 1e-12);
    CHECK(std::abs(u1[1] - (1.0 - 0.5676676416183064)) < 1e-12);
}

TEST_CASE("resolvent rows") {
    for (const auto& spec : {specs::mm1(), specs::combined(), specs::disasters()}) {
        const auto refl = spec.reflection_level ? spec : spec.reflected_at(0);
        const auto g = build_level_generator(refl, {0, 60});
        for (TransformArgument q : {TransformArgument(0.3), TransformArgument(2.0), TransformArgument(Complex(1, 2))}) {
            const auto r = resolvent_pmf(g, 3, q);
            CHECK(std::abs(r.total() - 1.0) < 1e-12);
            if (q.is_real())
                for (auto m : r.mass) CHECK(m.real() >= -1e-15);
        }
        const auto big = resolvent_pmf(g, 3, 1e12);
        CHECK(std::abs(big.at(3) - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS(resolvent_pmf(flip_chain(), 0, 0.0), InputError);
}

TEST_CASE("truncation certification") {
    BirthDeathSpec s;
    s.birth = RateMap::constant(1.0);
    s.death = RateMap::constant(2.0);
    s.truncation = 60;
    const auto ok = certified_resolvent_pmf(s, 2, 1.0);
    CHECK(ok.certificate < 1e-9);
    s.truncation = 8;
    CHECK_THROWS_AS(certified_resolvent_pmf(s, 2, 1.0), TruncationError);
    CHECK_THROWS_AS(certified_resolvent_pmf(specs::combined(), {-5, 10}, 2, 0.5), TruncationError);
}

TEST_CASE("resolvent equals the Laplace transform of uniformization") {
    for (const auto& spec : {specs::mm1().reflected_at(0), specs::combined().reflected_at(0), specs::disasters()}) {
        const auto g = build_level_generator(spec, {0, 40});
        const double q = 0.8;
        const auto r = resolvent_pmf(g, 2, q);
        for (int n : {0, 1, 2, 5}) {
            const double lt = ref::integrate([&](double t) { return q * std::exp(-q * t) * uniformization_pmf(g, 2, t)[n]; },
                                             0.0, 60.0);
            CHECK(std::abs(lt - r.at(n).real()) < 1e-8);
        }
    }
}

TEST_CASE("PRP simulation") {
    SUBCASE("no events") {
        const auto sim = simulate_prp(MarkovPrpSpec{}, 4, 1.0, 1000, 7, 2);
        CHECK(sim.probability(4, 4) == 1.0);
        CHECK(sim.counts.size() == 1);
    }
    SUBCASE("reproducible and independent of the thread count") {
        const auto a = simulate_prp(specs::combined(), 2, 1.0, 20000, 11, 1);
        const auto b = simulate_prp(specs::combined(), 2, 1.0, 20000, 11, 3);
        const auto c = simulate_prp(specs::combined(), 2, 1.0, 20000, 12, 1);
        CHECK(a.counts == b.counts);
        CHECK(a.counts != c.counts);
    }
    SUBCASE("joint law covers the resolvent") {
        for (const auto& spec : {specs::mm1(), specs::combined()}) {
            const auto sim = simulate_prp(spec, 2, 1.0, 200000, 5);
            const auto oracle = joint_inf_resolvent(spec, 2, 1.0, {-40, 40});
            int cells = 0, covered = 0;
            for (int inf = -10; inf <= 2; ++inf)
                for (int level = inf; level <= 15; ++level) {
                    const double p = oracle.at(level, inf).real();
                    if (p < 1e-3) continue;
                    ++cells;
                    if (std::abs(sim.probability(level, inf) - p) <= sim.half_width(level, inf)) ++covered;
                }
            CHECK(cells >= 15);
            CHECK(covered >= 0.9 * cells);
        }
    }
}

TEST_CASE("RBM simulation") {
    SUBCASE("reproducible and independent of the thread count") {
        const auto a = simulate_rbm(1.0, 1.0, 2000, 1e-2, 3, 1);
        const auto b = simulate_rbm(1.0, 1.0, 2000, 1e-2, 3, 4);
        CHECK(a.level == b.level);
        CHECK(a.infimum == b.infimum);
    }
    SUBCASE("hitting probability of zero") {
        const auto s = simulate_rbm(1.0, 1.5, 100000, 1e-3, 21);
        const double p = std::exp(-1.0);
        const double sigma = std::sqrt(p * (1.0 - p) / 100000.0);
        CHECK(std::abs(s.atom_fraction() - p) < 3.0 * sigma);
    }
    SUBCASE("histogram from zero is exponential") {
        const auto s = simulate_rbm(0.0, 1.5, 50000, 1e-3, 8);
        std::vector<double> edges;
        for (int i = 0; i <= 20; ++i) edges.push_back(0.1 * i);
        const auto h = s.level_histogram(edges);
        int covered = 0;
        for (int i = 0; i < 20; ++i) {
            const double exact = std::exp(-3.0 * edges[i]) - std::exp(-3.0 * edges[i + 1]);
            const double sigma = std::sqrt(exact * (1.0 - exact) / 50000.0);
            if (std::abs(h.estimate[i] - exact) <= 3.0 * sigma) ++covered;
        }
        CHECK(covered >= 18);
    }
    SUBCASE("halving dt moves bins by less than the half-width") {
        std::vector<double> edges{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
        const auto a = simulate_rbm(1.0, 1.0, 40000, 2e-2, 9).level_histogram(edges);
        const auto b = simulate_rbm(1.0, 1.0, 40000, 1e-2, 9).level_histogram(edges);
        for (std::size_t i = 0; i < a.estimate.size(); ++i)
            CHECK(std::abs(a.estimate[i] - b.estimate[i]) < std::max(a.half_width[i], b.half_width[i]));
    }
}

TEST_CASE("parallel helpers") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(stream_seed(1, i));
    CHECK(seeds.size() == 1000);
    CHECK(stream_seed(1, 5) == stream_seed(1, 5));
    CHECK(stream_seed(1, 5) != stream_seed(2, 5));

    std::atomic<std::int64_t> sum{0};
    parallel_for(1001, 4, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) sum += i;
    });
    CHECK(sum == 1001 * 1000 / 2);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::int64_t, std::int64_t) { throw NumericalError("x"); }), NumericalError);

    CHECK(resolve_threads(3) == 3);
    setenv("TQ_THREADS", "2", 1);
    CHECK(resolve_threads(std::nullopt) == 2);
    unsetenv("TQ_THREADS");
    CHECK(resolve_threads(std::nullopt) >= 1);
    CHECK_THROWS_AS(resolve_threads(0), InputError);
}
