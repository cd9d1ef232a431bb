#include <doctest.h>

#include <cmath>
#include <Eigen/Dense>

#include "specs.hpp"
#include "tq/model_io.hpp"
#include "tq/oracles.hpp"

using namespace tq;

namespace {

Eigen::MatrixXd dense(const GeneratorMatrix& g) { return Eigen::MatrixXd(g.rates); }

void check_conservative(const SparseGenerator& g) {
    const Eigen::MatrixXd d(g);
    for (int i = 0; i < d.rows(); ++i) {
        CHECK(std::abs(d.row(i).sum()) < 1e-12);
        for (int j = 0; j < d.cols(); ++j)
            if (i != j) CHECK(d(i, j) >= 0.0);
    }
}

} // namespace

TEST_CASE("rate maps") {
    CHECK(RateMap::constant(2.0)(-5) == 2.0);
    CHECK(RateMap::linear(0.5)(4) == 2.0);
    CHECK(RateMap::linear(0.5)(-1) == 0.0);
    CHECK(RateMap::linear_capped(1.0, 3)(7) == 3.0);
    const auto t = RateMap::table(2, {1.0, 2.0, 3.0});
    CHECK(t(0) == 1.0);
    CHECK(t(3) == 2.0);
    CHECK(t(10) == 3.0);
    CHECK(RateMap::constant(1.0).is_level_independent(-5, 5));
    CHECK_FALSE(RateMap::linear(1.0).is_level_independent(0, 5));
    CHECK(RateMap::linear_capped(1.0, 3).is_level_independent(3, 10));
    CHECK_THROWS_AS(RateMap::constant(-1.0), InputError);
}

TEST_CASE("jump sizes") {
    const auto j = JumpSizes::fixed({0.25, 0.75});
    const auto at = j.at(3);
    REQUIRE(at.size() == 2);
    CHECK(at[1].first == 2);
    CHECK(at[1].second == 0.75);
    const auto cut = JumpSizes::fixed({0.5, 0.5 - 1e-14, 1e-14});
    CHECK(cut.at(0).size() == 2);
    double total = 0.0;
    for (auto [size, p] : cut.at(0)) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);
    const auto r = JumpSizes::reset_to(1);
    CHECK(r.at(1).empty());
    REQUIRE(r.at(4).size() == 1);
    CHECK(r.at(4)[0].first == 3);
    CHECK_THROWS_AS(JumpSizes::fixed({0.5, 0.2}), InputError);
}

TEST_CASE("all-zero spec gives the zero generator") {
    MarkovPrpSpec s;
    const auto g = build_level_generator(s, {0, 5});
    CHECK(dense(g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("M/M/1 from both construction paths") {
    BirthDeathSpec bd;
    bd.birth = RateMap::constant(1.0);
    bd.death = RateMap::constant(2.0);
    bd.upper = 30;
    const auto a = dense(build_birth_death_generator(bd));
    const auto b = dense(build_level_generator(specs::mm1().reflected_at(0), {0, 30}));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    check_conservative(build_birth_death_generator(bd).rates);
}

TEST_CASE("disasters-to-zero generator on four states") {
    const auto g = dense(build_level_generator(specs::disasters(), {0, 3}));
    Eigen::Matrix4d expected;
    expected << -1, 1, 0, 0,
                 1, -2, 1, 0,
                 1, 0, -2, 1,
                 1, 0, 0, -1;
    CHECK((g - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generators are conservative for every spec") {
    for (const auto& s : {specs::mm1(), specs::batch(), specs::catastrophe(), specs::combined(),
                          specs::compound(), specs::state_dependent()}) {
        check_conservative(build_level_generator(s, {-10, 20}).rates);
        check_conservative(build_level_generator(s.reflected_at(0), {0, 20}).rates);
        const auto j = build_joint_inf_generator(s, 3, {-5, 12});
        // the sink row is absorbing, every row still sums to zero
        check_conservative(j.rates);
    }
}

TEST_CASE("reflection only changes transitions that cross the level") {
    const auto s = specs::combined();
    const auto free = dense(build_level_generator(s, {-10, 20}));
    const auto refl = dense(build_level_generator(s.reflected_at(0), {0, 20}));
    for (int i = 2; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j)
            if (i != j) CHECK(free(i + 10, j + 10) == refl(i, j));
    // no service at the reflection level
    CHECK(refl(0, 0) == -1.5);
}

TEST_CASE("joint infimum generator") {
    SUBCASE("pure birth keeps the infimum and matches the level chain") {
        MarkovPrpSpec s;
        s.single_arrival = RateMap::constant(1.0);
        const auto j = build_joint_inf_generator(s, 0, {0, 10});
        for (int level = 0; level <= 10; ++level) {
            const int row = j.index_of(level, 0);
            if (level < 10) CHECK(j.rates.coeff(row, j.index_of(level + 1, 0)) == 1.0);
        }
        const auto p = joint_inf_resolvent(s, 0, 1.0, {0, 10});
        const auto law = p.infimum_law();
        CHECK(std::abs(law[0] - 1.0) < 1e-14);
    }
    SUBCASE("marginalizing over the infimum gives the level resolvent") {
        for (const auto& s : {specs::mm1(), specs::batch(), specs::catastrophe(), specs::combined()}) {
            const StateRange range{-90, 40};
            const auto joint = joint_inf_resolvent(s, 2, 1.0, range);
            const auto level = resolvent_pmf(build_level_generator(s, range), 2, 1.0);
            const auto marginal = joint.level_law();
            REQUIRE(marginal.size() == level.mass.size());
            // mass that crossed the floor is in the sink in one and lumped in the other
            CHECK(std::abs(joint.below_floor) < 1e-13);
            for (std::size_t i = 0; i < marginal.size(); ++i) CHECK(std::abs(marginal[i] - level.mass[i]) < 1e-10);
        }
    }
    SUBCASE("disasters from zero never lower the infimum") {
        const auto p = joint_inf_resolvent(specs::disasters(), 0, 1.0, {0, 30});
        CHECK(std::abs(p.infimum_law()[0] - 1.0) < 1e-14);
    }
}

TEST_CASE("model files round-trip") {
    const char* docs[] = {
        R"({"type": "mms", "lambda": 2, "mu": 1, "servers": 3})",
        R"({"type": "mmsk", "lambda": 1, "mu": 1, "servers": 2, "capacity": 5})",
        R"({"type": "rbm", "x0": 1.5})",
        R"({"type": "birth-death", "lower": 0, "upper": 12, "birth": 1.5,
            "death": {"kind": "linear-capped", "rate": 1, "cap": 3}})",
        R"({"type": "prp", "single_arrival": [1, 0.5, 0.25], "service": 2,
            "batch": {"rate": 0.5, "sizes": [0.5, 0.5]},
            "catastrophe": {"rate": 0.3, "sizes": {"kind": "per-level", "start": 0, "pmfs": [[1], [0.7, 0.3]]}},
            "reflection_level": 0, "truncation": {"lower": 0, "upper": 60}})",
        R"({"type": "prp", "single_arrival": 1, "catastrophe": {"rate": 1, "sizes": {"kind": "reset", "level": 0}},
            "reflection_level": 0})",
    };
    for (const char* doc : docs) {
        CAPTURE(doc);
        const Model m = parse_model(doc);
        const std::string text = serialize_model(m);
        CHECK(parse_model(text) == m);
        CHECK(serialize_model(parse_model(text)) == text);
    }
    CHECK(model_type(parse_model(docs[1])) == "mmsk");
    const auto mmsk = std::get<MmsParams>(parse_model(docs[1]));
    CHECK(mmsk.capacity == 5);
}

TEST_CASE("model files reject schema violations") {
    CHECK_THROWS_AS(parse_model(R"({"type": "mms", "lambda": 2, "mu": 1, "servers": 3, "extra": 1})"), InputError);
    CHECK_THROWS_AS(parse_model(R"({"type": "queue"})"), InputError);
    CHECK_THROWS_AS(parse_model(R"({"type": "mmsk", "lambda": 1, "mu": 1, "servers": 2, "capacity": 2})"), InputError);
    CHECK_THROWS_AS(parse_model(R"({"type": "prp", "service": -1})"), InputError);
    CHECK_THROWS_AS(parse_model("not json"), InputError);
    CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), InputError);
}
