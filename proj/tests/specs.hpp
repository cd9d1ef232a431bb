#pragma once

#include "tq/model.hpp"

// Chains shared by the test suites.
namespace specs {

inline tq::MarkovPrpSpec mm1(double lambda = 1.0, double mu = 2.0) {
    tq::MarkovPrpSpec s;
    s.single_arrival = tq::RateMap::constant(lambda);
    s.service = tq::RateMap::constant(mu);
    return s;
}

inline tq::MarkovPrpSpec batch() {
    auto s = mm1();
    s.batch_rate = tq::RateMap::constant(0.5);
    s.batch_sizes = tq::JumpSizes::fixed({0.5, 0.5});
    return s;
}

inline tq::MarkovPrpSpec catastrophe() {
    auto s = mm1();
    s.catastrophe_rate = tq::RateMap::constant(0.3);
    s.catastrophe_sizes = tq::JumpSizes::fixed({0.7, 0.3});
    return s;
}

inline tq::MarkovPrpSpec combined() {
    auto s = batch();
    s.catastrophe_rate = tq::RateMap::constant(0.3);
    s.catastrophe_sizes = tq::JumpSizes::fixed({0.7, 0.3});
    return s;
}

// Up one at rate 1, every catastrophe empties the system.
inline tq::MarkovPrpSpec disasters() {
    tq::MarkovPrpSpec s;
    s.single_arrival = tq::RateMap::constant(1.0);
    s.catastrophe_rate = tq::RateMap::constant(1.0);
    s.catastrophe_sizes = tq::JumpSizes::reset_to(0);
    s.reflection_level = 0;
    return s;
}

// Up 1 at rate 1, up 2 at rate 0.5, down 1 at rate 2.
inline tq::MarkovPrpSpec compound() {
    auto s = mm1();
    s.batch_rate = tq::RateMap::constant(0.5);
    s.batch_sizes = tq::JumpSizes::fixed({0.0, 1.0});
    return s;
}

inline tq::MarkovPrpSpec state_dependent() {
    auto s = mm1();
    s.service = tq::RateMap::linear(1.0);
    return s;
}

} // namespace specs
