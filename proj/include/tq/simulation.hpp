#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tq/model.hpp"

namespace tq {

/// Two-sided normal quantile for 99% confidence.
inline constexpr double kZ99 = 2.5758293035489004;

/// Empirical probabilities with 99% normal-approximation half-widths.
struct SimulationEstimate {
    std::vector<double> estimate;
    std::vector<double> half_width;
    std::int64_t replications = 0;
    std::uint64_t seed = 0;
};

/// Counts of (Q(e_q), inf_{u <= e_q} Q(u)) over replications.
struct PrpSimulation {
    int initial = 0;
    std::int64_t replications = 0;
    std::uint64_t seed = 0;
    std::map<std::pair<int, int>, std::int64_t> counts;  // (level, infimum) -> count

    double probability(int level, int infimum) const;
    double standard_error(int level, int infimum) const;
    double half_width(int level, int infimum) const { return kZ99 * standard_error(level, infimum); }
};

/// Gillespie simulation of the level process up to an exact e_q draw.
/// Replication r uses its own stream derived from (seed, r), so results do
/// not depend on the thread count. NumericalError after 1e7 events in one path.
PrpSimulation simulate_prp(const MarkovPrpSpec& spec, int initial, double q, std::int64_t replications,
                           std::uint64_t seed, std::optional<int> threads = std::nullopt);

/// (R(e_q), inf R) samples for the drift -1, unit-variance regulated motion.
struct RbmSamples {
    double x0 = 0.0;
    double q = 0.0;  // killing rate; 0 for a fixed horizon
    double t = 0.0;  // fixed horizon; 0 when killed at e_q
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> level;
    std::vector<double> infimum;

    /// Fraction of paths whose infimum is 0 (the regulator was active).
    double atom_fraction() const;
    /// Bin probabilities of R(e_q) over edges[i]..edges[i+1].
    SimulationEstimate level_histogram(const std::vector<double>& edges) const;
};

/// Gaussian increments of the free motion on a grid of width dt (the last
/// step is cut at e_q), with the running minimum between grid points drawn
/// from the Brownian-bridge minimum law whenever it can matter. R is the free
/// motion minus min(0, its running minimum).
RbmSamples simulate_rbm(double x0, double q, std::int64_t replications, double dt, std::uint64_t seed,
                        std::optional<int> threads = std::nullopt);

/// Same paths observed at the fixed time t instead of e_q.
RbmSamples simulate_rbm_at(double x0, double t, std::int64_t replications, double dt, std::uint64_t seed,
                           std::optional<int> threads = std::nullopt);

} // namespace tq
