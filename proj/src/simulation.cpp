#include "tq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "tq/errors.hpp"
#include "tq/parallel.hpp"

namespace tq {

namespace {

constexpr std::int64_t kEventCap = 10000000;
constexpr double kBridgeExponentCut = 40.0;

using Engine = boost::random::mt19937_64;

} // namespace

double PrpSimulation::probability(int level, int infimum) const {
    const auto it = counts.find({level, infimum});
    if (it == counts.end() || replications == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(replications);
}

double PrpSimulation::standard_error(int level, int infimum) const {
    const double p = probability(level, infimum);
    return replications > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(replications)) : 0.0;
}

PrpSimulation simulate_prp(const MarkovPrpSpec& spec, int initial, double q, std::int64_t replications,
                           std::uint64_t seed, std::optional<int> threads) {
    spec.validate();
    if (!(q > 0.0)) throw InputError("simulation needs q > 0");
    if (replications < 1) throw InputError("need at least one replication");
    if (spec.reflection_level && initial < *spec.reflection_level)
        throw InputError("initial level below the reflection level");

    const int workers = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), replications));
    std::vector<std::map<std::pair<int, int>, std::int64_t>> partial(static_cast<std::size_t>(workers));
    parallel_for(workers, workers, [&](std::int64_t w_begin, std::int64_t w_end) {
        for (std::int64_t w = w_begin; w < w_end; ++w) {
            auto& counts = partial[static_cast<std::size_t>(w)];
            const std::int64_t begin = replications * w / workers;
            const std::int64_t end = replications * (w + 1) / workers;
            for (std::int64_t r = begin; r < end; ++r) {
                Engine rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
                boost::random::uniform_01<double> unif;
                const double horizon = boost::random::exponential_distribution<double>(q)(rng);
                double t = 0.0;
                int level = initial;
                int inf = initial;
                for (std::int64_t events = 0;; ++events) {
                    if (events >= kEventCap)
                        throw NumericalError("simulation path exceeded 1e7 events (rates misconfigured?)");
                    const auto moves = spec.transitions(level);
                    double total = 0.0;
                    for (const auto& m : moves) total += m.rate;
                    if (total <= 0.0) break;
                    t += boost::random::exponential_distribution<double>(total)(rng);
                    if (t >= horizon) break;
                    double pick = unif(rng) * total;
                    std::size_t i = 0;
                    while (i + 1 < moves.size() && pick >= moves[i].rate) pick -= moves[i++].rate;
                    level = moves[i].target;
                    inf = std::min(inf, level);
                }
                ++counts[{level, inf}];
            }
        }
    });

    PrpSimulation out;
    out.initial = initial;
    out.replications = replications;
    out.seed = seed;
    for (const auto& counts : partial)
        for (const auto& [cell, c] : counts) out.counts[cell] += c;
    return out;
}

double RbmSamples::atom_fraction() const {
    if (infimum.empty()) return 0.0;
    const auto hits = std::count(infimum.begin(), infimum.end(), 0.0);
    return static_cast<double>(hits) / static_cast<double>(infimum.size());
}

SimulationEstimate RbmSamples::level_histogram(const std::vector<double>& edges) const {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        throw InputError("histogram edges must be increasing");
    SimulationEstimate est;
    est.replications = static_cast<std::int64_t>(level.size());
    est.seed = seed;
    std::vector<std::int64_t> counts(edges.size() - 1, 0);
    for (double x : level) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        if (it == edges.begin() || it == edges.end()) continue;
        ++counts[static_cast<std::size_t>(it - edges.begin() - 1)];
    }
    const double n = static_cast<double>(level.size());
    for (auto c : counts) {
        const double p = n > 0 ? c / n : 0.0;
        est.estimate.push_back(p);
        est.half_width.push_back(n > 0 ? kZ99 * std::sqrt(p * (1.0 - p) / n) : 0.0);
    }
    return est;
}

namespace {

// Paths of the regulated motion up to horizon(rng); fills level and infimum.
template <typename Horizon>
void run_rbm_paths(RbmSamples& out, std::int64_t replications, std::optional<int> threads, Horizon horizon_of) {
    out.level.resize(static_cast<std::size_t>(replications));
    out.infimum.resize(static_cast<std::size_t>(replications));
    const double dt = out.dt;
    const double sqrt_dt = std::sqrt(dt);
    parallel_for(replications, resolve_threads(threads), [&](std::int64_t begin, std::int64_t end) {
        boost::random::normal_distribution<double> normal;
        boost::random::uniform_01<double> unif;
        for (std::int64_t r = begin; r < end; ++r) {
            Engine rng(stream_seed(out.seed, static_cast<std::uint64_t>(r)));
            const double horizon = horizon_of(rng);
            double b = out.x0; // free motion
            double low = b;    // its running minimum
            double t = 0.0;
            while (t < horizon) {
                const double h = std::min(dt, horizon - t);
                const double step_sd = h == dt ? sqrt_dt : std::sqrt(h);
                const double next = b - h + step_sd * normal(rng);
                const double gap = (b - low) * (next - low);
                if (next < low || 2.0 * gap / h < kBridgeExponentCut) {
                    // minimum of the Brownian bridge from b to next over time h
                    const double d = next - b;
                    const double bridge_min = 0.5 * (b + next - std::sqrt(d * d - 2.0 * h * std::log1p(-unif(rng))));
                    low = std::min(low, bridge_min);
                }
                b = next;
                t += h;
            }
            out.level[static_cast<std::size_t>(r)] = low < 0.0 ? b - low : b;
            out.infimum[static_cast<std::size_t>(r)] = low <= 0.0 ? 0.0 : low;
        }
    });
}

void check_rbm_args(double x0, double dt, std::int64_t replications) {
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw InputError("RBM initial level must be finite and >= 0");
    if (!(dt > 0.0)) throw InputError("time step must be positive");
    if (replications < 1) throw InputError("need at least one replication");
}

} // namespace

RbmSamples simulate_rbm(double x0, double q, std::int64_t replications, double dt, std::uint64_t seed,
                        std::optional<int> threads) {
    check_rbm_args(x0, dt, replications);
    if (!(q > 0.0)) throw InputError("simulation needs q > 0");
    RbmSamples out;
    out.x0 = x0;
    out.q = q;
    out.dt = dt;
    out.seed = seed;
    run_rbm_paths(out, replications, threads,
                  [q](Engine& rng) { return boost::random::exponential_distribution<double>(q)(rng); });
    return out;
}

RbmSamples simulate_rbm_at(double x0, double t, std::int64_t replications, double dt, std::uint64_t seed,
                           std::optional<int> threads) {
    check_rbm_args(x0, dt, replications);
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("time must be finite and >= 0");
    RbmSamples out;
    out.x0 = x0;
    out.t = t;
    out.dt = dt;
    out.seed = seed;
    run_rbm_paths(out, replications, threads, [t](Engine&) { return t; });
    return out;
}

} // namespace tq
