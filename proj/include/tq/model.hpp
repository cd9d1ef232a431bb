#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace tq {

/// Level-indexed rate function. Closed forms cover the queueing models in use
/// (constant, n*mu, min(n,s)*mu); tables are clamped at both ends.
class RateMap {
public:
    enum class Kind { Constant, Linear, LinearCapped, Table };

    RateMap() = default;

    static RateMap constant(double value);
    /// rate * max(n, 0)
    static RateMap linear(double rate);
    /// rate * min(max(n, 0), cap)
    static RateMap linear_capped(double rate, int cap);
    /// values[n - start]; levels outside the table take the nearest entry.
    static RateMap table(int start, std::vector<double> values);

    double operator()(int level) const;

    Kind kind() const { return kind_; }
    double value() const { return value_; }
    int cap() const { return cap_; }
    int start() const { return start_; }
    const std::vector<double>& values() const { return values_; }

    bool is_level_independent(int lower, int upper) const;

    bool operator==(const RateMap&) const = default;

private:
    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    int cap_ = 0;
    int start_ = 0;
    std::vector<double> values_;
};

/// Distribution of a jump size on {1, 2, ...}, possibly depending on the level
/// the jump starts from.
class JumpSizes {
public:
    enum class Kind { Fixed, PerLevel, Reset };

    JumpSizes() : pmfs_{{1.0}} {}

    /// pmf[i] = P(size = i + 1). The tail beyond cumulative mass 1 - 1e-12 is
    /// cut and the remainder renormalized.
    static JumpSizes fixed(std::vector<double> pmf);
    /// pmfs[n - start] applies at level n; clamped at both ends.
    static JumpSizes per_level(int start, std::vector<std::vector<double>> pmfs);
    /// Downward jumps only: from level n > level the jump lands exactly on
    /// `level`; from n <= level the event is a no-op.
    static JumpSizes reset_to(int level);

    /// (size, probability) pairs for a jump starting at `level`.
    std::vector<std::pair<int, double>> at(int level) const;

    Kind kind() const { return kind_; }
    int start() const { return start_; }
    int reset_level() const { return start_; }
    const std::vector<std::vector<double>>& pmfs() const { return pmfs_; }

    bool is_level_independent(int lower, int upper) const;

    bool operator==(const JumpSizes&) const = default;

private:
    Kind kind_ = Kind::Fixed;
    int start_ = 0;
    std::vector<std::vector<double>> pmfs_;
};

struct StateRange {
    int lower = 0;
    int upper = 0;

    int size() const { return upper - lower + 1; }
    bool contains(int n) const { return n >= lower && n <= upper; }
    bool operator==(const StateRange&) const = default;
};

struct Transition {
    int target;
    double rate;
};

/// Markovian PRP level process: unit-work customers, LCFS preemptive-resume,
/// so the level moves up by single and batch arrivals and down by service
/// completions and catastrophes.
struct MarkovPrpSpec {
    RateMap single_arrival;
    RateMap batch_rate;
    JumpSizes batch_sizes;
    RateMap service;
    RateMap catastrophe_rate;
    JumpSizes catastrophe_sizes;
    /// Downward jumps that would land at or below this level land on it, and
    /// the server idles there.
    std::optional<int> reflection_level;

    void validate() const;

    /// Outgoing transitions from `level` with the reflection rule applied.
    /// Targets are unclamped and may repeat.
    std::vector<Transition> transitions(int level) const;

    double total_rate(int level) const;

    bool is_level_independent(int lower, int upper) const;

    MarkovPrpSpec unreflected() const;
    MarkovPrpSpec reflected_at(int level) const;

    bool operator==(const MarkovPrpSpec&) const = default;
};

/// Birth-death chain on {lower, ..., upper}. An absent upper bound means the
/// chain is unbounded and is cut at `truncation` for numerical work.
struct BirthDeathSpec {
    int lower = 0;
    std::optional<int> upper;
    RateMap birth;
    RateMap death;
    int truncation = 200;

    int top() const { return upper ? *upper : truncation; }
    /// Boundary rates are zero regardless of the rate maps.
    double birth_at(int n) const;
    double death_at(int n) const;

    void validate() const;

    /// Same chain as a PRP level process on the integers (for generator
    /// comparisons); the lower boundary becomes a reflection level.
    MarkovPrpSpec as_prp() const;

    bool operator==(const BirthDeathSpec&) const = default;
};

using SparseGenerator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// CTMC generator on a contiguous range of integer levels.
struct GeneratorMatrix {
    int first_state = 0;
    SparseGenerator rates;

    int size() const { return static_cast<int>(rates.rows()); }
    int last_state() const { return first_state + size() - 1; }
    int index_of(int state) const;
    double max_row_sum() const;
    /// Largest total outflow rate (for uniformization).
    double max_exit_rate() const;
};

/// Generator of the bivariate chain (level, running infimum). Paths whose
/// infimum drops below the truncation floor are routed to an absorbing sink.
struct JointInfGenerator {
    SparseGenerator rates;
    std::vector<std::pair<int, int>> states;  // (level, infimum); sink excluded
    int sink = 0;
    StateRange range;
    int initial = 0;

    int index_of(int level, int infimum) const;
    int size() const { return static_cast<int>(rates.rows()); }
};

/// Level generator on `truncation`. Upward moves past the top are lumped on
/// the top, downward moves past the floor on the floor (or on the reflection
/// level, whose presence overrides the floor).
GeneratorMatrix build_level_generator(const MarkovPrpSpec& spec, StateRange truncation);

GeneratorMatrix build_birth_death_generator(const BirthDeathSpec& spec);

/// Joint (level, infimum) generator started from `initial`; infima range over
/// [truncation.lower, initial]. A reflection level, when set, replaces the floor.
JointInfGenerator build_joint_inf_generator(const MarkovPrpSpec& spec, int initial,
                                            StateRange truncation);

} // namespace tq
