#include "tq/cli.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tq/factorization.hpp"
#include "tq/inversion.hpp"
#include "tq/mms.hpp"
#include "tq/model_io.hpp"
#include "tq/oracles.hpp"
#include "tq/parallel.hpp"
#include "tq/rbm.hpp"
#include "tq/simulation.hpp"

namespace tq {

namespace {

constexpr double kDefaultPmfTol = 1e-7;
constexpr double kDefaultIdentityTol = 1e-8;
constexpr int kDefaultMmsTruncation = 80;

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

struct Column {
    std::string name;
    std::string unit;
};

struct Report {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> summary;
    int exit_code = kExitOk;
};

struct Options {
    std::string model_path;
    std::optional<double> q, t;
    std::optional<int> initial, truncate, threads, level;
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::optional<double> tol;
    std::string identity;
    std::optional<double> x0;
    std::string grid = "0:5:0.1";
    std::string range;
    double dt = 1e-3;
    int digits = 11;
    bool uniformization = false;
};

struct Grid {
    double a, b, h;
};

Grid parse_grid(const std::string& text) {
    Grid g{};
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> g.a >> c1 >> g.b >> c2 >> g.h) || c1 != ':' || c2 != ':' || !(g.h > 0.0) || g.b < g.a)
        throw InputError("grid must look like a:b:h with a <= b and h > 0");
    return g;
}

std::vector<double> grid_points(const Grid& g) {
    std::vector<double> pts;
    const auto n = static_cast<long>(std::floor((g.b - g.a) / g.h + 1e-9));
    for (long i = 0; i <= n; ++i) pts.push_back(g.a + static_cast<double>(i) * g.h);
    return pts;
}

std::pair<int, int> parse_range(const std::string& text) {
    int a = 0, b = 0;
    char c = 0;
    std::istringstream in(text);
    if (!(in >> a >> c >> b) || c != ':' || b < a) throw InputError("range must look like a:b with a <= b");
    return {a, b};
}

void emit(const Report& rep, const RunManifest& m, std::ostream& out) {
    if (m.format == "doc") {
        nlohmann::ordered_json doc;
        doc["manifest"] = {{"command", m.command}, {"model", m.model_path}, {"format", m.format},
                           {"seed", m.seed}, {"parameters", m.parameters}, {"tolerances", m.tolerances}};
        auto cols = nlohmann::ordered_json::array();
        for (const auto& c : rep.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
        doc["columns"] = cols;
        doc["rows"] = rep.rows;
        nlohmann::ordered_json summary = nlohmann::ordered_json::object();
        for (const auto& [k, v] : rep.summary) summary[k] = v;
        doc["summary"] = summary;
        out << doc.dump(2) << "\n";
        return;
    }
    out << "# command: " << m.command << "\n# model: " << m.model_path << "\n";
    for (const auto& [k, v] : m.parameters) out << "# " << k << ": " << v << "\n";
    for (const auto& [k, v] : m.tolerances) out << "# tol." << k << ": " << v << "\n";
    if (!m.seed.empty()) out << "# seed: " << m.seed << "\n";
    for (std::size_t i = 0; i < rep.columns.size(); ++i)
        out << (i ? "," : "") << rep.columns[i].name << " [" << rep.columns[i].unit << "]";
    out << "\n";
    for (const auto& row : rep.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
        out << "\n";
    }
    for (const auto& [k, v] : rep.summary) out << "# " << k << ": " << v << "\n";
}

// ------------------------------------------------------------------ model views

MarkovPrpSpec as_prp_spec(const Model& model, StateRange& range, const Options& o) {
    if (const auto* m = std::get_if<PrpModel>(&model)) {
        range = m->truncation;
        if (o.truncate) range.upper = *o.truncate;
        return m->spec;
    }
    BirthDeathSpec bd;
    if (const auto* b = std::get_if<BirthDeathSpec>(&model)) {
        bd = *b;
    } else if (const auto* p = std::get_if<MmsParams>(&model)) {
        bd = p->as_birth_death(kDefaultMmsTruncation);
    } else {
        throw InputError("this command needs a prp, birth-death, mms or mmsk model");
    }
    if (o.truncate && !bd.upper) bd.truncation = *o.truncate;
    range = {bd.lower, bd.top()};
    return bd.as_prp();
}

GeneratorMatrix oracle_generator(const Model& model, const Options& o) {
    if (const auto* m = std::get_if<PrpModel>(&model)) {
        StateRange r = m->truncation;
        if (o.truncate) r.upper = *o.truncate;
        return build_level_generator(m->spec, r);
    }
    if (const auto* b = std::get_if<BirthDeathSpec>(&model)) {
        BirthDeathSpec bd = *b;
        if (o.truncate && !bd.upper) bd.truncation = *o.truncate;
        return build_birth_death_generator(bd);
    }
    if (const auto* p = std::get_if<MmsParams>(&model))
        return build_birth_death_generator(p->as_birth_death(o.truncate.value_or(kDefaultMmsTruncation)));
    throw InputError("the oracle command needs a prp, birth-death, mms or mmsk model");
}

// State-indexed pmf at one (possibly complex) q, with the first state label.
struct PmfEvaluator {
    int first_state = 0;
    std::function<std::vector<Complex>(TransformArgument)> row;
};

PmfEvaluator pmf_evaluator(const Model& model, int initial, const Options& o) {
    if (const auto* p = std::get_if<MmsParams>(&model)) {
        const MmsParams params = *p;
        if (params.capacity) return {0, [=](TransformArgument q) { return mmsk_pmf_row(initial, params, q); }};
        const int top = o.truncate.value_or(kDefaultMmsTruncation);
        return {0, [=](TransformArgument q) { return mms_pmf_row(initial, top, params, q); }};
    }
    if (const auto* b = std::get_if<BirthDeathSpec>(&model)) {
        BirthDeathSpec bd = *b;
        if (o.truncate && !bd.upper) bd.truncation = *o.truncate;
        return {bd.lower, [=](TransformArgument q) { return reversible_pmf(bd, initial, q); }};
    }
    if (const auto* m = std::get_if<PrpModel>(&model)) {
        const MarkovPrpSpec spec = m->spec;
        StateRange r = m->truncation;
        if (o.truncate) r.upper = *o.truncate;
        const int first = spec.reflection_level ? *spec.reflection_level : r.lower;
        return {first, [=](TransformArgument q) { return prp_pmf(spec, initial, q, r); }};
    }
    throw InputError("pmf needs a prp, birth-death, mms or mmsk model");
}

std::vector<double> evaluate_row(const PmfEvaluator& ev, const Options& o) {
    if (o.q) {
        std::vector<double> out;
        for (const auto& z : ev.row(*o.q)) out.push_back(z.real());
        return out;
    }
    return euler_invert_vector(
        [&](Complex s) {
            auto v = ev.row(TransformArgument(s));
            for (auto& z : v) z /= s;
            return v;
        },
        *o.t, o.digits);
}

void require_time_or_rate(const Options& o) {
    if (o.q.has_value() == o.t.has_value()) throw InputError("give exactly one of --q and --t");
}

// ------------------------------------------------------------------ commands

Report cmd_pmf(const Model& model, const Options& o, RunManifest& m) {
    require_time_or_rate(o);
    const int initial = o.initial.value_or(0);
    const PmfEvaluator ev = pmf_evaluator(model, initial, o);
    const std::vector<double> pmf = evaluate_row(ev, o);
    const double tol = o.tol.value_or(kDefaultPmfTol);
    m.tolerances["pmf_sum"] = num(tol);

    Report rep;
    rep.columns = {{"state", "customers"}, {"probability", "1"}};
    double total = 0.0;
    for (double p : pmf) total += p;
    int lo = ev.first_state, hi = ev.first_state + static_cast<int>(pmf.size()) - 1;
    if (!o.range.empty()) {
        const auto [a, b] = parse_range(o.range);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
    }
    for (int n = lo; n <= hi; ++n) rep.rows.push_back({double(n), pmf[static_cast<std::size_t>(n - ev.first_state)]});
    rep.summary.emplace_back("total_mass", num(total));
    if (std::abs(total - 1.0) > tol) {
        rep.summary.emplace_back("status", "truncation-not-certified");
        rep.exit_code = kExitNumerical;
    }
    return rep;
}

Report cmd_oracle(const Model& model, const Options& o, RunManifest& m) {
    const int initial = o.initial.value_or(0);
    const GeneratorMatrix gen = oracle_generator(model, o);
    Report rep;
    rep.columns = {{"state", "customers"}, {"probability", "1"}};
    std::vector<double> pmf;
    if (o.uniformization) {
        if (!o.t) throw InputError("--uniformization needs --t");
        m.parameters["method"] = "uniformization";
        pmf = uniformization_pmf(gen, initial, *o.t);
    } else {
        if (!o.q) throw InputError("the resolvent oracle needs --q (or --uniformization with --t)");
        m.parameters["method"] = "resolvent";
        pmf = resolvent_pmf(gen, initial, *o.q).real();
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        rep.rows.push_back({double(gen.first_state + static_cast<int>(i)), pmf[i]});
        total += pmf[i];
    }
    rep.summary.emplace_back("total_mass", num(total));
    return rep;
}

std::vector<double> omega_grid() {
    std::vector<double> w;
    for (int i = 1; i <= 30; ++i) w.push_back(0.1 * i);
    return w;
}

Report cmd_verify(const Model& model, const Options& o, RunManifest& m) {
    if (!o.q) throw InputError("verify needs --q");
    StateRange range;
    MarkovPrpSpec spec = as_prp_spec(model, range, o);
    const double tol = o.tol.value_or(kDefaultIdentityTol);
    m.tolerances["identity_deviation"] = num(tol);
    const int level = o.level.value_or(0);
    const int n0 = o.initial.value_or(std::max(level, range.lower));
    Report rep;
    double deviation = 0.0;

    if (o.identity == "theorem1") {
        const TheoremOneReport r = verify_theorem_1(spec, level, n0, *o.q, range);
        rep.columns = {{"k", "customers above infimum"}, {"engine", "1"}, {"reflected", "1"}, {"joint", "1"}};
        for (std::size_t k = 0; k < r.engine.size(); ++k)
            rep.rows.push_back({double(k), r.engine[k], r.reflected[k], r.joint[k]});
        deviation = r.max_deviation;
        rep.summary.emplace_back("below_floor", num(r.below_floor));
    } else if (o.identity == "theorem2") {
        const DeviationReport r = verify_theorem_2(spec, level, n0, *o.q, range);
        deviation = r.max_deviation;
        rep.summary.emplace_back("below_floor", num(r.below_floor));
    } else if (o.identity == "wiener-hopf") {
        const DeviationReport r = verify_corollary_1(spec, *o.q, omega_grid(), range);
        deviation = r.max_deviation;
        rep.summary.emplace_back("below_floor", num(r.below_floor));
    } else if (o.identity == "reflected-factorization") {
        if (!spec.reflection_level) {
            spec = spec.reflected_at(0);
            m.parameters["reflection_level"] = "0";
        }
        const DeviationReport r = verify_corollary_2(spec, o.initial.value_or(0), *o.q, omega_grid(), range);
        deviation = r.max_deviation;
    } else {
        throw InputError("--identity must be theorem1, theorem2, wiener-hopf or reflected-factorization");
    }
    rep.summary.emplace_back("max_deviation", num(deviation));
    const bool pass = deviation < tol;
    rep.summary.emplace_back("status", pass ? "pass" : "fail");
    rep.exit_code = pass ? kExitOk : kExitFail;
    return rep;
}

Report cmd_rbm(const Model& model, const Options& o, RunManifest& m) {
    require_time_or_rate(o);
    double x0 = 0.0;
    if (const auto* r = std::get_if<RbmModel>(&model)) x0 = r->x0;
    else if (!o.model_path.empty()) throw InputError("rbm needs an rbm model or --x0");
    if (o.x0) x0 = *o.x0;
    m.parameters["x0"] = num(x0);
    Report rep;
    rep.columns = {{"x", "level"}, {"density", "1/level"}, {"survival", "1"}};
    for (double x : grid_points(parse_grid(o.grid))) {
        if (o.q) {
            const RbmQuery query(x0, *o.q);
            rep.rows.push_back({x, rbm_density(x, query), rbm_survival(x, query)});
        } else {
            const auto v = euler_invert_vector(
                [&](Complex s) {
                    return std::vector<Complex>{rbm_density_transform(x, x0, s) / s,
                                                rbm_survival_transform(x, x0, s) / s};
                },
                *o.t, o.digits);
            rep.rows.push_back({x, v[0], v[1]});
        }
    }
    return rep;
}

Report cmd_moment(const Model& model, const Options& o, RunManifest&) {
    if (!o.q) throw InputError("moment needs --q");
    const int initial = o.initial.value_or(0);
    Report rep;
    rep.columns = {{"initial", "customers"}, {"mean", "customers"}};
    double mean = 0.0;
    const auto* p = std::get_if<MmsParams>(&model);
    if (p && !p->capacity && p->s == 1) {
        mean = mm1_mean(initial, p->lambda, p->mu, *o.q);
    } else if (p && !p->capacity) {
        const MmsMeanReport r = mms_mean(initial, *p, *o.q);
        mean = r.mean;
        rep.summary.emplace_back("reference_mean", num(r.reference_mean));
        rep.summary.emplace_back("decomposition", num(r.decomposition));
    } else {
        const PmfEvaluator ev = pmf_evaluator(model, initial, o);
        const auto row = ev.row(*o.q);
        double total = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            mean += (ev.first_state + static_cast<double>(i)) * row[i].real();
            total += row[i].real();
        }
        rep.summary.emplace_back("total_mass", num(total));
    }
    rep.rows.push_back({double(initial), mean});
    return rep;
}

Report cmd_simulate(const Model& model, const Options& o, RunManifest& m) {
    if (!o.q) throw InputError("simulate needs --q");
    m.seed = std::to_string(o.seed);
    m.parameters["reps"] = std::to_string(o.reps);
    Report rep;
    if (const auto* r = std::get_if<RbmModel>(&model)) {
        const double x0 = o.x0.value_or(r->x0);
        m.parameters["dt"] = num(o.dt);
        const RbmSamples s = simulate_rbm(x0, *o.q, o.reps, o.dt, o.seed, o.threads);
        const auto edges = grid_points(parse_grid(o.grid));
        const SimulationEstimate h = s.level_histogram(edges);
        rep.columns = {{"bin_lower", "level"}, {"bin_upper", "level"}, {"probability", "1"}, {"half_width_99", "1"}};
        for (std::size_t i = 0; i < h.estimate.size(); ++i)
            rep.rows.push_back({edges[i], edges[i + 1], h.estimate[i], h.half_width[i]});
        const double a = s.atom_fraction();
        rep.summary.emplace_back("infimum_atom", num(a));
        rep.summary.emplace_back("infimum_atom_half_width_99",
                                 num(kZ99 * std::sqrt(a * (1.0 - a) / static_cast<double>(o.reps))));
        return rep;
    }
    StateRange range;
    const MarkovPrpSpec spec = as_prp_spec(model, range, o);
    const int initial = o.initial.value_or(std::max(0, range.lower));
    const PrpSimulation sim = simulate_prp(spec, initial, *o.q, o.reps, o.seed, o.threads);
    rep.columns = {{"level", "customers"}, {"infimum", "customers"}, {"probability", "1"}, {"half_width_99", "1"}};
    for (const auto& [cell, count] : sim.counts)
        rep.rows.push_back({double(cell.first), double(cell.second), sim.probability(cell.first, cell.second),
                            sim.half_width(cell.first, cell.second)});
    return rep;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transient queueing toolkit"};
    app.require_subcommand(1, 1);
    Options o;

    auto common = [&](CLI::App* sub, bool needs_model) {
        auto* model = sub->add_option("--model", o.model_path, "model file (JSON)");
        if (needs_model) model->required();
        sub->add_option("--q", o.q, "killing rate of the exponential clock");
        sub->add_option("--t", o.t, "deterministic time (inverts the transform)");
        sub->add_option("--initial", o.initial, "initial level");
        sub->add_option("--truncate", o.truncate, "top level of the truncated state space");
        sub->add_option("--reps", o.reps, "simulation replications");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--format", o.format, "csv or doc")->check(CLI::IsMember({"csv", "doc"}));
        sub->add_option("--tol", o.tol, "tolerance override");
        sub->add_option("--threads", o.threads, "worker threads (default: TQ_THREADS or all cores)");
        sub->add_option("--digits", o.digits, "inversion precision in decimal digits");
    };
    auto* pmf = app.add_subcommand("pmf", "law of Q at e_q (or at time t)");
    common(pmf, true);
    pmf->add_option("--range", o.range, "print only states a:b");
    auto* verify = app.add_subcommand("verify", "check a factorization identity against the oracles");
    common(verify, true);
    verify->add_option("--identity", o.identity, "theorem1, theorem2, wiener-hopf, reflected-factorization")
        ->required();
    verify->add_option("--level", o.level, "infimum level l");
    auto* rbm = app.add_subcommand("rbm", "regulated Brownian motion density and survival function");
    common(rbm, false);
    rbm->add_option("--x0", o.x0, "initial level");
    rbm->add_option("--grid", o.grid, "evaluation grid a:b:h");
    auto* moment = app.add_subcommand("moment", "mean of Q at e_q");
    common(moment, true);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with 99% half-widths");
    common(simulate, true);
    simulate->add_option("--x0", o.x0, "initial level (rbm models)");
    simulate->add_option("--grid", o.grid, "histogram edges a:b:h (rbm models)");
    simulate->add_option("--dt", o.dt, "time step (rbm models)");
    auto* oracle = app.add_subcommand("oracle", "resolvent or uniformization ground truth");
    common(oracle, true);
    oracle->add_flag("--uniformization", o.uniformization, "time-domain pmf by uniformization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    RunManifest manifest;
    manifest.command = sub->get_name();
    manifest.model_path = o.model_path;
    manifest.format = o.format;
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help" || opt->get_name() == "--format" ||
            opt->get_name() == "--model")
            continue;
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        manifest.parameters[name] = opt->count() && !opt->results().empty() ? opt->results().front() : "true";
    }
    try {
        if (o.threads) resolve_threads(o.threads);
        const Model model = o.model_path.empty() ? Model{RbmModel{}} : load_model_file(o.model_path);
        manifest.parameters["model_type"] = model_type(model);
        Report rep;
        if (manifest.command == "pmf") rep = cmd_pmf(model, o, manifest);
        else if (manifest.command == "verify") rep = cmd_verify(model, o, manifest);
        else if (manifest.command == "rbm") rep = cmd_rbm(model, o, manifest);
        else if (manifest.command == "moment") rep = cmd_moment(model, o, manifest);
        else if (manifest.command == "simulate") rep = cmd_simulate(model, o, manifest);
        else rep = cmd_oracle(model, o, manifest);
        emit(rep, manifest, out);
        if (rep.exit_code == kExitNumerical) err << "error: pmf mass differs from 1 beyond tolerance\n";
        return rep.exit_code;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace tq
