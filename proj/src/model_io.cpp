#include "tq/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace tq {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw InputError(where + " must be an object");
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw InputError("unknown field '" + key + "' in " + where);
    }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw InputError(where + " is missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError("field '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? field<T>(j, key, where) : fallback;
}

RateMap parse_rate(const json& j, const std::string& where) {
    if (j.is_number()) return RateMap::constant(j.get<double>());
    if (j.is_array()) return RateMap::table(0, j.get<std::vector<double>>());
    require_object(j, where);
    const auto kind = field<std::string>(j, "kind", where);
    if (kind == "constant") {
        allow_keys(j, {"kind", "value"}, where);
        return RateMap::constant(field<double>(j, "value", where));
    }
    if (kind == "linear") {
        allow_keys(j, {"kind", "rate"}, where);
        return RateMap::linear(field<double>(j, "rate", where));
    }
    if (kind == "linear-capped") {
        allow_keys(j, {"kind", "rate", "cap"}, where);
        return RateMap::linear_capped(field<double>(j, "rate", where), field<int>(j, "cap", where));
    }
    if (kind == "table") {
        allow_keys(j, {"kind", "start", "values"}, where);
        return RateMap::table(field_or<int>(j, "start", 0, where), field<std::vector<double>>(j, "values", where));
    }
    throw InputError("unknown rate kind '" + kind + "' in " + where);
}

json rate_json(const RateMap& r) {
    switch (r.kind()) {
    case RateMap::Kind::Constant: return {{"kind", "constant"}, {"value", r.value()}};
    case RateMap::Kind::Linear: return {{"kind", "linear"}, {"rate", r.value()}};
    case RateMap::Kind::LinearCapped: return {{"kind", "linear-capped"}, {"rate", r.value()}, {"cap", r.cap()}};
    case RateMap::Kind::Table: return {{"kind", "table"}, {"start", r.start()}, {"values", r.values()}};
    }
    return {};
}

JumpSizes parse_sizes(const json& j, const std::string& where) {
    if (j.is_array()) {
        try {
            return JumpSizes::fixed(j.get<std::vector<double>>());
        } catch (const json::exception&) {
            throw InputError(where + " must be an array of probabilities");
        }
    }
    require_object(j, where);
    const auto kind = field<std::string>(j, "kind", where);
    if (kind == "fixed") {
        allow_keys(j, {"kind", "pmf"}, where);
        return JumpSizes::fixed(field<std::vector<double>>(j, "pmf", where));
    }
    if (kind == "per-level") {
        allow_keys(j, {"kind", "start", "pmfs"}, where);
        return JumpSizes::per_level(field_or<int>(j, "start", 0, where),
                                    field<std::vector<std::vector<double>>>(j, "pmfs", where));
    }
    if (kind == "reset") {
        allow_keys(j, {"kind", "level"}, where);
        return JumpSizes::reset_to(field<int>(j, "level", where));
    }
    throw InputError("unknown size kind '" + kind + "' in " + where);
}

json sizes_json(const JumpSizes& s) {
    switch (s.kind()) {
    case JumpSizes::Kind::Fixed: return {{"kind", "fixed"}, {"pmf", s.pmfs().front()}};
    case JumpSizes::Kind::PerLevel: return {{"kind", "per-level"}, {"start", s.start()}, {"pmfs", s.pmfs()}};
    case JumpSizes::Kind::Reset: return {{"kind", "reset"}, {"level", s.reset_level()}};
    }
    return {};
}

void parse_jump_block(const json& j, const std::string& where, RateMap& rate, JumpSizes& sizes) {
    require_object(j, where);
    allow_keys(j, {"rate", "sizes"}, where);
    rate = parse_rate(j.at("rate"), where + ".rate");
    if (j.contains("sizes")) sizes = parse_sizes(j.at("sizes"), where + ".sizes");
}

PrpModel parse_prp(const json& j) {
    allow_keys(j, {"type", "single_arrival", "batch", "service", "catastrophe", "reflection_level", "truncation"},
               "prp model");
    PrpModel m;
    if (j.contains("single_arrival")) m.spec.single_arrival = parse_rate(j.at("single_arrival"), "single_arrival");
    if (j.contains("batch")) {
        if (!j.at("batch").contains("rate")) throw InputError("batch is missing 'rate'");
        parse_jump_block(j.at("batch"), "batch", m.spec.batch_rate, m.spec.batch_sizes);
    }
    if (j.contains("service")) m.spec.service = parse_rate(j.at("service"), "service");
    if (j.contains("catastrophe")) {
        if (!j.at("catastrophe").contains("rate")) throw InputError("catastrophe is missing 'rate'");
        parse_jump_block(j.at("catastrophe"), "catastrophe", m.spec.catastrophe_rate, m.spec.catastrophe_sizes);
    }
    if (j.contains("reflection_level") && !j.at("reflection_level").is_null())
        m.spec.reflection_level = field<int>(j, "reflection_level", "prp model");
    if (j.contains("truncation")) {
        const json& t = j.at("truncation");
        require_object(t, "truncation");
        allow_keys(t, {"lower", "upper"}, "truncation");
        m.truncation = {field<int>(t, "lower", "truncation"), field<int>(t, "upper", "truncation")};
    }
    if (m.truncation.upper < m.truncation.lower) throw InputError("truncation upper below lower");
    m.spec.validate();
    return m;
}

BirthDeathSpec parse_birth_death(const json& j) {
    allow_keys(j, {"type", "lower", "upper", "birth", "death", "truncation"}, "birth-death model");
    BirthDeathSpec s;
    s.lower = field_or<int>(j, "lower", 0, "birth-death model");
    if (j.contains("upper") && !j.at("upper").is_null()) s.upper = field<int>(j, "upper", "birth-death model");
    if (!j.contains("birth") || !j.contains("death")) throw InputError("birth-death model needs 'birth' and 'death'");
    s.birth = parse_rate(j.at("birth"), "birth");
    s.death = parse_rate(j.at("death"), "death");
    s.truncation = field_or<int>(j, "truncation", s.truncation, "birth-death model");
    s.validate();
    return s;
}

MmsParams parse_mms(const json& j, bool finite) {
    const std::string where = finite ? "mmsk model" : "mms model";
    if (finite)
        allow_keys(j, {"type", "lambda", "mu", "servers", "capacity"}, where);
    else
        allow_keys(j, {"type", "lambda", "mu", "servers"}, where);
    MmsParams p;
    p.lambda = field<double>(j, "lambda", where);
    p.mu = field<double>(j, "mu", where);
    p.s = field<int>(j, "servers", where);
    if (finite) p.capacity = field<int>(j, "capacity", where);
    p.validate();
    return p;
}

RbmModel parse_rbm(const json& j) {
    allow_keys(j, {"type", "x0"}, "rbm model");
    RbmModel m;
    m.x0 = field_or<double>(j, "x0", 0.0, "rbm model");
    if (!(m.x0 >= 0.0)) throw InputError("rbm x0 must be >= 0");
    return m;
}

} // namespace

std::string model_type(const Model& model) {
    struct Visitor {
        std::string operator()(const PrpModel&) const { return "prp"; }
        std::string operator()(const BirthDeathSpec&) const { return "birth-death"; }
        std::string operator()(const MmsParams& p) const { return p.capacity ? "mmsk" : "mms"; }
        std::string operator()(const RbmModel&) const { return "rbm"; }
    };
    return std::visit(Visitor{}, model);
}

Model parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    require_object(j, "model");
    const auto type = field<std::string>(j, "type", "model");
    if (type == "prp") return parse_prp(j);
    if (type == "birth-death") return parse_birth_death(j);
    if (type == "mms") return parse_mms(j, false);
    if (type == "mmsk") return parse_mms(j, true);
    if (type == "rbm") return parse_rbm(j);
    throw InputError("unknown model type '" + type + "'");
}

Model load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_model(text.str());
}

std::string serialize_model(const Model& model) {
    json j;
    j["type"] = model_type(model);
    if (const auto* m = std::get_if<PrpModel>(&model)) {
        const auto& s = m->spec;
        j["single_arrival"] = rate_json(s.single_arrival);
        j["batch"] = {{"rate", rate_json(s.batch_rate)}, {"sizes", sizes_json(s.batch_sizes)}};
        j["service"] = rate_json(s.service);
        j["catastrophe"] = {{"rate", rate_json(s.catastrophe_rate)}, {"sizes", sizes_json(s.catastrophe_sizes)}};
        j["reflection_level"] = s.reflection_level ? json(*s.reflection_level) : json(nullptr);
        j["truncation"] = {{"lower", m->truncation.lower}, {"upper", m->truncation.upper}};
    } else if (const auto* b = std::get_if<BirthDeathSpec>(&model)) {
        j["lower"] = b->lower;
        j["upper"] = b->upper ? json(*b->upper) : json(nullptr);
        j["birth"] = rate_json(b->birth);
        j["death"] = rate_json(b->death);
        j["truncation"] = b->truncation;
    } else if (const auto* p = std::get_if<MmsParams>(&model)) {
        j["lambda"] = p->lambda;
        j["mu"] = p->mu;
        j["servers"] = p->s;
        if (p->capacity) j["capacity"] = *p->capacity;
    } else if (const auto* r = std::get_if<RbmModel>(&model)) {
        j["x0"] = r->x0;
    }
    return j.dump(2) + "\n";
}

} // namespace tq
