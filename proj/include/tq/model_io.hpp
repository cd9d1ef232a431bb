#pragma once

#include <string>
#include <variant>

#include "tq/mms.hpp"
#include "tq/model.hpp"

namespace tq {

/// PRP level process together with the truncation used for numerical work.
struct PrpModel {
    MarkovPrpSpec spec;
    StateRange truncation{0, 100};

    bool operator==(const PrpModel&) const = default;
};

struct RbmModel {
    double x0 = 0.0;

    bool operator==(const RbmModel&) const = default;
};

/// mms and mmsk files both load into MmsParams (capacity set for mmsk).
using Model = std::variant<PrpModel, BirthDeathSpec, MmsParams, RbmModel>;

/// "prp", "birth-death", "mms", "mmsk" or "rbm".
std::string model_type(const Model& model);

/// Parses a JSON model document; InputError on any schema violation,
/// including unknown fields.
Model parse_model(const std::string& text);

Model load_model_file(const std::string& path);

/// Canonical JSON form; parse_model(serialize_model(m)) == m.
std::string serialize_model(const Model& model);

} // namespace tq
