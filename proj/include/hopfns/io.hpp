#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopfns/averaging.hpp"
#include "hopfns/coeffs.hpp"
#include "hopfns/core.hpp"
#include "hopfns/dynamics.hpp"
#include "hopfns/predict.hpp"
#include "hopfns/shimmy.hpp"

namespace hopfns {

using json = nlohmann::json;

// Parsed system descriptor. Only the member matching `kind` is meaningful.
struct Descriptor {
    std::string kind;  // planar-nf, planar-general, 3d, nd, shimmy
    PlanarSystem planar;
    System3D sys3;
    SystemND nd;
    ShimmyParams shimmy;

    bool is_planar() const { return kind == "planar-nf" || kind == "planar-general"; }
};

// Throws SchemaError with a key path on malformed input.
Descriptor parse_descriptor(const json& j);
Descriptor parse_descriptor_text(const std::string& text);
Descriptor load_descriptor(const std::string& path);
json to_json(const Descriptor& d);

json to_json(const CoefficientReport& r);
json to_json(const AveragedNormalForm& nf);
json to_json(const Prediction& p);
json to_json(const Orbit& o);
json to_json(const Branch& b);
json to_json(const ShimmyAnalysis& a);
json to_json(const ShimmySimulation& s);

// Structural checks for emitted documents; throw SchemaError.
void check_report_json(const json& j);
void check_shimmy_json(const json& j);

// 17 significant digits, scientific
std::string fmt17(double x);

std::string branch_csv(const Branch& b);

struct DiagramRow {
    double mu = 0;
    std::optional<double> r0_numeric, r0_predicted;
    std::optional<double> rel_err;
};

std::string diagram_csv(const std::vector<DiagramRow>& rows);

}  // namespace hopfns
