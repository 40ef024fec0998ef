#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "billiards/curve.hpp"
#include "billiards/perturbation.hpp"

namespace billiards {

using Json = nlohmann::json;

/// Unreadable file or malformed document.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json read_json_file(const std::filesystem::path& path);

/// {"type": "curvature", "coeffs": {"a0", "ak", "bk"}, "basepoint": [x, y]}
/// or {"type": "parametric", "builtin": "ellipse" | "fig2" | "circle", "params": {...}}.
/// Shape errors throw InputError; geometric ones throw BilliardError.
ConvexCurve curve_from_json(const Json& spec);

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string fingerprint(const Json& spec);

/// {"coeffs": {"a0", "ak", "bk"}} or {"contact": {"A", "B", "phi0"}}.
PerturbationField field_from_json(const Json& spec);
Json field_to_json(const PerturbationField& field);

Json trig_to_json(const TrigPoly& f);
TrigPoly trig_from_json(const Json& coeffs);

/// %.17g.
std::string format_double(double v);

}  // namespace billiards
