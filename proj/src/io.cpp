#include "billiards/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "billiards/error.hpp"

namespace billiards {

namespace {

const Json& member(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

double number(const Json& j, const char* what) {
    if (!j.is_number()) throw InputError(std::string("\"") + what + "\" must be a number");
    return j.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
    return j.is_object() && j.contains(key) ? number(j.at(key), key) : fallback;
}

std::vector<double> number_list(const Json& j, const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    const Json& list = j.at(key);
    if (!list.is_array()) throw InputError(std::string("\"") + key + "\" must be an array");
    for (const auto& v : list) out.push_back(number(v, key));
    return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

TrigPoly trig_from_json(const Json& coeffs) {
    if (!coeffs.is_object()) throw InputError("\"coeffs\" must be an object");
    // ak[0] and bk[0] are the first harmonic.
    const std::vector<double> ak = number_list(coeffs, "ak");
    const std::vector<double> bk = number_list(coeffs, "bk");
    const std::size_t n = std::max(ak.size(), bk.size());
    std::vector<double> a(n + 1, 0.0);
    std::vector<double> b(n + 1, 0.0);
    a[0] = number_or(coeffs, "a0", 0.0);
    for (std::size_t k = 0; k < ak.size(); ++k) a[k + 1] = ak[k];
    for (std::size_t k = 0; k < bk.size(); ++k) b[k + 1] = bk[k];
    return TrigPoly(std::move(a), std::move(b)).trimmed();
}

Json trig_to_json(const TrigPoly& f) {
    Json ak = Json::array();
    Json bk = Json::array();
    for (int k = 1; k <= f.degree(); ++k) {
        ak.push_back(f.cos_coeff(k));
        bk.push_back(f.sin_coeff(k));
    }
    return {{"a0", f.cos_coeff(0)}, {"ak", ak}, {"bk", bk}};
}

ConvexCurve curve_from_json(const Json& spec) {
    const Json& type = member(spec, "type");
    if (!type.is_string()) throw InputError("\"type\" must be a string");
    if (type == "curvature") {
        const TrigPoly radius = trig_from_json(member(spec, "coeffs"));
        Vec2 base;
        if (spec.contains("basepoint")) {
            const Json& bp = spec.at("basepoint");
            if (!bp.is_array() || bp.size() != 2) throw InputError("\"basepoint\" must be [x, y]");
            base = {number(bp[0], "basepoint"), number(bp[1], "basepoint")};
        }
        return build_from_curvature(CurvatureProfile{radius}, base);
    }
    if (type == "parametric") {
        const Json& builtin = member(spec, "builtin");
        const Json params = spec.contains("params") ? spec.at("params") : Json::object();
        if (!params.is_object()) throw InputError("\"params\" must be an object");
        if (builtin == "ellipse") {
            return build_from_parametric(ellipse_spec(number(member(params, "a"), "a"), number(member(params, "b"), "b")));
        }
        if (builtin == "fig2") return build_from_parametric(fig2_spec());
        if (builtin == "circle") {
            const double r = number_or(params, "r", 1.0);
            if (!(r > 0.0)) fail(ErrorCode::NonConvex, "circle radius must be positive");
            return build_from_curvature(CurvatureProfile{TrigPoly(r)}, {0.0, 0.0});
        }
        throw InputError("unknown builtin curve " + builtin.dump());
    }
    throw InputError("unknown curve type " + type.dump());
}

std::string fingerprint(const Json& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : spec.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PerturbationField field_from_json(const Json& spec) {
    if (spec.is_object() && spec.contains("coeffs")) return PerturbationField(trig_from_json(spec.at("coeffs")));
    if (spec.is_object() && spec.contains("contact")) {
        const Json& c = spec.at("contact");
        return third_order_contact(number_or(c, "A", 0.0), number_or(c, "B", 0.0), number_or(c, "phi0", 0.0));
    }
    throw InputError("perturbation spec needs \"coeffs\" or \"contact\"");
}

Json field_to_json(const PerturbationField& field) { return {{"coeffs", trig_to_json(field.profile())}}; }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace billiards
