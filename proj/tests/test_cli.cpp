#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "billiards/geometry.hpp"
#include "billiards/io.hpp"
#include "commands.hpp"

using namespace billiards;

namespace {

const std::string kSpecs = BILLIARDS_SPEC_DIR;

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;

    Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::string spec(const std::string& name) { return kSpecs + "/" + name + ".json"; }

std::filesystem::path scratch_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("billiards_cli_test_" + name);
    std::ofstream(path) << content;
    return path;
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("spec parsing") {
    const Json j = Json::parse(R"({"type": "curvature", "coeffs": {"a0": 2, "ak": [0, 0.3], "bk": [0, 0.1]}})");
    const ConvexCurve c = curve_from_json(j);
    CHECK(c.radius_profile().cos_coeff(0) == 2.0);
    CHECK(c.radius_profile().cos_coeff(2) == 0.3);
    CHECK(c.radius_profile().sin_coeff(2) == 0.1);
    CHECK(c.basepoint().x == 0.0);
    CHECK_THROWS_AS(curve_from_json(Json::parse(R"({"type": "spline"})")), InputError);
    CHECK_THROWS_AS(curve_from_json(Json::parse(R"({"type": "curvature"})")), InputError);
    CHECK(fingerprint(j) == fingerprint(Json::parse(j.dump())));
    CHECK(fingerprint(j).size() == 16);

    const TrigPoly back = trig_from_json(trig_to_json(c.radius_profile()));
    CHECK(back.cos_coeff(2) == 0.3);
    const PerturbationField f = field_from_json(Json::parse(R"({"contact": {"A": 24, "B": 0}})"));
    CHECK(std::abs(f.derivative(0.0, 4) - 24) < 1e-12);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("validate") {
    const Outcome circle = run({"validate", spec("circle")});
    CHECK(circle.code == 0);
    CHECK(circle.json()["valid"] == true);
    const Outcome open = run({"validate", spec("open")});
    CHECK(open.code == 2);
    CHECK(open.json()["valid"] == false);
    CHECK(open.json()["reason"].get<std::string>().find("closure violated") != std::string::npos);
    CHECK(run({"validate", spec("fig2")}).code == 0);
    CHECK(run({"validate", "/nonexistent/curve.json"}).code == 3);
    CHECK(run({"validate", scratch_file("bad.json", "{not json").string()}).code == 3);
    CHECK(run({"validate"}).code == 1);
    CHECK(run({"no-such-command"}).code == 1);
}

TEST_CASE("diameters") {
    const Outcome r = run({"diameters", spec("ellipse_sqrt2")});
    REQUIRE(r.code == 0);
    const Json j = r.json();
    REQUIRE(j["diameters"].size() == 2);
    std::multiset<std::string> classes;
    for (const auto& d : j["diameters"]) classes.insert(d["class"].get<std::string>());
    CHECK(classes == std::multiset<std::string>{"Hyperbolic", "Parabolic"});
    CHECK(j.contains("tolerances"));
    CHECK(j.contains("fingerprint"));
    CHECK(j["version"] == cli::kVersion);

    const Outcome circle = run({"diameters", spec("circle")});
    CHECK(circle.code == 0);
    CHECK(circle.json()["continuum"] == true);
}

TEST_CASE("tau1") {
    const Outcome ok = run({"tau1", spec("ellipse_1.5"), "--diameter-index", "0"});
    REQUIRE(ok.code == 0);
    const Json j = ok.json();
    CHECK(std::isfinite(j["tau1"].get<double>()));
    CHECK(j["residuals"].contains("oracle"));
    CHECK(j["residuals"].contains("phase_invariance"));
    CHECK(j["c20"].size() == 2);
    CHECK(j["c21"].size() == 2);

    const Outcome resonant = run({"tau1", spec("ellipse_2"), "--diameter-index", "0"});
    CHECK(resonant.code == 4);
    CHECK(resonant.err.find("esonant") != std::string::npos);
    const Outcome hyperbolic = run({"tau1", spec("ellipse_2"), "--diameter-index", "1"});
    CHECK(hyperbolic.code == 4);
    CHECK(run({"tau1", spec("ellipse_2"), "--diameter-index", "7"}).code == 1);
}

TEST_CASE("portrait and orbit") {
    const Outcome none = run({"portrait", spec("ellipse_1.5"), "--grid", "3x2", "--iters", "0"});
    REQUIRE(none.code == 0);
    const auto rows = parse_csv(none.out);
    CHECK(rows.size() == 6);
    for (const auto& row : rows) CHECK(row[1] == 0.0);

    const Outcome circle = run({"portrait", spec("circle"), "--grid", "3x3", "--iters", "20"});
    REQUIRE(circle.code == 0);
    std::map<int, std::pair<double, double>> p_range;
    for (const auto& row : parse_csv(circle.out)) {
        auto [it, fresh] = p_range.try_emplace(static_cast<int>(row[0]), row[5], row[5]);
        it->second.first = std::min(it->second.first, row[5]);
        it->second.second = std::max(it->second.second, row[5]);
    }
    CHECK(p_range.size() == 9);
    for (const auto& [id, range] : p_range) CHECK(range.second - range.first < 1e-12);

    const Outcome orbit = run({"orbit", spec("circle"), "--phi", "0.5", "--theta", "0.5235987755982988", "--steps", "3"});
    REQUIRE(orbit.code == 0);
    const auto states = parse_csv(orbit.out);
    REQUIRE(states.size() == 4);
    CHECK(circular_distance(states[3][1], 0.5) < 1e-10);
    CHECK(run({"orbit", spec("circle"), "--phi", "0", "--theta", "2"}).code == 1);
}

TEST_CASE("periodic") {
    const Outcome r = run({"periodic", spec("circle"), "--period", "3"});
    REQUIRE(r.code == 0);
    const Json j = r.json();
    REQUIRE(!j["orbits"].empty());
    CHECK(j["orbits"][0]["class"] == "Parabolic");
    CHECK(std::abs(j["orbits"][0]["trace"].get<double>() - 2) < 1e-9);
    CHECK(run({"periodic", spec("circle"), "--period", "1"}).code == 1);
}

TEST_CASE("perturb") {
    const Outcome br = run({"perturb", "break-resonance", spec("ellipse_2"), "--margin", "1e-3"});
    REQUIRE(br.code == 0);
    const Json j = br.json();
    CHECK(j.contains("field"));
    CHECK(j.contains("certificate"));
    CHECK(run({"perturb", "break-resonance", spec("ellipse_2"), "--margin", "-1"}).code == 1);
    CHECK(run({"perturb", "break-resonance", spec("ellipse_1.5")}).code == 4);

    const Outcome tw = run({"perturb", "twist", spec("ellipse_1.5")});
    REQUIRE(tw.code == 0);
    const Json t = tw.json();
    CHECK(t["certificate"]["path"] == 1);
    CHECK(field_from_json(t["field"]).is_zero());

    const auto field = scratch_file("field.json", R"({"contact": {"A": 1e-3, "B": 0}})");
    const Outcome ap = run({"perturb", "apply", spec("ellipse_1.5"), "--field", field.string()});
    CHECK(ap.code == 0);
    const auto huge = scratch_file("huge.json", R"({"coeffs": {"a0": 5}})");
    CHECK(run({"perturb", "apply", spec("ellipse_1.5"), "--field", huge.string()}).code == 2);
}

TEST_CASE("seed from environment and flag") {
    ::setenv(cli::kSeedVariable, "12345", 1);
    const Json env = run({"tau1", spec("ellipse_1.5"), "--diameter-index", "0"}).json();
    const Json flag = run({"--seed", "777", "tau1", spec("ellipse_1.5"), "--diameter-index", "0"}).json();
    ::unsetenv(cli::kSeedVariable);
    CHECK(env["seed"] == 12345);
    CHECK(flag["seed"] == 777);
}

}  // TEST_SUITE
