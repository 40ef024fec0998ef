#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "billiards/billiard_map.hpp"
#include "billiards/birkhoff.hpp"
#include "billiards/diameters.hpp"
#include "billiards/io.hpp"
#include "billiards/perturbation.hpp"

namespace billiards::cli {

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonConvex:
        case ErrorCode::NotClosed:
        case ErrorCode::ResamplingFailure:
        case ErrorCode::Inadmissible:
        case ErrorCode::NotDiffeo:
            return InvalidCurve;
        case ErrorCode::Continuum:
        case ErrorCode::NotElliptic:
        case ErrorCode::Resonant:
        case ErrorCode::NotResonant:
        case ErrorCode::MarginUnreachable:
            return Refused;
        case ErrorCode::InvalidArgument:
            return Usage;
        case ErrorCode::SolveFailure:
        case ErrorCode::NotFound:
        case ErrorCode::Degenerate:
        case ErrorCode::SeriesSolveFailure:
            return NumericFailure;
    }
    return NumericFailure;
}

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5eed'b111'a4d5ULL;

Json complex_json(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

Json diameter_json(const Diameter& d, int index, double resonance_tol) {
    Json j = {{"index", index},
              {"phi0", d.phi0},
              {"L0", d.length},
              {"R0", d.r0},
              {"Rpi", d.rpi},
              {"lpp", d.lpp},
              {"class", std::string(to_string(d.stability.kind))},
              {"sum_gap", d.stability.sum_gap},
              {"product_gap", d.stability.product_gap}};
    if (d.gamma) {
        const Resonance r = is_resonant(*d.gamma, resonance_tol);
        j["gamma"] = *d.gamma;
        j["resonant"] = r.resonant;
        j["resonance_distance"] = r.distance;
        if (r.resonant) j["j"] = r.order;
    }
    return j;
}

Json twist_json(const TwistResult& t) {
    return {{"gamma", t.gamma},
            {"c20", complex_json(t.c20)},
            {"c21", complex_json(t.c21)},
            {"tau1", t.tau1},
            {"imag_residue", t.imag_residue},
            {"printed_form", complex_json(t.printed_form)},
            {"residuals", {{"oracle", t.oracle_residual}, {"phase_invariance", t.phase_residual}}}};
}

Json orbit_json(const PeriodicOrbit& o) {
    Json states = Json::array();
    for (const auto& s : o.states) states.push_back({{"phi", s.phi}, {"theta", s.theta}});
    return {{"period", o.period},
            {"winding", o.winding},
            {"perimeter", o.perimeter},
            {"trace", o.trace},
            {"class", std::string(to_string(o.stability))},
            {"states", states}};
}

Json probe_json(const IslandProbe& p, double delta) {
    Json j = {{"delta", delta}, {"iterations", p.iterations}, {"max_excursion", p.max_excursion}};
    if (p.rotation) j["rotation"] = *p.rotation;
    return j;
}

Json curve_summary(const ConvexCurve& c) {
    return {{"closure_residual", c.closure_residual()},
            {"convexity_margin", c.convexity_margin()},
            {"arclength", c.total_arclength()},
            {"degree", c.radius_profile().degree()}};
}

struct Loaded {
    Json spec;
    std::string fingerprint;
};

Loaded load(const std::string& path) {
    Loaded l;
    l.spec = read_json_file(path);
    l.fingerprint = fingerprint(l.spec);
    return l;
}

Json header(const std::string& command, const Loaded& l) {
    return {{"command", command}, {"version", kVersion}, {"fingerprint", l.fingerprint}};
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

/// Writes to the file when a path is given, else to out.
template <class Writer>
void with_output(const std::string& path, std::ostream& out, Writer&& write) {
    if (path.empty()) {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot write " + path);
    write(file);
    if (!file) throw InputError("write failed: " + path);
}

const Diameter& pick_diameter(const std::vector<Diameter>& all, int index) {
    if (index < 0 || index >= static_cast<int>(all.size())) {
        fail(ErrorCode::InvalidArgument,
             "diameter index " + std::to_string(index) + " out of range (" + std::to_string(all.size()) + " found)");
    }
    return all[static_cast<std::size_t>(index)];
}

struct Options {
    std::uint64_t seed = kDefaultSeed;

    std::string spec;
    std::string out_path;
    std::string field_path;
    double class_tol = kDefaultClassTol;
    double resonance_tol = kDefaultResonanceTol;
    int grid = 512;
    bool twist = false;

    int diameter_index = -1;
    int phases = 8;

    std::string portrait_grid = "20x20";
    int iters = 500;

    double margin = 1e-3;
    double budget = 1e-2;
    double twist_tol = 1e-8;

    int period = 0;
    int winding = 1;
    int starts = 32;
    double parabolic_tol = 1e-9;
    double probe_delta = 0.0;
    int probe_iters = 10000;

    double phi = 0.0;
    double theta = 0.0;
    int steps = 100;
};

int cmd_validate(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    Json j = header("validate", l);
    try {
        const ConvexCurve c = curve_from_json(l.spec);
        j["valid"] = true;
        j["curve"] = curve_summary(c);
        emit(out, j);
        return Ok;
    } catch (const BilliardError& e) {
        if (exit_code(e.code()) != InvalidCurve) throw;
        j["valid"] = false;
        j["error"] = std::string(to_string(e.code()));
        j["reason"] = e.what();
        emit(out, j);
        return InvalidCurve;
    }
}

int cmd_diameters(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    Json j = header("diameters", l);
    j["tolerances"] = {{"class_tol", o.class_tol}, {"resonance_tol", o.resonance_tol}, {"grid", o.grid}};
    std::vector<Diameter> all;
    try {
        all = find_diameters(c, o.grid, o.class_tol);
    } catch (const BilliardError& e) {
        if (e.code() != ErrorCode::Continuum) throw;
        j["continuum"] = true;
        j["diameters"] = Json::array();
        emit(out, j);
        return Ok;
    }
    j["continuum"] = false;
    Json list = Json::array();
    for (int i = 0; i < static_cast<int>(all.size()); ++i) {
        Json d = diameter_json(all[i], i, o.resonance_tol);
        const bool eligible = all[i].gamma && !is_resonant(*all[i].gamma, o.resonance_tol).resonant;
        if (o.twist && eligible) {
            TwistOptions topt;
            topt.seed = o.seed;
            topt.phases = o.phases;
            topt.resonance_tol = o.resonance_tol;
            d["twist"] = twist_json(twist_coefficient(c, all[i], topt));
        }
        list.push_back(d);
    }
    j["diameters"] = list;
    emit(out, j);
    return Ok;
}

int cmd_tau1(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    const auto all = find_diameters(c, o.grid, o.class_tol);
    const Diameter& d = pick_diameter(all, o.diameter_index);
    if (d.stability.kind != Stability::Elliptic) {
        fail(ErrorCode::NotElliptic, "diameter " + std::to_string(o.diameter_index) + " is not elliptic (" +
                                         std::string(to_string(d.stability.kind)) + ")");
    }
    TwistOptions topt;
    topt.seed = o.seed;
    topt.phases = o.phases;
    topt.resonance_tol = o.resonance_tol;
    const TwistResult t = twist_coefficient(c, d, topt);
    Json j = header("tau1", l);
    j.update(twist_json(t));
    j["diameter"] = diameter_json(d, o.diameter_index, o.resonance_tol);
    j["seed"] = o.seed;
    j["tolerances"] = {{"class_tol", o.class_tol},
                       {"resonance_tol", o.resonance_tol},
                       {"fd_step", FiniteDifferenceOptions{}.step},
                       {"phases", o.phases}};
    emit(out, j);
    return Ok;
}

std::pair<int, int> parse_grid(const std::string& text) {
    int g = 0;
    int h = 0;
    char x = 0;
    std::istringstream in(text);
    if (!(in >> g >> x >> h) || (x != 'x' && x != 'X') || g < 1 || h < 1 || !in.eof()) {
        fail(ErrorCode::InvalidArgument, "grid must look like 20x20");
    }
    return {g, h};
}

struct Row {
    int step;
    PhaseState state;
    SPState sp;
};

std::vector<Row> trajectory(const ConvexCurve& c, PhaseState start, int steps) {
    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(steps) + 1);
    PhaseState s = start;
    for (int k = 0;; ++k) {
        rows.push_back({k, s, to_sp(c, s)});
        if (k == steps) break;
        try {
            s = next_impact(c, s);
        } catch (const BilliardError&) {
            break;
        }
    }
    return rows;
}

int cmd_portrait(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    const auto [g, h] = parse_grid(o.portrait_grid);
    if (o.iters < 0) fail(ErrorCode::InvalidArgument, "iters must be non-negative");
    const int total = g * h;
    std::vector<std::vector<Row>> orbits(static_cast<std::size_t>(total));
    const int workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 16u));
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (int id = w; id < total; id += workers) {
                const int i = id / h;
                const int k = id % h;
                const PhaseState start{kTwoPi * i / g, -0.5 * kPi + kPi * (k + 0.5) / h};
                orbits[static_cast<std::size_t>(id)] = trajectory(c, start, o.iters);
            }
        }));
    }
    for (auto& j : jobs) j.get();
    with_output(o.out_path, out, [&](std::ostream& s) {
        s << "orbit_id,step,phi,theta,s,p\n";
        for (int id = 0; id < total; ++id) {
            for (const Row& r : orbits[static_cast<std::size_t>(id)]) {
                s << id << ',' << r.step << ',' << format_double(r.state.phi) << ',' << format_double(r.state.theta)
                  << ',' << format_double(r.sp.s) << ',' << format_double(r.sp.p) << '\n';
            }
        }
    });
    return Ok;
}

int cmd_orbit(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    if (o.steps < 0) fail(ErrorCode::InvalidArgument, "steps must be non-negative");
    if (!(std::abs(o.theta) < 0.5 * kPi)) fail(ErrorCode::InvalidArgument, "theta must lie in (-pi/2, pi/2)");
    const auto states = iterate(c, {reduce_angle(o.phi), o.theta}, o.steps);
    with_output(o.out_path, out, [&](std::ostream& s) {
        s << "step,phi,theta,s,p,x,y\n";
        for (std::size_t k = 0; k < states.size(); ++k) {
            const SPState sp = to_sp(c, states[k]);
            const Vec2 x = c.point(states[k].phi);
            s << k << ',' << format_double(states[k].phi) << ',' << format_double(states[k].theta) << ','
              << format_double(sp.s) << ',' << format_double(sp.p) << ',' << format_double(x.x) << ','
              << format_double(x.y) << '\n';
        }
    });
    return Ok;
}

int cmd_periodic(const Options& o, std::ostream& out) {
    if (o.period < 2) fail(ErrorCode::InvalidArgument, "period must be at least 2 (billiards have no fixed points)");
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    PeriodicSearchOptions popt;
    popt.starts = o.starts;
    popt.seed = o.seed;
    popt.parabolic_tol = o.parabolic_tol;
    const auto orbits = find_periodic_orbits(c, o.period, o.winding, popt);
    Json list = Json::array();
    for (const auto& orbit : orbits) {
        Json j = orbit_json(orbit);
        if (o.probe_delta > 0.0 && orbit.stability == Stability::Elliptic) {
            j["island_probe"] = probe_json(island_probe(c, orbit.states, o.probe_delta, o.probe_iters), o.probe_delta);
        }
        list.push_back(j);
    }
    Json j = header("periodic", l);
    j["seed"] = o.seed;
    j["tolerances"] = {{"parabolic_tol", o.parabolic_tol}, {"starts", o.starts}};
    j["orbits"] = list;
    emit(out, j);
    return Ok;
}

Json c2_json(const PerturbationField& f) {
    const C2Norm n = c2_norm(f);
    return {{"value", n.value}, {"bound", n.bound}};
}

int cmd_break_resonance(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    const auto all = find_diameters(c, o.grid, o.class_tol);
    int index = o.diameter_index;
    if (index < 0) {
        for (int i = 0; i < static_cast<int>(all.size()) && index < 0; ++i) {
            if (all[i].gamma && is_resonant(*all[i].gamma, o.resonance_tol).resonant) index = i;
        }
        if (index < 0) fail(ErrorCode::NotResonant, "no resonant elliptic diameter");
    }
    const Diameter& d = pick_diameter(all, index);
    BreakResonanceOptions bopt;
    bopt.budget = o.budget;
    bopt.resonance_tol = o.resonance_tol;
    const BreakResonanceResult r = break_resonance(c, d, o.margin, bopt);
    Json j = header("perturb break-resonance", l);
    j["field"] = field_to_json(r.field);
    j["c2_norm"] = c2_json(r.field);
    j["certificate"] = {{"diameter_before", diameter_json(d, index, o.resonance_tol)},
                        {"diameter_after", diameter_json(r.diameter, index, o.resonance_tol)},
                        {"gamma_before", r.gamma_before},
                        {"gamma_after", r.gamma_after},
                        {"distance_after", r.distance_after},
                        {"margin", o.margin},
                        {"admissible", admissible(c, r.field)}};
    j["tolerances"] = {{"class_tol", o.class_tol}, {"resonance_tol", o.resonance_tol}, {"budget", o.budget}};
    emit(out, j);
    return Ok;
}

int cmd_twist(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    EnsureTwistOptions eopt;
    eopt.tol = o.twist_tol;
    eopt.margin = o.margin;
    eopt.resonance_tol = o.resonance_tol;
    const TwistCertificate cert = ensure_twist(c, eopt);
    Json stages = Json::array();
    for (const auto& s : cert.stages) {
        stages.push_back({{"kind", s.kind}, {"field", field_to_json(s.field)}, {"c2_norm", c2_json(s.field)}});
    }
    Json j = header("perturb twist", l);
    // Each stage perturbs the previous stage's curve, so two stages have no single field.
    if (cert.stages.size() <= 1) {
        j["field"] = field_to_json(cert.stages.empty() ? PerturbationField{} : cert.stages[0].field);
    }
    j["stages"] = stages;
    j["certificate"] = {{"path", cert.path},
                        {"diameter", diameter_json(cert.diameter, 0, o.resonance_tol)},
                        {"tau1_before", cert.tau1_before},
                        {"tau1", cert.tau1},
                        {"threshold", cert.tol},
                        {"curve", curve_summary(cert.curve)}};
    j["tolerances"] = {{"tol", o.twist_tol}, {"margin", o.margin}, {"resonance_tol", o.resonance_tol}};
    emit(out, j);
    return Ok;
}

int cmd_apply(const Options& o, std::ostream& out) {
    const Loaded l = load(o.spec);
    const ConvexCurve c = curve_from_json(l.spec);
    const Json field_spec = read_json_file(o.field_path);
    const PerturbationField f = field_from_json(field_spec);
    const PerturbedCurve p = apply(c, f);
    const AntipodalDeviation dev = antipodal_deviation(c, f);
    Json j = header("perturb apply", l);
    j["field_fingerprint"] = fingerprint(field_spec);
    j["field"] = field_to_json(f);
    j["c2_norm"] = c2_json(f);
    j["curve"] = curve_summary(p.curve);
    j["antipodal_deviation"] = {{"offset", dev.offset}, {"slope", dev.slope}, {"bend", dev.bend}};
    try {
        const auto all = find_diameters(p.curve, o.grid, o.class_tol);
        Json list = Json::array();
        for (int i = 0; i < static_cast<int>(all.size()); ++i) list.push_back(diameter_json(all[i], i, o.resonance_tol));
        j["continuum"] = false;
        j["diameters"] = list;
    } catch (const BilliardError& e) {
        if (e.code() != ErrorCode::Continuum) throw;
        j["continuum"] = true;
        j["diameters"] = Json::array();
    }
    j["tolerances"] = {{"class_tol", o.class_tol}, {"resonance_tol", o.resonance_tol}, {"grid", o.grid}};
    emit(out, j);
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Billiard dynamics in strictly convex tables: diameters, twist coefficients, perturbations."};
    app.name("billiards");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.add_option("--seed", o.seed, "Seed for multi-start searches and phase checks")->envname(kSeedVariable);

    auto spec_arg = [&](CLI::App* sub) {
        sub->add_option("spec", o.spec, "Curve spec (JSON)")->required();
    };
    auto tolerance_args = [&](CLI::App* sub) {
        sub->add_option("--tol", o.class_tol, "Classification tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--resonance-tol", o.resonance_tol, "Resonance guard")->check(CLI::PositiveNumber);
        sub->add_option("--grid", o.grid, "Diameter scan grid")->check(CLI::Range(64, 1 << 20));
    };

    CLI::App* validate = app.add_subcommand("validate", "Check that a spec describes a closed strictly convex curve");
    spec_arg(validate);

    CLI::App* diameters = app.add_subcommand("diameters", "List diameters with stability and resonance");
    spec_arg(diameters);
    tolerance_args(diameters);
    diameters->add_flag("--twist", o.twist, "Attach the twist coefficient of each non-resonant elliptic diameter");

    CLI::App* tau = app.add_subcommand("tau1", "Twist coefficient of an elliptic diameter");
    spec_arg(tau);
    tolerance_args(tau);
    tau->add_option("--diameter-index", o.diameter_index, "Index into the diameters report")->required();
    tau->add_option("--phases", o.phases, "Random eigenbasis phases for the invariance check")
        ->check(CLI::NonNegativeNumber);

    CLI::App* portrait = app.add_subcommand("portrait", "Phase portrait CSV from a grid of initial conditions");
    spec_arg(portrait);
    portrait->add_option("--grid", o.portrait_grid, "GxH initial conditions in phi x theta");
    portrait->add_option("--iters", o.iters, "Bounces per orbit")->check(CLI::NonNegativeNumber);
    portrait->add_option("--out", o.out_path, "CSV file (default stdout)");

    CLI::App* orbit = app.add_subcommand("orbit", "Single orbit CSV");
    spec_arg(orbit);
    orbit->add_option("--phi", o.phi, "Initial tangent angle")->required();
    orbit->add_option("--theta", o.theta, "Initial reflection angle")->required();
    orbit->add_option("--steps", o.steps, "Bounces")->check(CLI::NonNegativeNumber);
    orbit->add_option("--out", o.out_path, "CSV file (default stdout)");

    CLI::App* periodic = app.add_subcommand("periodic", "Periodic orbits of given period and winding");
    spec_arg(periodic);
    periodic->add_option("--period", o.period, "Bounces per period")->required();
    periodic->add_option("--winding", o.winding, "Turns around the table per period");
    periodic->add_option("--starts", o.starts, "Multi-start count")->check(CLI::PositiveNumber);
    periodic->add_option("--parabolic-tol", o.parabolic_tol, "Tolerance on |tr| - 2")->check(CLI::PositiveNumber);
    periodic->add_option("--probe-delta", o.probe_delta, "Island probe radius for elliptic orbits")
        ->check(CLI::NonNegativeNumber);
    periodic->add_option("--probe-iters", o.probe_iters, "Island probe returns")->check(CLI::NonNegativeNumber);

    CLI::App* perturb = app.add_subcommand("perturb", "Normal perturbations of a curve");
    perturb->require_subcommand(1);
    CLI::App* breaking = perturb->add_subcommand("break-resonance", "Move a resonant elliptic diameter off resonance");
    spec_arg(breaking);
    tolerance_args(breaking);
    breaking->add_option("--margin", o.margin, "Required distance from resonance")->check(CLI::NonNegativeNumber);
    breaking->add_option("--budget", o.budget, "Largest C2 norm tried")->check(CLI::PositiveNumber);
    breaking->add_option("--diameter-index", o.diameter_index, "Diameter (default: first resonant)");
    CLI::App* twist = perturb->add_subcommand("twist", "Perturb until an elliptic diameter has nonzero twist");
    spec_arg(twist);
    twist->add_option("--tol", o.twist_tol, "Vanishing threshold for tau1")->check(CLI::PositiveNumber);
    twist->add_option("--margin", o.margin, "Resonance margin")->check(CLI::NonNegativeNumber);
    twist->add_option("--resonance-tol", o.resonance_tol, "Resonance guard")->check(CLI::PositiveNumber);
    CLI::App* applying = perturb->add_subcommand("apply", "Apply a field and re-analyse the curve");
    spec_arg(applying);
    tolerance_args(applying);
    applying->add_option("--field", o.field_path, "Perturbation spec (JSON)")->required();

    std::vector<std::string> reversed_args(args.rbegin(), args.rend());
    try {
        app.parse(reversed_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (diameters->parsed()) return cmd_diameters(o, out);
        if (tau->parsed()) return cmd_tau1(o, out);
        if (portrait->parsed()) return cmd_portrait(o, out);
        if (orbit->parsed()) return cmd_orbit(o, out);
        if (periodic->parsed()) return cmd_periodic(o, out);
        if (breaking->parsed()) return cmd_break_resonance(o, out);
        if (twist->parsed()) return cmd_twist(o, out);
        if (applying->parsed()) return cmd_apply(o, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return InputFailure;
    } catch (const BilliardError& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    }
    return Usage;
}

}  // namespace billiards::cli
