#include "nasm/cli_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "nasm/map_core.hpp"
#include "nasm/parallel.hpp"
#include "nasm/rotation.hpp"
#include "nasm/transport_scan.hpp"

namespace nasm {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string format_long(long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.21Lg", v);
    return buf;
}

long double parse_long(const std::string& s) {
    std::size_t used = 0;
    const long double v = std::stold(s, &used);
    if (used != s.size()) {
        throw IoError("malformed number '" + s + "'");
    }
    return v;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw IoError("malformed number '" + s + "'");
    }
    return v;
}

// JSON numbers lose nothing through nlohmann's shortest round-trip output.
json scan_json(const ScanConfig& s) {
    return {{"M", s.num_seeds},
            {"N", s.max_iterations},
            {"threshold", s.threshold},
            {"box", {s.box.x_min, s.box.x_max, s.box.y_min, s.box.y_max}},
            {"rule", s.rule == EscapeRule::Displacement ? "displacement" : "window"},
            {"seeding", s.seeding == SeedMode::Lattice ? "lattice" : "random"},
            {"seed", s.rng_seed},
            {"threads", s.threads}};
}

json kam_json(const ContinuationOptions& k) {
    return {{"tolerance", k.solve.tolerance},
            {"tail_tolerance", k.solve.tail_tolerance},
            {"max_iterations", k.solve.max_iterations},
            {"max_modes", k.solve.max_modes},
            {"small_divisor", k.solve.small_divisor},
            {"padding", k.solve.padding},
            {"sobolev_s", k.solve.sobolev_s},
            {"blowup_threshold", k.blowup_threshold},
            {"initial_step", k.initial_step},
            {"max_step", k.max_step},
            {"min_step", k.min_step},
            {"growth", k.growth},
            {"initial_modes", k.initial_modes},
            {"s_max", k.s_max},
            {"secant", k.secant_predictor}};
}

}  // namespace

json config_to_json(const Config& cfg) {
    json j;
    j["scan"] = scan_json(cfg.scan);
    j["scan"]["tol"] = cfg.radial_tol;
    j["kam"] = kam_json(cfg.kam);
    return j;
}

json RunManifest::to_json() const {
    return {{"subcommand", subcommand}, {"argv", argv},         {"config", config},
            {"version", version},       {"wall_time", wall_time}, {"outputs", outputs}};
}

// --- curves ------------------------------------------------------------------

std::string curve_to_csv(const BoundaryCurve& curve) {
    std::ostringstream os;
    os << "angle,r_c,kappa1,kappa2,method,omega,tol,N_or_modes,M\n";
    for (const auto& p : curve.points) {
        os << format_double(p.angle) << ',' << format_double(p.r_c) << ',' << format_double(p.kappa1) << ','
           << format_double(p.kappa2) << ',' << to_string(p.method) << ','
           << (p.omega ? format_double(*p.omega) : std::string{}) << ',' << format_double(p.tol) << ','
           << p.n_or_modes << ',' << p.m << '\n';
    }
    return os.str();
}

json curve_to_json(const BoundaryCurve& curve, const json& manifest) {
    json j;
    j["schema"] = kCurveSchema;
    j["points"] = json::array();
    for (const auto& p : curve.points) {
        json row = {{"angle", p.angle},   {"r_c", p.r_c}, {"kappa1", p.kappa1}, {"kappa2", p.kappa2},
                    {"method", to_string(p.method)}};
        row["omega"] = p.omega ? json(*p.omega) : json(nullptr);
        row["tol"] = p.tol;
        row["N_or_modes"] = p.n_or_modes;
        row["M"] = p.m;
        j["points"].push_back(row);
    }
    j["failures"] = json::array();
    for (const auto& f : curve.failures) {
        j["failures"].push_back({{"angle", f.angle}, {"reason", f.reason}});
    }
    if (!manifest.is_null()) {
        j["manifest"] = manifest;
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    f << text;
    f.close();
    if (!f) {
        throw IoError("write to '" + path + "' failed");
    }
}

void export_curve(const BoundaryCurve& curve, const std::string& path, CurveFormat format, const json& manifest) {
    if (format == CurveFormat::Csv) {
        write_text_file(path, curve_to_csv(curve));
    } else {
        write_text_file(path, curve_to_json(curve, manifest).dump(2) + "\n");
    }
}

namespace {

BoundaryMethod parse_method(const std::string& s) {
    if (s == "direct") return BoundaryMethod::Direct;
    if (s == "kam") return BoundaryMethod::Kam;
    throw IoError("unknown method '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

BoundaryCurve curve_from_json(const json& j) {
    try {
        if (j.at("schema").get<int>() != kCurveSchema) {
            throw IoError("unsupported curve schema");
        }
        BoundaryCurve c;
        for (const auto& row : j.at("points")) {
            BoundaryPoint p;
            p.angle = row.at("angle").get<double>();
            p.r_c = row.at("r_c").get<double>();
            p.kappa1 = row.at("kappa1").get<double>();
            p.kappa2 = row.at("kappa2").get<double>();
            p.method = parse_method(row.at("method").get<std::string>());
            if (!row.at("omega").is_null()) {
                p.omega = row.at("omega").get<double>();
            }
            p.tol = row.at("tol").get<double>();
            p.n_or_modes = row.at("N_or_modes").get<std::size_t>();
            p.m = row.at("M").get<std::size_t>();
            c.points.push_back(p);
        }
        for (const auto& f : j.at("failures")) {
            c.failures.push_back({f.at("angle").get<double>(), f.at("reason").get<std::string>()});
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed curve JSON: ") + e.what());
    }
}

BoundaryCurve curve_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || split(line, ',').size() != 9) {
        throw IoError("curve CSV header missing");
    }
    BoundaryCurve c;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split(line, ',');
        if (f.size() != 9) {
            throw IoError("curve CSV row has " + std::to_string(f.size()) + " fields");
        }
        BoundaryPoint p;
        p.angle = parse_double(f[0]);
        p.r_c = parse_double(f[1]);
        p.kappa1 = parse_double(f[2]);
        p.kappa2 = parse_double(f[3]);
        p.method = parse_method(f[4]);
        if (!f[5].empty()) p.omega = parse_double(f[5]);
        p.tol = parse_double(f[6]);
        p.n_or_modes = std::stoull(f[7]);
        p.m = std::stoull(f[8]);
        c.points.push_back(p);
    }
    return c;
}

BoundaryCurve load_curve(const std::string& path) {
    const std::string text = read_text_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        try {
            return curve_from_json(json::parse(text));
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(std::string("malformed curve JSON: ") + e.what());
        }
    }
    return curve_from_csv(text);
}

// --- circles and grids -----------------------------------------------------------

json circle_to_json(const FourierCircle& K, const MapParams& params, const SolveReport& report,
                    const SolveOptions& opts) {
    json j;
    j["schema"] = kCircleSchema;
    j["omega"] = K.omega;
    j["kappa1"] = params.kappa1;
    j["kappa2"] = params.kappa2;
    j["n"] = K.modes();
    j["c"] = format_long(K.c);
    j["tolerance"] = opts.tolerance;
    j["tail_tolerance"] = opts.tail_tolerance;
    j["final_error"] = report.final_error;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    // Modes 1 .. n/2 - 1 as [re, im] pairs; mode 0 and Nyquist are zero.
    auto coeffs = [](const Spectrum& s) {
        json a = json::array();
        for (std::size_t k = 1; k + 1 < s.size(); ++k) {
            a.push_back({format_long(s[k].real()), format_long(s[k].imag())});
        }
        return a;
    };
    j["ux"] = coeffs(K.ux);
    j["uy"] = coeffs(K.uy);
    return j;
}

FourierCircle circle_from_json(const json& j) {
    try {
        if (j.at("schema").get<int>() != kCircleSchema) {
            throw IoError("unsupported circle schema");
        }
        const std::size_t n = j.at("n").get<std::size_t>();
        if (!is_power_of_two(n) || n < 4) {
            throw IoError("circle size must be a power of two >= 4");
        }
        FourierCircle K = FourierCircle::flat(n, j.at("omega").get<double>(), parse_long(j.at("c").get<std::string>()));
        auto read = [&](const json& a, Spectrum& s) {
            if (a.size() + 2 != s.size()) {
                throw IoError("coefficient count does not match n");
            }
            for (std::size_t k = 1; k + 1 < s.size(); ++k) {
                s[k] = {parse_long(a[k - 1].at(0).get<std::string>()), parse_long(a[k - 1].at(1).get<std::string>())};
            }
        };
        read(j.at("ux"), K.ux);
        read(j.at("uy"), K.uy);
        return K;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed circle JSON: ") + e.what());
    }
}

std::string circle_samples_csv(const FourierCircle& K) {
    std::ostringstream os;
    os << "theta,x,y\n";
    const auto pts = K.samples();
    for (std::size_t j = 0; j < pts.size(); ++j) {
        os << format_double(static_cast<double>(j) / static_cast<double>(pts.size())) << ','
           << format_double(pts[j].x) << ',' << format_double(pts[j].y) << '\n';
    }
    return os.str();
}

std::string grid_to_csv(const StabilityGrid& grid) {
    std::ostringstream os;
    os << "kappa1,kappa2,class,stable,residue_stable,interior\n";
    const std::string cls = to_string(grid.point_class);
    for (std::size_t i = 0; i < grid.resolution; ++i) {
        for (std::size_t j = 0; j < grid.resolution; ++j) {
            const MapParams k = grid.center(i, j);
            const std::size_t idx = grid.index(i, j);
            os << format_double(k.kappa1) << ',' << format_double(k.kappa2) << ',' << cls << ','
               << int(grid.closed_form[idx] != 0) << ',' << int(grid.residue[idx] != 0) << ','
               << int(grid.interior(i, j)) << '\n';
        }
    }
    return os.str();
}

// --- command line ------------------------------------------------------------------

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

std::vector<double> parse_list(const std::string& s, std::size_t expected, const std::string& what) {
    std::vector<double> out;
    for (const auto& f : split(s, ',')) {
        try {
            out.push_back(parse_double(f));
        } catch (const IoError&) {
            throw UsageError("--" + what + ": malformed number '" + f + "'");
        }
    }
    if (expected != 0 && out.size() != expected) {
        throw UsageError("--" + what + " expects " + std::to_string(expected) + " comma-separated values");
    }
    return out;
}

// Evenly spaced rays on [0, pi], both ends included.
std::vector<double> ray_angles(std::size_t count) {
    if (count == 0) {
        throw UsageError("--rays must be at least 1");
    }
    if (count == 1) {
        return {0.0};
    }
    std::vector<double> a(count);
    for (std::size_t i = 0; i < count; ++i) {
        a[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return a;
}

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;  // section.key=value
    std::string out;
    std::string manifest_path;
    int threads = -1;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "configuration file");
    app->add_option("--set", c.overrides, "override, section.key=value");
    app->add_option("-o,--out", c.out, "output file");
    app->add_option("--manifest", c.manifest_path, "manifest path (default: <out>.manifest.json)");
    app->add_option("--threads", c.threads, "worker threads (default: NASM_THREADS or all cores)");
}

Config build_config(const Common& c, std::ostream& err) {
    Config cfg;
    if (!c.config_path.empty()) {
        cfg = load_config(c.config_path);
    }
    for (const auto& w : cfg.warnings) {
        err << json{{"warning", w}}.dump() << '\n';
    }
    for (const auto& o : c.overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw UsageError("--set expects section.key=value, got '" + o + "'");
        }
        try {
            apply_config_value(cfg, o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--set: ") + e.what());
        }
    }
    if (c.threads >= 0) {
        cfg.scan.threads = static_cast<unsigned>(c.threads);
    }
    return cfg;
}

class Outputs {
public:
    Outputs(const Common& c, std::ostream& out) : common_(c), out_(out) {}

    // Writes to --out if given, stdout otherwise.
    void primary(const std::string& text) {
        if (common_.out.empty()) {
            out_ << text;
        } else {
            write_text_file(common_.out, text);
            files_.push_back(common_.out);
        }
    }
    void extra(const std::string& path, const std::string& text) {
        write_text_file(path, text);
        files_.push_back(path);
    }
    [[nodiscard]] const std::vector<std::string>& files() const { return files_; }
    [[nodiscard]] std::string manifest_path() const {
        if (!common_.manifest_path.empty()) return common_.manifest_path;
        if (!common_.out.empty()) return common_.out + ".manifest.json";
        return {};
    }

private:
    const Common& common_;
    std::ostream& out_;
    std::vector<std::string> files_;
};

json point_json(PhasePoint p) { return {p.x, p.y}; }

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    CLI::App app{"Nonautonomous standard map toolkit", "nasm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    json settings = json::object();  // subcommand-specific inputs for the manifest
    std::function<void(Outputs&, Config&)> action;

    MapParams params;
    PhasePoint start{0.1, 0.1};
    auto add_params = [&](CLI::App* s) {
        s->add_option("--kappa1", params.kappa1, "first kick strength");
        s->add_option("--kappa2", params.kappa2, "second kick strength");
    };
    auto add_start = [&](CLI::App* s) {
        s->add_option("--x", start.x, "initial x");
        s->add_option("--y", start.y, "initial y");
    };

    // orbit
    auto* orbit = app.add_subcommand("orbit", "iterate and dump a trajectory");
    add_common(orbit, common);
    add_params(orbit);
    add_start(orbit);
    std::size_t orbit_n = 1000;
    bool orbit_raw = false;
    bool orbit_cell = false;
    orbit->add_option("-n,--n", orbit_n, "iterations");
    orbit->add_flag("--raw", orbit_raw, "alternate single kicks instead of the composed map");
    orbit->add_flag("--cell", orbit_cell, "reduce x to [0, 1)");
    orbit->callback([&] {
        settings = {{"kappa1", params.kappa1}, {"kappa2", params.kappa2}, {"start", point_json(start)},
                    {"n", orbit_n},           {"raw", orbit_raw},        {"cell", orbit_cell}};
        action = [&](Outputs& o, Config&) {
            std::vector<PhasePoint> pts;
            if (orbit_raw) {
                pts = nasm_trajectory(params, start, orbit_n);
            } else {
                pts.reserve(orbit_n + 1);
                PhasePoint p = start;
                pts.push_back(p);
                for (std::size_t i = 0; i < orbit_n; ++i) {
                    p = composed_step(params, p);
                    pts.push_back(p);
                }
            }
            std::ostringstream os;
            os << "n,x,y\n";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const PhasePoint q = orbit_cell ? pts[i].cell() : pts[i];
                os << i << ',' << format_double(q.x) << ',' << format_double(q.y) << '\n';
            }
            o.primary(os.str());
        };
    });

    // stability
    auto* stab = app.add_subcommand("stability", "stability grid of a primary period-1 point");
    add_common(stab, common);
    std::string point_name = "I";
    std::string box_text = "-2,2,-2,2";
    std::size_t resolution = 400;
    stab->add_option("--point", point_name, "point class I, II, III or IV");
    stab->add_option("--box", box_text, "k1min,k1max,k2min,k2max");
    stab->add_option("--res", resolution, "cells per axis");
    stab->callback([&] {
        settings = {{"point", point_name}, {"box", box_text}, {"res", resolution}};
        action = [&](Outputs& o, Config&) {
            PointClass cls;
            try {
                cls = parse_point_class(point_name);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto b = parse_list(box_text, 4, "box");
            const StabilityGrid g = stability_region(cls, {b[0], b[1], b[2], b[3]}, resolution);
            o.primary(grid_to_csv(g));
            err << json{{"interior_cells", g.interior_count()}, {"interior_disagreements", g.interior_disagreements()}}
                       .dump()
                << '\n';
        };
    });

    // scan-transport
    auto* scan = app.add_subcommand("scan-transport", "global transport test at one parameter point");
    add_common(scan, common);
    add_params(scan);
    std::optional<std::size_t> opt_m, opt_n;
    std::optional<double> opt_threshold;
    auto add_scan = [&](CLI::App* s) {
        s->add_option("--M", opt_m, "number of seeds");
        s->add_option("--N", opt_n, "iterations of the composed map per seed");
        s->add_option("--threshold", opt_threshold, "escape threshold in y");
    };
    add_scan(scan);
    auto apply_scan = [&](Config& cfg) {
        if (opt_m) cfg.scan.num_seeds = *opt_m;
        if (opt_n) cfg.scan.max_iterations = *opt_n;
        if (opt_threshold) cfg.scan.threshold = *opt_threshold;
        try {
            cfg.scan.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    };
    scan->callback([&] {
        settings = {{"kappa1", params.kappa1}, {"kappa2", params.kappa2}};
        action = [&](Outputs& o, Config& cfg) {
            apply_scan(cfg);
            const TransportResult r = detect_global_transport(params, cfg.scan);
            json j = {{"kappa1", params.kappa1}, {"kappa2", params.kappa2}, {"transport", r.transport}};
            if (r.escape) {
                j["escape"] = {{"seed_index", r.escape->seed_index},
                               {"seed", point_json(r.escape->seed)},
                               {"iterate", r.escape->iterate},
                               {"displacement", r.escape->displacement}};
            }
            o.primary(j.dump(2) + "\n");
        };
    });

    // trace-cb
    auto* trace = app.add_subcommand("trace-cb", "critical boundary along rays");
    add_common(trace, common);
    add_scan(trace);
    std::string method = "direct";
    std::size_t rays = 16;
    std::string angles_text;
    std::string omega_text = "gamma";
    std::optional<double> opt_tol;
    std::string format = "csv";
    trace->add_option("--method", method, "direct or kam")->check(CLI::IsMember({"direct", "kam"}));
    trace->add_option("--rays", rays, "number of rays on [0, pi]");
    trace->add_option("--angles", angles_text, "explicit ray angles in units of pi, comma separated");
    trace->add_option("--omega", omega_text, "rotation number (kam)");
    trace->add_option("--tol", opt_tol, "radial bisection tolerance (direct)");
    trace->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    trace->callback([&] {
        settings = {{"method", method}, {"rays", rays}, {"angles", angles_text}, {"omega", omega_text},
                    {"format", format}};
        action = [&](Outputs& o, Config& cfg) {
            apply_scan(cfg);
            if (opt_tol) cfg.radial_tol = *opt_tol;
            std::vector<double> angles;
            if (angles_text.empty()) {
                angles = ray_angles(rays);
            } else {
                for (double a : parse_list(angles_text, 0, "angles")) angles.push_back(a * std::numbers::pi);
            }
            BoundaryCurve curve;
            try {
                if (method == "direct") {
                    curve = trace_cb_gt(angles, cfg.scan, cfg.radial_tol);
                } else {
                    const double omega = rotation_number_from_string(omega_text).value;
                    curve = trace_cb_omega(omega, angles, cfg.kam, cfg.scan.threads);
                }
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            for (const auto& f : curve.failures) {
                err << json{{"ray_failure", {{"angle", f.angle}, {"reason", f.reason}}}}.dump() << '\n';
            }
            if (curve.points.empty()) {
                throw std::runtime_error("all " + std::to_string(angles.size()) + " rays failed");
            }
            if (format == "csv") {
                o.primary(curve_to_csv(curve));
            } else {
                o.primary(curve_to_json(curve).dump(2) + "\n");
            }
        };
    });

    // kam-solve
    auto* kam = app.add_subcommand("kam-solve", "invariant circle by continuation from kappa = 0");
    add_common(kam, common);
    add_params(kam);
    std::string kam_omega = "golden";
    std::string samples_path;
    kam->add_option("--omega", kam_omega, "rotation number: catalog name or decimal");
    kam->add_option("--samples", samples_path, "also write grid samples as CSV");
    kam->callback([&] {
        settings = {{"kappa1", params.kappa1}, {"kappa2", params.kappa2}, {"omega", kam_omega},
                    {"samples", samples_path}};
        action = [&](Outputs& o, Config& cfg) {
            double omega = 0.0;
            try {
                omega = rotation_number_from_string(kam_omega).value;
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (!params.twist_region()) {
                throw UsageError("parameters outside the twist region |kappa_i| < 2");
            }
            const double r = std::hypot(params.kappa1, params.kappa2);
            const double angle = std::atan2(params.kappa2, params.kappa1);
            FourierCircle K;
            SolveReport report;
            if (r == 0.0) {
                const SolveResult s = solve_invariant_circle(
                    LiftMap::composed(params), FourierCircle::integrable(cfg.kam.initial_modes, omega), cfg.kam.solve);
                K = s.circle;
                report = s.report;
            } else {
                ContinuationOptions co = cfg.kam;
                co.s_max = r;
                const ContinuationResult c = continue_to_breakdown(angle, omega, co);
                if (c.reason != BreakdownReason::ReachedLimit) {
                    throw KamError("circle lost at r = " + format_double(c.first_rejected) + " of " +
                                   format_double(r) + " (" + to_string(c.reason) + ")");
                }
                // Polish at the exact target point.
                const SolveResult s = solve_invariant_circle(LiftMap::composed(params), c.circle, cfg.kam.solve);
                if (!s.report.converged) {
                    throw KamError("final solve failed: " + s.report.failure);
                }
                K = s.circle;
                report = s.report;
            }
            if (!report.converged) {
                throw KamError("solve failed: " + report.failure);
            }
            o.primary(circle_to_json(K, params, report, cfg.kam.solve).dump(2) + "\n");
            if (!samples_path.empty()) {
                o.extra(samples_path, circle_samples_csv(K));
            }
            err << json{{"final_error", report.final_error}, {"modes", report.modes},
                        {"iterations", report.iterations}}
                       .dump()
                << '\n';
        };
    });

    // rotation
    auto* rot = app.add_subcommand("rotation", "rotation number of an orbit");
    add_common(rot, common);
    add_params(rot);
    add_start(rot);
    std::size_t rot_n = 100000;
    bool rot_plain = false;
    double rot_tol = 1e-8;
    rot->add_option("-n,--n", rot_n, "iterations (>= 100)");
    rot->add_flag("--plain", rot_plain, "plain Birkhoff average instead of the weighted one");
    rot->add_option("--tol", rot_tol, "agreement required between the full and half windows");
    rot->callback([&] {
        settings = {{"kappa1", params.kappa1}, {"kappa2", params.kappa2}, {"start", point_json(start)},
                    {"n", rot_n}, {"plain", rot_plain}, {"tol", rot_tol}};
        action = [&](Outputs& o, Config&) {
            RotationEstimate e;
            try {
                e = estimate_rotation_number(params, start, rot_n,
                                             rot_plain ? RotationEstimator::Plain : RotationEstimator::WeightedBirkhoff,
                                             rot_tol);
            } catch (const std::invalid_argument& ex) {
                throw UsageError(ex.what());
            }
            json j = {{"omega", e.value}, {"half_window", e.half_window_value}, {"converged", e.converged}};
            if (std::isfinite(e.value)) {
                j["continued_fraction"] = continued_fraction_of(e.value, 12);
            }
            o.primary(j.dump(2) + "\n");
        };
    });

    // rotmap
    auto* rm = app.add_subcommand("rotmap", "quasi-periodically kicked map");
    add_common(rm, common);
    add_start(rm);
    std::optional<double> rk1, rk2, kbar, dkappa;
    double big_omega = 0.5, phi0 = 0.0;
    std::size_t rm_n = 1000;
    bool compare = false;
    rm->add_option("--kappa1", rk1, "derive kbar, dkappa from kappa1, kappa2");
    rm->add_option("--kappa2", rk2);
    rm->add_option("--kbar", kbar);
    rm->add_option("--dkappa", dkappa);
    rm->add_option("--Omega", big_omega, "phase advance per step");
    rm->add_option("--phi0", phi0, "initial phase");
    rm->add_option("-n,--n", rm_n, "single-kick steps");
    rm->add_flag("--compare", compare, "report deviation from the alternating-kick orbit (Omega = 1/2)");
    rm->callback([&] {
        action = [&](Outputs& o, Config&) {
            RotatingMapParams rp;
            if (rk1 || rk2) {
                if (kbar || dkappa) throw UsageError("give either kappa1/kappa2 or kbar/dkappa");
                rp = RotatingMapParams::from_nasm({rk1.value_or(0.0), rk2.value_or(0.0)});
            } else {
                rp.kbar = kbar.value_or(0.0);
                rp.dkappa = dkappa.value_or(0.0);
            }
            rp.omega = big_omega;
            rp.phi0 = phi0;
            settings = {{"kbar", rp.kbar}, {"dkappa", rp.dkappa}, {"Omega", rp.omega}, {"phi0", rp.phi0},
                        {"start", point_json(start)}, {"n", rm_n}, {"compare", compare}};
            std::vector<RotatingState> states{{start.x, start.y, phi0}};
            for (std::size_t i = 0; i < rm_n; ++i) {
                states.push_back(rotating_step(rp, states.back()));
            }
            std::ostringstream os;
            os << "n,x,y,phi\n";
            for (std::size_t i = 0; i < states.size(); ++i) {
                os << i << ',' << format_double(states[i].x) << ',' << format_double(states[i].y) << ','
                   << format_double(states[i].phi) << '\n';
            }
            o.primary(os.str());
            if (compare) {
                // Kick at phase phi is kbar + dkappa cos(2 pi phi): phi0 = 0 fires kbar + dkappa first.
                const double first = rp.kbar + rp.dkappa * cos_2pi(phi0);
                const double second = rp.kbar + rp.dkappa * cos_2pi(phi0 + 0.5);
                const auto ref = nasm_trajectory({first, second}, start, rm_n);
                double dev = 0.0;
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    dev = std::max(dev, max_dist(ref[i], {states[i].x, states[i].y}));
                }
                err << json{{"max_deviation", dev}}.dump() << '\n';
            }
        };
    });

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        error_record(err, "usage", e.what());
        return 2;
    } catch (const UsageError& e) {
        error_record(err, "usage", e.what());
        return 2;
    }

    try {
        Config cfg = build_config(common, err);
        Outputs outputs(common, out);
        action(outputs, cfg);
        const std::string mpath = outputs.manifest_path();
        if (!mpath.empty()) {
            RunManifest m;
            m.subcommand = app.get_subcommands().front()->get_name();
            m.argv = args;
            m.config = config_to_json(cfg);
            m.config["command"] = settings;
            m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.outputs = outputs.files();
            write_text_file(mpath, m.to_json().dump(2) + "\n");
        }
        return 0;
    } catch (const UsageError& e) {
        error_record(err, "usage", e.what());
        return 2;
    } catch (const ConfigError& e) {
        error_record(err, "config", e.what());
        return 2;
    } catch (const IoError& e) {
        error_record(err, "io", e.what());
        return 1;
    } catch (const std::exception& e) {
        error_record(err, "runtime", e.what());
        return 1;
    }
}

}  // namespace nasm
