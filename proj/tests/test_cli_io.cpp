#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nasm/cli_io.hpp"
#include "nasm/config.hpp"

using namespace nasm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nasm_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int rc = run_command(args, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return rc;
}

BoundaryCurve sample_curve() {
    BoundaryCurve c;
    BoundaryPoint a;
    a.angle = 0.1;
    a.r_c = 0.5123456789012345;
    a.kappa1 = a.r_c * std::cos(0.1);
    a.kappa2 = a.r_c * std::sin(0.1);
    a.tol = 1e-3;
    a.n_or_modes = 100000;
    a.m = 1000;
    BoundaryPoint b = a;
    b.angle = std::numbers::pi / 3;
    b.method = BoundaryMethod::Kam;
    b.omega = 0.6180339887498949;
    b.n_or_modes = 4096;
    b.m = 0;
    c.points = {a, b};
    c.failures = {{2.0, "no breakdown"}};
    return c;
}

}  // namespace

TEST_CASE("format_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 0.6180339887498949, 1e-300, -2.5e17, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.6180339887498949) == "0.6180339887498949");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("curve export") {
    TempDir t;
    export_curve({}, t.file("empty.csv"), CurveFormat::Csv);
    CHECK(slurp(t.file("empty.csv")) == "angle,r_c,kappa1,kappa2,method,omega,tol,N_or_modes,M\n");
    const BoundaryCurve c = sample_curve();
    export_curve(c, t.file("c.json"), CurveFormat::Json, nlohmann::ordered_json{{"subcommand", "trace-cb"}});
    const BoundaryCurve back = load_curve(t.file("c.json"));
    REQUIRE(back.points.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.points[i].angle == c.points[i].angle);
        CHECK(back.points[i].r_c == c.points[i].r_c);
        CHECK(back.points[i].kappa1 == c.points[i].kappa1);
        CHECK(back.points[i].kappa2 == c.points[i].kappa2);
        CHECK(back.points[i].method == c.points[i].method);
        CHECK(back.points[i].omega == c.points[i].omega);
        CHECK(back.points[i].tol == c.points[i].tol);
        CHECK(back.points[i].n_or_modes == c.points[i].n_or_modes);
        CHECK(back.points[i].m == c.points[i].m);
    }
    REQUIRE(back.failures.size() == 1);
    CHECK(back.failures[0].reason == "no breakdown");
    export_curve(c, t.file("c.csv"), CurveFormat::Csv);
    const std::string csv = slurp(t.file("c.csv"));
    CHECK(csv.find(",kam,0.6180339887498949,") != std::string::npos);
    CHECK(csv.find(",direct,,") != std::string::npos);
    const BoundaryCurve from_csv = load_curve(t.file("c.csv"));
    CHECK(from_csv.points[1].r_c == c.points[1].r_c);
    CHECK_FALSE(from_csv.points[0].omega.has_value());
    CHECK_THROWS_AS(export_curve(c, t.file("missing/dir/c.csv"), CurveFormat::Csv), IoError);
    CHECK_THROWS_AS((void)curve_from_csv("a,b\n"), IoError);
}

TEST_CASE("config file") {
    const Config empty = parse_config("");
    CHECK(empty.scan.threshold == 2.0);
    CHECK(empty.scan.num_seeds == 1000);
    const Config c = parse_config("[scan]\nthreshold = 3\nM=50 # comment\n[kam]\nmax_modes=1024\nbogus=1\n");
    CHECK(c.scan.threshold == 3.0);
    CHECK(c.scan.num_seeds == 50);
    CHECK(c.kam.solve.max_modes == 1024);
    CHECK(c.warnings.size() == 1);
    try {
        (void)parse_config("[scan]\n\nthreshold = two\n");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("threshold") != std::string::npos);
    }
}

TEST_CASE("run_command subcommands") {
    TempDir t;
    std::string out, err;
    CHECK(run({"--help"}, &out) == 0);
    CHECK(out.find("trace-cb") != std::string::npos);
    CHECK(run({"nope"}, nullptr, &err) == 2);
    CHECK(nlohmann::json::parse(err).contains("error"));
    CHECK(run({"orbit", "--kappa1", "0.4", "--n", "10", "--bad"}, nullptr, &err) == 2);

    REQUIRE(run({"orbit", "--kappa1", "0.35", "--kappa2", "0.5", "--n", "4", "-o", t.file("o.csv")}) == 0);
    const std::string orbit = slurp(t.file("o.csv"));
    CHECK(orbit.rfind("n,x,y\n0,0.1,0.1\n", 0) == 0);
    const auto manifest = nlohmann::json::parse(slurp(t.file("o.csv.manifest.json")));
    CHECK(manifest["subcommand"] == "orbit");
    CHECK(manifest["outputs"][0] == t.file("o.csv"));
    CHECK(manifest["config"]["command"]["n"] == 4);

    REQUIRE(run({"stability", "--point", "II", "--box", "-2,2,-2,2", "--res", "40", "-o", t.file("g.csv")},
                nullptr, &err) == 0);
    const std::string grid = slurp(t.file("g.csv"));
    std::istringstream is(grid);
    std::string line;
    std::getline(is, line);
    CHECK(line == "kappa1,kappa2,class,stable,residue_stable,interior");
    std::size_t rows = 0, mismatch = 0;
    while (std::getline(is, line)) {
        ++rows;
        double k1 = 0, k2 = 0;
        int st = 0;
        char cls[8];
        std::sscanf(line.c_str(), "%lf,%lf,%[^,],%d", &k1, &k2, cls, &st);
        const double q = k1 + k2 - 0.5 * k1 * k2;
        mismatch += (q > 0 && q < 2) != (st == 1);
    }
    CHECK(rows == 1600);
    CHECK(mismatch == 0);
    CHECK(run({"stability", "--point", "V"}, nullptr, &err) == 2);
    CHECK(run({"stability", "--box", "1,2,3"}, nullptr, &err) == 2);

    REQUIRE(run({"rotation", "--kappa1", "0", "--y", "0.2", "--n", "1000"}, &out) == 0);
    CHECK(nlohmann::json::parse(out)["omega"].get<double>() == doctest::Approx(0.4));

    REQUIRE(run({"rotmap", "--kappa1", "0.375", "--kappa2", "0.625", "--phi0", "0.5", "--n", "1000", "--compare",
                 "-o", t.file("r.csv")},
                nullptr, &err) == 0);
    CHECK(nlohmann::json::parse(err)["max_deviation"].get<double>() < 1e-12);

    REQUIRE(run({"scan-transport", "--kappa1", "1.2", "--kappa2", "1.2", "--M", "100", "--N", "10000"}, &out) == 0);
    CHECK(nlohmann::json::parse(out)["transport"] == true);
    CHECK(run({"scan-transport", "--threshold", "1"}, nullptr, &err) == 2);

    REQUIRE(run({"kam-solve", "--omega", "golden", "--kappa1", "0.3", "--kappa2", "0", "-o", t.file("k.json"),
                 "--samples", t.file("k.csv")},
                nullptr, &err) == 0);
    const auto circle = nlohmann::ordered_json::parse(slurp(t.file("k.json")));
    CHECK(circle["final_error"].get<double>() < 1e-11);
    CHECK(circle["omega"].get<double>() == 0.6180339887498949);
    const FourierCircle K = circle_from_json(circle);
    CHECK(invariance_error(MapParams{0.3, 0.0}, K).sup < 1e-11);
    CHECK(fs::exists(t.file("k.csv")));
    CHECK(run({"kam-solve", "--kappa1", "0.6"}, nullptr, &err) == 1);  // beyond breakdown on the axis
    CHECK(nlohmann::json::parse(err.substr(0, err.find('\n')))["error"]["kind"] == "runtime");
}

TEST_CASE("trace-cb output is byte-identical across runs and thread counts") {
    TempDir t;
    const std::vector<std::string> base{"trace-cb", "--method", "direct", "--angles", "0.25,0.5", "--M", "50",
                                        "--N", "2000", "--tol", "0.02"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    REQUIRE(run(with({"--threads", "1", "-o", t.file("a.csv")})) == 0);
    REQUIRE(run(with({"--threads", "3", "-o", t.file("b.csv")})) == 0);
    CHECK(slurp(t.file("a.csv")) == slurp(t.file("b.csv")));
    REQUIRE(run(with({"--format", "json", "-o", t.file("c.json")})) == 0);
    const BoundaryCurve c = load_curve(t.file("c.json"));
    CHECK(c.points.size() == 2);
    // Re-run from the manifest's argv.
    const auto m = nlohmann::json::parse(slurp(t.file("a.csv.manifest.json")));
    auto argv = m["argv"].get<std::vector<std::string>>();
    argv.back() = t.file("d.csv");
    REQUIRE(run(argv) == 0);
    CHECK(slurp(t.file("a.csv")) == slurp(t.file("d.csv")));
    // Config file overridden by flags.
    write_text_file(t.file("cfg.ini"), "[scan]\nM = 7\nthreshold = 3\n");
    REQUIRE(run(with({"--config", t.file("cfg.ini"), "-o", t.file("e.csv")})) == 0);
    const auto me = nlohmann::json::parse(slurp(t.file("e.csv.manifest.json")));
    CHECK(me["config"]["scan"]["M"] == 50);
    CHECK(me["config"]["scan"]["threshold"] == 3.0);
    CHECK(run(with({"--config", t.file("nope.ini")}), nullptr, nullptr) == 2);
}
