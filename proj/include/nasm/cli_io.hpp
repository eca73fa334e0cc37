#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nasm/boundary.hpp"
#include "nasm/config.hpp"
#include "nasm/kam_solver.hpp"
#include "nasm/periodic_orbits.hpp"

namespace nasm {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kCurveSchema = 1;
inline constexpr int kCircleSchema = 1;

/// Shortest text that reads back to the same double (17 significant digits at most).
[[nodiscard]] std::string format_double(double v);

struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;
    nlohmann::ordered_json config;
    std::string version = kVersion;
    double wall_time = 0.0;  // seconds
    std::vector<std::string> outputs;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

[[nodiscard]] nlohmann::ordered_json config_to_json(const Config& cfg);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CurveFormat { Csv, Json };

/// Columns: angle, r_c, kappa1, kappa2, method, omega, tol, N_or_modes, M.
[[nodiscard]] std::string curve_to_csv(const BoundaryCurve& curve);
[[nodiscard]] nlohmann::ordered_json curve_to_json(const BoundaryCurve& curve,
                                                   const nlohmann::ordered_json& manifest = nullptr);
void export_curve(const BoundaryCurve& curve, const std::string& path, CurveFormat format,
                  const nlohmann::ordered_json& manifest = nullptr);
[[nodiscard]] BoundaryCurve curve_from_json(const nlohmann::ordered_json& j);
[[nodiscard]] BoundaryCurve curve_from_csv(const std::string& text);
/// Format chosen by extension (.json, otherwise CSV).
[[nodiscard]] BoundaryCurve load_curve(const std::string& path);

/// Header (omega, params, n, tolerances) plus coefficient arrays. Coefficients
/// are stored as long-double decimal strings so a reload is exact.
[[nodiscard]] nlohmann::ordered_json circle_to_json(const FourierCircle& K, const MapParams& params,
                                                    const SolveReport& report, const SolveOptions& opts);
[[nodiscard]] FourierCircle circle_from_json(const nlohmann::ordered_json& j);
/// theta, x, y on the grid.
[[nodiscard]] std::string circle_samples_csv(const FourierCircle& K);

/// kappa1, kappa2, class, stable (closed form), residue_stable, interior.
[[nodiscard]] std::string grid_to_csv(const StabilityGrid& grid);

void write_text_file(const std::string& path, const std::string& text);

/// Entry point of the command-line tool. Subcommands: orbit, stability,
/// scan-transport, trace-cb, kam-solve, rotation, rotmap.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nasm
