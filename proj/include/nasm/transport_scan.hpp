#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nasm/boundary.hpp"
#include "nasm/map_core.hpp"

namespace nasm {

struct SeedBox {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 0.3;
};

enum class EscapeRule {
    Displacement,    // |y_n - y_0| > threshold
    AbsoluteWindow,  // y_n > y_max + threshold or y_n < y_min - threshold
};

enum class SeedMode {
    Lattice,  // nested R2 low-discrepancy points, deterministic
    Random,   // uniform from a seeded mt19937_64
};

struct ScanConfig {
    std::size_t num_seeds = 1000;        // M
    std::size_t max_iterations = 100000;  // N, iterations of the composed map
    SeedBox box;
    double threshold = 2.0;
    EscapeRule rule = EscapeRule::Displacement;
    SeedMode seeding = SeedMode::Lattice;
    std::uint64_t rng_seed = 0;
    unsigned threads = 0;  // 0: default_thread_count()

    /// Throws std::invalid_argument for M or N of zero, threshold below 2, or an empty box.
    void validate() const;
};

/// The M seeds of a configuration. Lattice seeds are nested: the first M of a
/// larger M' are the same points.
[[nodiscard]] std::vector<PhasePoint> scan_seeds(const ScanConfig& cfg);

struct EscapeRecord {
    std::size_t seed_index = 0;
    PhasePoint seed;
    std::size_t iterate = 0;
    double displacement = 0.0;  // y_n - y_0
};

struct TransportResult {
    bool transport = false;
    std::optional<EscapeRecord> escape;  // lowest escaping seed index
};

[[nodiscard]] TransportResult detect_global_transport(const MapParams& params, const ScanConfig& cfg);

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RayBisection {
    double r_c = 0.0;
    double r_lo = 0.0;  // last radius without transport
    double r_hi = 0.0;  // first radius with transport
    std::size_t evaluations = 0;
};

/// Largest radius inside the open twist square |kappa_i| < 2 along the ray.
[[nodiscard]] double twist_edge_radius(double angle);

[[nodiscard]] inline MapParams ray_point(double angle, double r) {
    return {r * std::cos(angle), r * std::sin(angle)};
}

/// Bisection of the transport transition on the ray. The default bracket is
/// [0, twist edge]; both ends of any bracket are verified first.
[[nodiscard]] RayBisection critical_ray_bisection(double angle, const ScanConfig& cfg, double radial_tol,
                                                  std::optional<std::pair<double, double>> bracket = std::nullopt);

/// One bisection per ray; failing rays are recorded and the sweep continues.
[[nodiscard]] BoundaryCurve trace_cb_gt(const std::vector<double>& angles, const ScanConfig& cfg, double radial_tol);

struct ExponentFit {
    double eta = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log(kappa_N - kappa_ref) = slope log N + b, eta = -1/slope.
[[nodiscard]] ExponentFit fit_convergence_exponent(const std::vector<std::pair<double, double>>& samples,
                                                   double kappa_ref = kKappaGolden);

}  // namespace nasm
